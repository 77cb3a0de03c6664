"""Matplotlib rendering of benchmark outputs to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_decay_figure(curves, path, title: str = "Energy decay"):
    """Log-log plot of relative energy gap per outer iteration.

    curves: list of (label, gaps) pairs; gap entries that are None or
    nonpositive are dropped (the log axis cannot show them).
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, gaps in curves:
        xs, ys = [], []
        for n, gap in enumerate(gaps):
            if n >= 1 and gap is not None and gap > 0:
                xs.append(n)
                ys.append(gap)
        if xs:
            ax.loglog(xs, ys, label=label)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("relative energy gap")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_image_panel(images, path):
    """Row of grayscale images with titles; intensities shown on [0, 1]."""
    n = len(images)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.4), squeeze=False)
    for ax, (label, img) in zip(axes[0], images):
        ax.imshow(np.asarray(img), cmap="gray", vmin=0.0, vmax=1.0)
        ax.set_title(label, fontsize=10)
        ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
