"""Nonoverlapping rectangular decompositions of the pixel grid.

A decomposition tiles the grid into an equal-size grid of rectangular
subdomains ("window" shape) or into full-width/full-height stripes, colors
them so that same-colored local problems are independent, and provides the
restriction / zero-extension maps between the full grid and subdomains.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import sq_norm, zeros_dual

WINDOW = "window"
STRIPE = "stripe"


@dataclass(frozen=True)
class SubdomainView:
    """One subdomain's rectangles: owning, extended, and read footprint.

    The owning rectangle is rows [row0, row1) x cols [col0, col1).  The
    extended region adds the adjacent pixel line below and to the right
    (clipped to the grid, excluding the diagonal corner); zero-extended
    divergence of subdomain values is supported there.  The read stencil
    additionally includes the adjacent lines above and to the left: local
    data assembly never looks at any other pixel.
    """

    index: int
    color: int
    row0: int
    row1: int
    col0: int
    col1: int
    grid_rows: int
    grid_cols: int

    @property
    def height(self) -> int:
        return self.row1 - self.row0

    @property
    def width(self) -> int:
        return self.col1 - self.col0

    @property
    def ext_row1(self) -> int:
        return min(self.row1 + 1, self.grid_rows)

    @property
    def ext_col1(self) -> int:
        return min(self.col1 + 1, self.grid_cols)

    @property
    def ext_height(self) -> int:
        return self.ext_row1 - self.row0

    @property
    def ext_width(self) -> int:
        return self.ext_col1 - self.col0

    @property
    def has_corner(self) -> bool:
        # true when the extended rectangle sticks out both below and right,
        # so its bottom-right cell is outside the extended region proper
        return self.ext_row1 == self.row1 + 1 and self.ext_col1 == self.col1 + 1

    @property
    def owner_slices(self) -> tuple[slice, slice]:
        return slice(self.row0, self.row1), slice(self.col0, self.col1)

    @property
    def ext_slices(self) -> tuple[slice, slice]:
        return slice(self.row0, self.ext_row1), slice(self.col0, self.ext_col1)

    def owner_mask(self) -> np.ndarray:
        m = np.zeros((self.grid_rows, self.grid_cols), dtype=bool)
        m[self.owner_slices] = True
        return m

    def extended_mask(self) -> np.ndarray:
        m = self.owner_mask()
        if self.row1 < self.grid_rows:
            m[self.row1, self.col0:self.col1] = True
        if self.col1 < self.grid_cols:
            m[self.row0:self.row1, self.col1] = True
        return m

    def read_stencil_mask(self) -> np.ndarray:
        m = self.extended_mask()
        if self.row0 > 0:
            m[self.row0 - 1, self.col0:self.ext_col1] = True
        if self.col0 > 0:
            m[self.row0:self.ext_row1, self.col0 - 1] = True
        return m


@dataclass(frozen=True)
class Decomposition:
    rows: int
    cols: int
    sub_rows: int
    sub_cols: int
    shape: str
    n_colors: int
    views: tuple[SubdomainView, ...]

    @property
    def n_subdomains(self) -> int:
        return self.sub_rows * self.sub_cols

    @cached_property
    def color_groups(self) -> tuple[tuple[SubdomainView, ...], ...]:
        groups: list[list[SubdomainView]] = [[] for _ in range(self.n_colors)]
        for v in self.views:
            groups[v.color].append(v)
        return tuple(tuple(g) for g in groups)


def make_decomposition(rows: int, cols: int, sub_rows: int, sub_cols: int,
                       shape: str = WINDOW) -> Decomposition:
    """Partition a rows x cols grid into sub_rows x sub_cols equal rectangles.

    Window decompositions are colored (i - j) mod 3 over the subdomain grid;
    stripes (sub_rows == 1 or sub_cols == 1) alternate between 2 colors.
    Color ids are compacted, so degenerate cases use fewer colors (a 1x1
    decomposition has a single color).
    """
    if shape not in (WINDOW, STRIPE):
        raise ValueError(f"unknown decomposition shape {shape!r}")
    if rows < 1 or cols < 1 or sub_rows < 1 or sub_cols < 1:
        raise ValueError("grid and subdomain-grid dimensions must be positive")
    if rows % sub_rows != 0 or cols % sub_cols != 0:
        raise ValueError(
            f"subdomain grid {sub_rows}x{sub_cols} does not divide image {rows}x{cols}")
    if shape == STRIPE and sub_rows > 1 and sub_cols > 1:
        raise ValueError("stripe decomposition requires sub_rows == 1 or sub_cols == 1")

    h = rows // sub_rows
    w = cols // sub_cols
    raw_colors = np.empty((sub_rows, sub_cols), dtype=int)
    for i in range(sub_rows):
        for j in range(sub_cols):
            if shape == WINDOW:
                raw_colors[i, j] = (i - j) % 3
            else:
                raw_colors[i, j] = (i + j) % 2
    used = sorted(set(raw_colors.ravel().tolist()))
    remap = {c: k for k, c in enumerate(used)}

    views = []
    for i in range(sub_rows):
        for j in range(sub_cols):
            views.append(SubdomainView(
                index=i * sub_cols + j,
                color=remap[raw_colors[i, j]],
                row0=i * h, row1=(i + 1) * h,
                col0=j * w, col1=(j + 1) * w,
                grid_rows=rows, grid_cols=cols,
            ))
    return Decomposition(rows=rows, cols=cols, sub_rows=sub_rows, sub_cols=sub_cols,
                         shape=shape, n_colors=len(used), views=tuple(views))


def restrict_subdomain(p: np.ndarray, view: SubdomainView) -> np.ndarray:
    """Copy of the dual-field values on one subdomain's owning rectangle."""
    rs, cs = view.owner_slices
    return p[rs, cs].copy()


def restrict(p: np.ndarray, dec: Decomposition, color: int) -> list[np.ndarray]:
    """Values of p on each subdomain of the given color, ordered by index."""
    if not 0 <= color < dec.n_colors:
        raise ValueError(f"color {color} out of range 0..{dec.n_colors - 1}")
    return [restrict_subdomain(p, v) for v in dec.color_groups[color]]


def extend(local_values: list[np.ndarray], dec: Decomposition, color: int) -> np.ndarray:
    """Zero-extension of per-subdomain values of one color to the full grid."""
    if not 0 <= color < dec.n_colors:
        raise ValueError(f"color {color} out of range 0..{dec.n_colors - 1}")
    group = dec.color_groups[color]
    if len(local_values) != len(group):
        raise ValueError(f"expected {len(group)} local blocks, got {len(local_values)}")
    p = zeros_dual(dec.rows, dec.cols)
    for v, block in zip(group, local_values):
        rs, cs = v.owner_slices
        p[rs, cs] = block
    return p


def local_divergence(ps: np.ndarray, view: SubdomainView) -> np.ndarray:
    """Divergence of the zero-extension of subdomain values, on the extended rectangle.

    Equals the full-grid divergence of the zero-extended field restricted to
    the extended rectangle; the zero-extended divergence vanishes everywhere
    else (including the rectangle's diagonal corner cell, which stays 0).
    """
    h, w = view.height, view.width
    eh, ew = view.ext_height, view.ext_width
    d = np.zeros((eh, ew))
    # row component: +value where the global row is not the grid's last row,
    # -previous value one row down (never writes the corner cell)
    lim_r = h if view.row1 < view.grid_rows else h - 1
    d[:lim_r, :w] += ps[:lim_r, :, 0]
    d[1:eh, :w] -= ps[:eh - 1, :, 0]
    lim_c = w if view.col1 < view.grid_cols else w - 1
    d[:h, :lim_c] += ps[:, :lim_c, 1]
    d[:h, 1:ew] -= ps[:, :ew - 1, 1]
    return d


def local_divergence_adjoint(v: np.ndarray, view: SubdomainView) -> np.ndarray:
    """Adjoint of `local_divergence`: minus the clipped forward gradient."""
    h, w = view.height, view.width
    out = np.zeros((h, w, 2))
    lim_r = h if view.row1 < view.grid_rows else h - 1
    out[:lim_r, :, 0] = v[:lim_r, :w] - v[1:lim_r + 1, :w]
    lim_c = w if view.col1 < view.grid_cols else w - 1
    out[:, :lim_c, 1] = v[:h, :lim_c] - v[:h, 1:lim_c + 1]
    return out


def bregman_distance(p: np.ndarray, q: np.ndarray, dec: Decomposition) -> float:
    """Sum over subdomains of 0.5 * ||div of zero-extended (p - q)||^2.

    This is the blockwise Bregman distance of the dual objective; the
    decomposition's convergence bounds are stated in this quantity.  Color
    grouping is immaterial here because extended supports of same-colored
    subdomains are disjoint.
    """
    if p.shape != q.shape or p.shape[:2] != (dec.rows, dec.cols):
        raise ValueError("field shapes do not match the decomposition grid")
    diff = p - q
    total = 0.0
    for v in dec.views:
        rs, cs = v.owner_slices
        total += sq_norm(local_divergence(diff[rs, cs], v))
    return 0.5 * total


def interface_penalty_constant(dec: Decomposition) -> float:
    """Constant bounding the extra divergence energy created at interfaces.

    Window shape: 7*(M*Ns + Ms*N) - 11*Ms*Ns for an M x N grid split into
    Ms x Ns subdomains.  Stripes spanning the full grid length L use the
    sharper per-stripe bound 7L - 5, summed over stripes.
    """
    m, n = dec.rows, dec.cols
    ms, ns = dec.sub_rows, dec.sub_cols
    if dec.shape == STRIPE:
        length = m if ms == 1 else n
        return float(dec.n_subdomains * (7 * length - 5))
    return float(7 * (m * ns + ms * n) - 11 * ms * ns)


def interface_length(dec: Decomposition) -> int:
    """Total pixel length of the subdomain interfaces: M*(Ns-1) + N*(Ms-1)."""
    return dec.rows * (dec.sub_cols - 1) + dec.cols * (dec.sub_rows - 1)
