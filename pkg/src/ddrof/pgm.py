"""Netpbm PGM (P2 ASCII / P5 binary) image I/O with [0, 1] intensities."""

from __future__ import annotations

import numpy as np


class PgmError(ValueError):
    """Malformed PGM input; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class _Tokens:
    """Whitespace/comment-aware tokenizer over the header bytes."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip(self):
        data = self.data
        while self.pos < len(data):
            c = data[self.pos:self.pos + 1]
            if c.isspace():
                self.pos += 1
            elif c == b"#":
                nl = data.find(b"\n", self.pos)
                self.pos = len(data) if nl < 0 else nl + 1
            else:
                return

    def next(self, what: str) -> bytes:
        self._skip()
        if self.pos >= len(self.data):
            raise PgmError(f"unexpected end of file while reading {what}", self.pos)
        start = self.pos
        while self.pos < len(self.data) and not self.data[self.pos:self.pos + 1].isspace():
            self.pos += 1
        return self.data[start:self.pos]

    def next_int(self, what: str, lo: int, hi: int) -> int:
        start = self.pos
        tok = self.next(what)
        try:
            value = int(tok)
        except ValueError:
            raise PgmError(f"invalid {what} {tok!r}", start) from None
        if not lo <= value <= hi:
            raise PgmError(f"{what} {value} outside [{lo}, {hi}]", start)
        return value


def read_pgm(path) -> np.ndarray:
    """Read a P2/P5 PGM file as a float64 image scaled to [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    toks = _Tokens(data)
    magic = toks.next("magic number")
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"not a PGM file (magic {magic!r})", 0)
    width = toks.next_int("width", 1, 1 << 30)
    height = toks.next_int("height", 1, 1 << 30)
    maxval = toks.next_int("maxval", 1, 65535)
    count = width * height

    if magic == b"P5":
        # single whitespace byte separates the header from the raster
        if toks.pos >= len(data) or not data[toks.pos:toks.pos + 1].isspace():
            raise PgmError("missing whitespace after maxval", toks.pos)
        start = toks.pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(data) - start < need:
            raise PgmError(f"truncated raster: expected {need} bytes, "
                           f"got {len(data) - start}", len(data))
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=start)
        values = raw.astype(np.float64)
    else:
        values = np.empty(count)
        for k in range(count):
            values[k] = toks.next_int("pixel value", 0, maxval)

    if values.max(initial=0.0) > maxval:
        raise PgmError(f"pixel value exceeds maxval {maxval}", len(data))
    return values.reshape(height, width) / maxval


def write_pgm(u: np.ndarray, path, maxval: int = 255, binary: bool = True):
    """Write an image, rounding to the nearest level and clamping to [0, maxval]."""
    if not 1 <= maxval <= 65535:
        raise ValueError(f"maxval {maxval} outside [1, 65535]")
    u = np.asarray(u)
    levels = np.clip(np.rint(u * maxval), 0, maxval)
    height, width = u.shape
    header = f"{'P5' if binary else 'P2'}\n{width} {height}\n{maxval}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
            fh.write(levels.astype(dtype).tobytes())
        else:
            for row in levels.astype(int):
                fh.write((" ".join(str(v) for v in row) + "\n").encode("ascii"))
