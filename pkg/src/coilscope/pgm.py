"""Binary PGM (P5, maxval 255) reader/writer and area-average resize."""

from __future__ import annotations

import numpy as np


class PgmError(ValueError):
    """Malformed PGM data; the message carries the failing byte offset."""


def write_pgm(path, image: np.ndarray) -> None:
    """Write a [1,H,W] or [H,W] image with values in [0,1] as 8-bit P5."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 3 and img.shape[0] == 1:
        img = img[0]
    if img.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {image.shape}")
    data = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(data.tobytes())


def _next_token(blob: bytes, off: int) -> tuple[bytes, int]:
    n = len(blob)
    while off < n:
        c = blob[off:off + 1]
        if c == b"#":  # comment runs to end of line
            while off < n and blob[off:off + 1] not in (b"\n", b"\r"):
                off += 1
        elif c.isspace():
            off += 1
        else:
            break
    if off >= n:
        raise PgmError(f"unexpected end of header at byte {off}")
    start = off
    while off < n and not blob[off:off + 1].isspace():
        off += 1
    return blob[start:off], off


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM into a [1,H,W] float64 image scaled to [0,1]."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:2] != b"P5":
        raise PgmError(f"bad magic at byte 0: expected b'P5', got {blob[:2]!r}")
    off = 2
    fields = []
    for _ in range(3):
        tok, off = _next_token(blob, off)
        if not tok.isdigit():
            raise PgmError(f"non-numeric header token {tok!r} at byte {off - len(tok)}")
        fields.append(int(tok))
    w, h, maxval = fields
    if maxval != 255:
        raise PgmError(f"maxval must be 255, got {maxval} at byte {off - len(str(maxval))}")
    if w < 1 or h < 1:
        raise PgmError(f"invalid dimensions {w}x{h} in header ending at byte {off}")
    off += 1  # single whitespace byte after maxval
    expected = w * h
    payload = blob[off:off + expected]
    if len(payload) < expected:
        raise PgmError(f"truncated payload: need {expected} bytes from byte {off}, "
                       f"file has {len(blob) - off}")
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    return pixels.reshape(1, h, w)


def _box_weights(src: int, dst: int) -> np.ndarray:
    """dst x src matrix averaging src cells into dst equal-width bins.

    Exact mean when src is a multiple of dst; edge cells are weighted by
    their fractional overlap otherwise.
    """
    w = np.zeros((dst, src))
    scale = src / dst
    for i in range(dst):
        lo, hi = i * scale, (i + 1) * scale
        j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
        for j in range(j0, min(j1, src)):
            overlap = min(hi, j + 1) - max(lo, j)
            if overlap > 0:
                w[i, j] = overlap / scale
    return w


def resize_to_64(image: np.ndarray) -> np.ndarray:
    """Area-average resize of a [1,H,W] image down to [1,64,64]."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] != 1:
        raise ValueError(f"expected [1,H,W] image, got shape {image.shape}")
    _, h, w = img.shape
    if h < 64 or w < 64:
        raise ValueError(f"resize requires H,W >= 64, got {h}x{w}")
    if (h, w) == (64, 64):
        return img
    wy = _box_weights(h, 64)
    wx = _box_weights(w, 64)
    return (wy @ img[0] @ wx.T)[None, :, :]
