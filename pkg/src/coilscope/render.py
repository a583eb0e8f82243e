"""Procedural rasterization of spiral coils to 64x64 grayscale.

Coils are drawn on a 256x256 binary canvas with seeded jitter in position
and rotation, then area-average downsampled 4x4 to 64x64. The drawing is
scale-normalized: the outer diameter always spans the same fraction of
the canvas, since absolute size cannot survive a fixed-resolution photo
anyway. Wire stroke width is proportional to the wire radius.
"""

from __future__ import annotations

import math

import numpy as np

from .physics import CoilGeometry

CANVAS = 256
OUT_SIZE = 64
_R_OUT_PX = 0.42 * CANVAS  # outer coil radius on the canvas
_MIN_STROKE_PX = 3.0
_WIRE_VALUE = 1.0
_CORE_VALUE = 0.5


def rasterize(g: CoilGeometry, render_seed: int) -> np.ndarray:
    """Render the coil as a [1,64,64] image with values in [0,1]."""
    rng = np.random.default_rng(render_seed)
    dx, dy = rng.uniform(-3.0, 3.0, size=2)
    rot = rng.uniform(-0.15, 0.15)

    c = (CANVAS - 1) / 2.0
    yy, xx = np.mgrid[0:CANVAS, 0:CANVAS]
    x = xx - c - dx
    y = yy - c - dy
    cr, sr = math.cos(rot), math.sin(rot)
    xr = cr * x + sr * y
    yr = -sr * x + cr * y

    r_out = _R_OUT_PX
    r_in = (g.inner_diameter_m / g.outer_diameter_m) * r_out
    stroke = max(_MIN_STROKE_PX,
                 (2.0 * g.wire_radius_m / g.outer_diameter_m) * 2.0 * r_out)

    if g.shape == "circular":
        wire = _circular_spiral_mask(xr, yr, r_in, r_out, g.turns, stroke)
        core_region = np.hypot(xr, yr) < 0.9 * r_in
    else:
        wire = _square_rings_mask(xr, yr, r_in, r_out, g.turns, stroke)
        core_region = np.maximum(np.abs(xr), np.abs(yr)) < 0.9 * r_in

    canvas = np.zeros((CANVAS, CANVAS))
    if g.has_core:
        canvas[core_region] = _CORE_VALUE
    canvas[wire] = _WIRE_VALUE

    block = CANVAS // OUT_SIZE
    small = canvas.reshape(OUT_SIZE, block, OUT_SIZE, block).mean(axis=(1, 3))
    return small[None, :, :]


def _circular_spiral_mask(x, y, r_in, r_out, turns, stroke):
    """Archimedean spiral r(t) = r_in + b*t, t in [0, 2*pi*turns]."""
    rr = np.hypot(x, y)
    theta = np.mod(np.arctan2(y, x), 2.0 * math.pi)
    b = (r_out - r_in) / (2.0 * math.pi * turns)
    # nearest whole-turn index for each pixel, clamped to the spiral's range
    k = np.rint((rr - r_in - b * theta) / (2.0 * math.pi * b))
    k = np.clip(k, 0, turns - 1)
    mask = np.zeros(x.shape, dtype=bool)
    for dk in (-1, 0, 1):
        kk = np.clip(k + dk, 0, turns - 1)
        spiral_r = r_in + b * (theta + 2.0 * math.pi * kk)
        mask |= np.abs(rr - spiral_r) <= stroke / 2.0
    return mask


def _square_rings_mask(x, y, r_in, r_out, turns, stroke):
    """Square spiral approximated as nested concentric square rings."""
    s = np.maximum(np.abs(x), np.abs(y))
    if turns == 1:
        radii = [(r_in + r_out) / 2.0]
    else:
        radii = np.linspace(r_in, r_out, turns)
    mask = np.zeros(x.shape, dtype=bool)
    for r in radii:
        mask |= np.abs(s - r) <= stroke / 2.0
    return mask
