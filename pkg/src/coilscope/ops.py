"""Dense-tensor primitives with exact analytic backward passes.

Everything operates on float64 numpy arrays. Convolution is unit-stride
with explicit zero padding; strided downsampling is done by pooling.
All functions are pure: they never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class ShapeError(ValueError):
    """Raised when operand shapes are inconsistent."""


def as_tensor(x) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ShapeError(msg)


@dataclass
class ConvKernel:
    """2-D convolution weights [out_c, in_c, kh, kw] plus per-channel bias."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weights = as_tensor(self.weights)
        self.bias = as_tensor(self.bias)
        _require(self.weights.ndim == 4,
                 f"kernel weights must be rank 4, got shape {self.weights.shape}")
        _require(self.bias.shape == (self.weights.shape[0],),
                 f"bias shape {self.bias.shape} does not match "
                 f"{self.weights.shape[0]} output channels")
        _require(self.weights.shape[2] >= 1 and self.weights.shape[3] >= 1,
                 f"kernel spatial extents must be >= 1, got {self.weights.shape[2:]}")


@dataclass
class PoolSpec:
    """Pooling window/stride/mode. Stride defaults to the window (non-overlapping)."""

    window: tuple[int, int]
    stride: tuple[int, int] | None = None
    mode: str = "max"

    def __post_init__(self):
        if self.stride is None:
            self.stride = tuple(self.window)
        self.window = tuple(int(v) for v in self.window)
        self.stride = tuple(int(v) for v in self.stride)
        _require(all(v >= 1 for v in self.window + self.stride),
                 f"window {self.window} and stride {self.stride} extents must be >= 1")
        if self.mode not in ("max", "average"):
            raise ValueError(f"pool mode must be 'max' or 'average', got {self.mode!r}")


@dataclass
class DenseLayer:
    """Fully connected layer: y = W x + b, W of shape [out_dim, in_dim]."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weights = as_tensor(self.weights)
        self.bias = as_tensor(self.bias)
        _require(self.weights.ndim == 2,
                 f"dense weights must be rank 2, got shape {self.weights.shape}")
        _require(self.bias.shape == (self.weights.shape[0],),
                 f"bias shape {self.bias.shape} does not match out_dim "
                 f"{self.weights.shape[0]}")


def _conv_prepare(x: np.ndarray, kernel: ConvKernel, padding: tuple[int, int]):
    """Validate shapes, pad, and build the im2col matrix.

    Returns (col, out_h, out_w) where col has shape (in_c*kh*kw, out_h*out_w).
    """
    _require(x.ndim == 3, f"conv input must be [C,H,W], got shape {x.shape}")
    out_c, in_c, kh, kw = kernel.weights.shape
    py, px = padding
    _require(x.shape[0] == in_c,
             f"input has {x.shape[0]} channels but kernel expects {in_c} "
             f"(kernel shape {kernel.weights.shape}, input shape {x.shape})")
    hp, wp = x.shape[1] + 2 * py, x.shape[2] + 2 * px
    _require(hp >= kh and wp >= kw,
             f"padded input {hp}x{wp} smaller than kernel {kh}x{kw}")
    xp = np.pad(x, ((0, 0), (py, py), (px, px))) if (py or px) else x
    oh, ow = hp - kh + 1, wp - kw + 1
    col = np.empty((in_c, kh, kw, oh, ow))
    for m in range(kh):
        for n in range(kw):
            col[:, m, n] = xp[:, m:m + oh, n:n + ow]
    return col.reshape(in_c * kh * kw, oh * ow), oh, ow


def conv2d_forward(x: np.ndarray, kernel: ConvKernel,
                   padding: tuple[int, int] = (0, 0)) -> np.ndarray:
    """Unit-stride cross-correlation with zero padding.

    O[c,i,j] = bias[c] + sum_{cin,m,n} I[cin, i+m, j+n] * K[c,cin,m,n]
    """
    out, _ = conv2d_forward_cached(x, kernel, padding)
    return out


def conv2d_forward_cached(x: np.ndarray, kernel: ConvKernel,
                          padding: tuple[int, int] = (0, 0)):
    """conv2d_forward that also returns the im2col matrix for backward reuse."""
    x = as_tensor(x)
    out_c = kernel.weights.shape[0]
    col, oh, ow = _conv_prepare(x, kernel, padding)
    out = (kernel.weights.reshape(out_c, -1) @ col).reshape(out_c, oh, ow)
    return out + kernel.bias[:, None, None], col


def conv2d_backward(x: np.ndarray, kernel: ConvKernel, upstream: np.ndarray,
                    padding: tuple[int, int] = (0, 0), col: np.ndarray | None = None,
                    need_input_grad: bool = True):
    """Adjoint of conv2d_forward.

    Returns (grad_weights, grad_bias, grad_input) for the scalar
    sum(upstream * output). `col` may pass the im2col matrix cached by
    conv2d_forward_cached; grad_input is None when need_input_grad is
    False.
    """
    x = as_tensor(x)
    upstream = as_tensor(upstream)
    out_c, in_c, kh, kw = kernel.weights.shape
    py, px = padding
    if col is None:
        col, oh, ow = _conv_prepare(x, kernel, padding)
    else:
        oh = x.shape[1] + 2 * py - kh + 1
        ow = x.shape[2] + 2 * px - kw + 1
    _require(upstream.shape == (out_c, oh, ow),
             f"upstream shape {upstream.shape} does not match conv output "
             f"{(out_c, oh, ow)}")
    up_mat = upstream.reshape(out_c, oh * ow)
    grad_b = up_mat.sum(axis=1)
    grad_w = (up_mat @ col.T).reshape(kernel.weights.shape)
    if not need_input_grad:
        return grad_w, grad_b, None
    # col2im: scatter-add the column gradient back onto the padded input
    gcol = (kernel.weights.reshape(out_c, -1).T @ up_mat)
    gcol = gcol.reshape(in_c, kh, kw, oh, ow)
    grad_xp = np.zeros((in_c, x.shape[1] + 2 * py, x.shape[2] + 2 * px))
    for m in range(kh):
        for n in range(kw):
            grad_xp[:, m:m + oh, n:n + ow] += gcol[:, m, n]
    grad_x = grad_xp[:, py:py + x.shape[1], px:px + x.shape[2]]
    return grad_w, grad_b, np.ascontiguousarray(grad_x)


def _pool_windows(x: np.ndarray, spec: PoolSpec) -> np.ndarray:
    _require(x.ndim == 3, f"pool input must be [C,H,W], got shape {x.shape}")
    m, n = spec.window
    sy, sx = spec.stride
    h, w = x.shape[1], x.shape[2]
    _require(h >= m and w >= n,
             f"input {h}x{w} smaller than pool window {m}x{n}")
    # windows must tile exactly; no implicit padding or truncation
    _require((h - m) % sy == 0 and (w - n) % sx == 0,
             f"pool window {m}x{n} stride {sy}x{sx} does not tile input {h}x{w}")
    win = sliding_window_view(x, (m, n), axis=(1, 2))
    return win[:, ::sy, ::sx]


def pool_forward(x: np.ndarray, spec: PoolSpec) -> np.ndarray:
    """Max or average pooling over non-truncating windows."""
    x = as_tensor(x)
    m, n = spec.window
    if spec.stride == spec.window:
        # non-overlapping windows: reduce m*n strided slices elementwise
        _require(x.ndim == 3, f"pool input must be [C,H,W], got shape {x.shape}")
        c, h, w = x.shape
        _require(h % m == 0 and w % n == 0,
                 f"pool window {m}x{n} does not tile input {h}x{w}")
        cells = [x[:, dm::m, dn::n] for dm in range(m) for dn in range(n)]
        if spec.mode == "max":
            return np.maximum.reduce(cells)
        return np.add.reduce(cells) / (m * n)
    win = _pool_windows(x, spec)
    if spec.mode == "max":
        return win.max(axis=(3, 4))
    return win.mean(axis=(3, 4))


def pool_backward(x: np.ndarray, spec: PoolSpec, upstream: np.ndarray) -> np.ndarray:
    """Adjoint of pool_forward.

    Max mode routes each upstream value to the argmax cell of its window,
    ties broken to the first cell in row-major order. Average mode spreads
    upstream/(M*N) uniformly.
    """
    x = as_tensor(x)
    upstream = as_tensor(upstream)
    m, n = spec.window
    sy, sx = spec.stride
    if spec.stride == spec.window:
        c, h, w = x.shape
        oh, ow = h // m, w // n
        _require(upstream.shape == (c, oh, ow),
                 f"upstream shape {upstream.shape} does not match pool output "
                 f"{(c, oh, ow)}")
        if spec.mode == "average":
            share = upstream[:, :, None, :, None] / (m * n)
            return np.broadcast_to(share, (c, oh, m, ow, n)).reshape(c, h, w).copy()
        cells = np.stack([x[:, dm::m, dn::n] for dm in range(m) for dn in range(n)])
        winner = cells.argmax(axis=0)  # first max in row-major window order
        gx = np.zeros_like(x)
        for k in range(m * n):
            dm, dn = divmod(k, n)
            gx[:, dm::m, dn::n] = np.where(winner == k, upstream, 0.0)
        return gx
    win = _pool_windows(x, spec)
    c, oh, ow = win.shape[:3]
    _require(upstream.shape == (c, oh, ow),
             f"upstream shape {upstream.shape} does not match pool output {(c, oh, ow)}")
    gx = np.zeros_like(x)
    if spec.mode == "average":
        share = upstream / (m * n)
        for dm in range(m):
            for dn in range(n):
                gx[:, dm:dm + sy * oh:sy, dn:dn + sx * ow:sx] += share
        return gx
    flat_idx = win.reshape(c, oh, ow, m * n).argmax(axis=-1)
    rows = flat_idx // n + sy * np.arange(oh)[None, :, None]
    cols = flat_idx % n + sx * np.arange(ow)[None, None, :]
    chan = np.arange(c)[:, None, None]
    np.add.at(gx, (chan, rows, cols), upstream)
    return gx


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(as_tensor(x), 0.0)


def relu_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    x = as_tensor(x)
    upstream = as_tensor(upstream)
    _require(x.shape == upstream.shape,
             f"relu input shape {x.shape} != upstream shape {upstream.shape}")
    # subgradient at exactly 0 is 0
    return np.where(x > 0.0, upstream, 0.0)


def dense_forward(x: np.ndarray, layer: DenseLayer) -> np.ndarray:
    x = as_tensor(x)
    _require(x.ndim == 1, f"dense input must be rank 1, got shape {x.shape}")
    _require(x.shape[0] == layer.weights.shape[1],
             f"dense input length {x.shape[0]} != in_dim {layer.weights.shape[1]}")
    return layer.weights @ x + layer.bias


def dense_backward(x: np.ndarray, layer: DenseLayer, upstream: np.ndarray):
    """Returns (grad_weights, grad_bias, grad_input)."""
    x = as_tensor(x)
    upstream = as_tensor(upstream)
    _require(x.ndim == 1 and x.shape[0] == layer.weights.shape[1],
             f"dense input shape {x.shape} inconsistent with W {layer.weights.shape}")
    _require(upstream.shape == (layer.weights.shape[0],),
             f"upstream shape {upstream.shape} != out_dim ({layer.weights.shape[0]},)")
    grad_w = np.outer(upstream, x)
    grad_b = upstream.copy()
    grad_x = layer.weights.T @ upstream
    return grad_w, grad_b, grad_x


def concat(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Concatenate two nonempty rank-1 tensors."""
    a, b = as_tensor(a), as_tensor(b)
    _require(a.ndim == 1 and b.ndim == 1,
             f"concat needs rank-1 inputs, got shapes {a.shape} and {b.shape}")
    _require(a.shape[0] >= 1 and b.shape[0] >= 1,
             f"concat operands must be nonempty, got lengths {a.shape[0]}, {b.shape[0]}")
    return np.concatenate([a, b])


def concat_backward(upstream: np.ndarray, d1: int):
    """Split the upstream gradient at index d1."""
    upstream = as_tensor(upstream)
    _require(upstream.ndim == 1 and 1 <= d1 < upstream.shape[0],
             f"cannot split upstream of shape {upstream.shape} at {d1}")
    return upstream[:d1].copy(), upstream[d1:].copy()
