"""The multi-modal coil network: image encoder + frequency embedding + decoder.

Architecture (fixed):
  image [1,64,64] -> 3 x (conv 3x3 pad 1 -> ReLU -> maxpool 2x2),
  channels 1 -> 32 -> 64 -> 128, spatial 64 -> 32 -> 16 -> 8,
  flatten to 8192; standardized log10(freq) -> dense 1->64 -> ReLU;
  concat (8256) -> dense 8256->128 -> ReLU -> dense 128->2.

Outputs are in normalized space: standardized log10 of L and Q, in
that order. predict() inverts the normalization, so raw predictions
are always strictly positive.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .ops import (ConvKernel, DenseLayer, PoolSpec, ShapeError, as_tensor,
                  concat, concat_backward, conv2d_backward,
                  conv2d_forward_cached, dense_backward, dense_forward,
                  pool_backward, pool_forward, relu_backward, relu_forward)

IMAGE_SHAPE = (1, 64, 64)
FLAT_DIM = 128 * 8 * 8  # 8192
FREQ_EMBED_DIM = 64
HIDDEN_DIM = 128

CHECKPOINT_MAGIC = b"CNET"
CHECKPOINT_VERSION = 1


@dataclass
class NormStats:
    """Standardization statistics for log10(L), log10(Q) and log10(f).

    Fitted on the training split only; stds must be strictly positive.
    """

    mean_log_l: float = 0.0
    std_log_l: float = 1.0
    mean_log_q: float = 0.0
    std_log_q: float = 1.0
    mean_log_f: float = 0.0
    std_log_f: float = 1.0

    def __post_init__(self):
        for name in ("std_log_l", "std_log_q", "std_log_f"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")

    def normalize_freq(self, freq_hz: float) -> float:
        return (math.log10(freq_hz) - self.mean_log_f) / self.std_log_f

    def normalize_labels(self, l_h: float, q: float) -> np.ndarray:
        return np.array([
            (math.log10(l_h) - self.mean_log_l) / self.std_log_l,
            (math.log10(q) - self.mean_log_q) / self.std_log_q,
        ])

    def denormalize(self, out: np.ndarray) -> tuple[float, float]:
        l_h = 10.0 ** (out[0] * self.std_log_l + self.mean_log_l)
        q = 10.0 ** (out[1] * self.std_log_q + self.mean_log_q)
        return float(l_h), float(q)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.mean_log_l, self.std_log_l, self.mean_log_q,
                self.std_log_q, self.mean_log_f, self.std_log_f)


@dataclass
class Prediction:
    """Denormalized model output: inductance in henries, dimensionless Q."""

    inductance_h: float
    quality: float


class CoilNet:
    """The full parameterized model plus its normalization statistics."""

    def __init__(self, conv1: ConvKernel, conv2: ConvKernel, conv3: ConvKernel,
                 freq_embed: DenseLayer, fc1: DenseLayer, fc2: DenseLayer,
                 norm: NormStats | None = None):
        self.conv1 = conv1
        self.conv2 = conv2
        self.conv3 = conv3
        self.freq_embed = freq_embed
        self.fc1 = fc1
        self.fc2 = fc2
        self.norm = norm if norm is not None else NormStats()
        self.pool = PoolSpec(window=(2, 2), mode="max")
        if fc1.weights.shape != (HIDDEN_DIM, FLAT_DIM + FREQ_EMBED_DIM):
            raise ShapeError(f"fc1 must be {HIDDEN_DIM}x{FLAT_DIM + FREQ_EMBED_DIM}, "
                             f"got {fc1.weights.shape}")
        if fc2.weights.shape != (2, HIDDEN_DIM):
            raise ShapeError(f"fc2 must be 2x{HIDDEN_DIM}, got {fc2.weights.shape}")

    def parameters(self) -> dict[str, np.ndarray]:
        """Name -> live parameter array, in fixed serialization order."""
        return {
            "conv1.weights": self.conv1.weights, "conv1.bias": self.conv1.bias,
            "conv2.weights": self.conv2.weights, "conv2.bias": self.conv2.bias,
            "conv3.weights": self.conv3.weights, "conv3.bias": self.conv3.bias,
            "freq_embed.weights": self.freq_embed.weights,
            "freq_embed.bias": self.freq_embed.bias,
            "fc1.weights": self.fc1.weights, "fc1.bias": self.fc1.bias,
            "fc2.weights": self.fc2.weights, "fc2.bias": self.fc2.bias,
        }


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init(seed: int) -> CoilNet:
    """Build a CoilNet with fan-in-scaled uniform weights and zero biases."""
    rng = np.random.default_rng(seed)
    convs = []
    in_c = 1
    for out_c in (32, 64, 128):
        w = _uniform(rng, (out_c, in_c, 3, 3), fan_in=in_c * 9)
        convs.append(ConvKernel(weights=w, bias=np.zeros(out_c)))
        in_c = out_c
    freq_embed = DenseLayer(weights=_uniform(rng, (FREQ_EMBED_DIM, 1), fan_in=1),
                            bias=np.zeros(FREQ_EMBED_DIM))
    fc1 = DenseLayer(weights=_uniform(rng, (HIDDEN_DIM, FLAT_DIM + FREQ_EMBED_DIM),
                                      fan_in=FLAT_DIM + FREQ_EMBED_DIM),
                     bias=np.zeros(HIDDEN_DIM))
    fc2 = DenseLayer(weights=_uniform(rng, (2, HIDDEN_DIM), fan_in=HIDDEN_DIM),
                     bias=np.zeros(2))
    return CoilNet(convs[0], convs[1], convs[2], freq_embed, fc1, fc2)


def _check_inputs(image: np.ndarray, freq_hz: float) -> np.ndarray:
    image = as_tensor(image)
    if image.shape != IMAGE_SHAPE:
        raise ShapeError(f"image must have shape {IMAGE_SHAPE}, got {image.shape}")
    if image.min() < 0.0 or image.max() > 1.0:
        raise ValueError(f"pixel values must lie in [0,1], got range "
                         f"[{image.min()}, {image.max()}]")
    if not freq_hz > 0.0:
        raise ValueError(f"frequency must be positive, got {freq_hz}")
    return image


def forward_cached(net: CoilNet, image: np.ndarray, freq_hz: float) -> dict:
    """Forward pass keeping every intermediate needed by backward()."""
    image = _check_inputs(image, freq_hz)
    cache: dict = {"image": image}
    h = image
    for i, conv in enumerate((net.conv1, net.conv2, net.conv3), start=1):
        z, col = conv2d_forward_cached(h, conv, padding=(1, 1))
        a = relu_forward(z)
        p = pool_forward(a, net.pool)
        cache[f"in{i}"], cache[f"z{i}"], cache[f"a{i}"] = h, z, a
        cache[f"col{i}"] = col
        h = p
    flat = h.reshape(-1)
    fnorm = np.array([net.norm.normalize_freq(freq_hz)])
    fz = dense_forward(fnorm, net.freq_embed)
    fe = relu_forward(fz)
    fused = concat(flat, fe)
    h1z = dense_forward(fused, net.fc1)
    h1 = relu_forward(h1z)
    out = dense_forward(h1, net.fc2)
    cache.update(pool_out=h, flat=flat, fnorm=fnorm, fz=fz, fe=fe,
                 fused=fused, h1z=h1z, h1=h1, out=out)
    return cache


def forward(net: CoilNet, image: np.ndarray, freq_hz: float) -> np.ndarray:
    """Normalized 2-vector output: [L_norm, Q_norm]."""
    return forward_cached(net, image, freq_hz)["out"]


def backward(net: CoilNet, cache: dict, upstream: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of sum(upstream * out) for every parameter, by name."""
    grads: dict[str, np.ndarray] = {}
    gw2, gb2, gh1 = dense_backward(cache["h1"], net.fc2, upstream)
    grads["fc2.weights"], grads["fc2.bias"] = gw2, gb2
    gh1z = relu_backward(cache["h1z"], gh1)
    gw1, gb1, gfused = dense_backward(cache["fused"], net.fc1, gh1z)
    grads["fc1.weights"], grads["fc1.bias"] = gw1, gb1
    gflat, gfe = concat_backward(gfused, FLAT_DIM)
    gfz = relu_backward(cache["fz"], gfe)
    gfw, gfb, _ = dense_backward(cache["fnorm"], net.freq_embed, gfz)
    grads["freq_embed.weights"], grads["freq_embed.bias"] = gfw, gfb
    g = gflat.reshape(cache["pool_out"].shape)
    for i, conv in ((3, net.conv3), (2, net.conv2), (1, net.conv1)):
        g = pool_backward(cache[f"a{i}"], net.pool, g)
        g = relu_backward(cache[f"z{i}"], g)
        gw, gb, g = conv2d_backward(cache[f"in{i}"], conv, g, padding=(1, 1),
                                    col=cache[f"col{i}"], need_input_grad=(i > 1))
        grads[f"conv{i}.weights"], grads[f"conv{i}.bias"] = gw, gb
    return grads


def predict(net: CoilNet, image: np.ndarray, freq_hz: float) -> Prediction:
    """Denormalized prediction; positivity is guaranteed by the 10** inversion."""
    out = forward(net, image, freq_hz)
    l_h, q = net.norm.denormalize(out)
    return Prediction(inductance_h=l_h, quality=q)


class CheckpointError(ValueError):
    """Raised when a checkpoint file is malformed, truncated or corrupted."""


def save(net: CoilNet, path) -> None:
    """Write the checkpoint: magic, version, NormStats, tensors, CRC32."""
    payload = bytearray()
    payload += struct.pack("<6d", *net.norm.as_tuple())
    for arr in net.parameters().values():
        payload += struct.pack("<B", arr.ndim)
        payload += struct.pack(f"<{arr.ndim}I", *arr.shape)
        payload += arr.astype("<f8").tobytes()
    blob = CHECKPOINT_MAGIC + struct.pack("<H", CHECKPOINT_VERSION) + payload
    blob += struct.pack("<I", zlib.crc32(bytes(payload)))
    with open(path, "wb") as fh:
        fh.write(blob)


def load(path) -> CoilNet:
    """Read and verify a checkpoint written by save()."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: bad magic bytes, not a CoilNet checkpoint")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    payload, (crc,) = blob[6:-4], struct.unpack_from("<I", blob, len(blob) - 4)
    if zlib.crc32(payload) != crc:
        raise CheckpointError(f"{path}: CRC mismatch, file corrupted or truncated")
    off = 0
    stats = struct.unpack_from("<6d", payload, off)
    off += 48
    norm = NormStats(*stats)
    template = init(0)  # shapes only
    arrays: dict[str, np.ndarray] = {}
    for name, ref in template.parameters().items():
        try:
            (rank,) = struct.unpack_from("<B", payload, off)
            off += 1
            shape = struct.unpack_from(f"<{rank}I", payload, off)
            off += 4 * rank
            count = int(np.prod(shape))
            arr = np.frombuffer(payload, dtype="<f8", count=count, offset=off).copy()
            off += 8 * count
        except struct.error as exc:
            raise CheckpointError(f"{path}: truncated while reading {name}") from exc
        if shape != ref.shape:
            raise CheckpointError(f"{path}: tensor {name} has shape {shape}, "
                                  f"expected {ref.shape}")
        arrays[name] = arr.reshape(shape)
    if off != len(payload):
        raise CheckpointError(f"{path}: {len(payload) - off} trailing bytes in payload")
    return CoilNet(
        ConvKernel(arrays["conv1.weights"], arrays["conv1.bias"]),
        ConvKernel(arrays["conv2.weights"], arrays["conv2.bias"]),
        ConvKernel(arrays["conv3.weights"], arrays["conv3.bias"]),
        DenseLayer(arrays["freq_embed.weights"], arrays["freq_embed.bias"]),
        DenseLayer(arrays["fc1.weights"], arrays["fc1.bias"]),
        DenseLayer(arrays["fc2.weights"], arrays["fc2.bias"]),
        norm=norm,
    )
