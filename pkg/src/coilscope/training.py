"""Epoch loop: shuffled mini-batch plain gradient descent on the MSE loss.

The update is exactly theta <- theta - lr * grad(batch-mean loss); no
momentum, weight decay or schedule. Loss is the half-sum of squared
errors over the two normalized outputs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .data import Sample
from .model import CoilNet, NormStats, backward, forward_cached


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the epoch index and last finite loss."""

    def __init__(self, epoch: int, last_finite_loss: float):
        super().__init__(f"loss became non-finite at epoch {epoch}; "
                         f"last finite loss was {last_finite_loss}")
        self.epoch = epoch
        self.last_finite_loss = last_finite_loss


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 180
    batch_size: int = 4
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if not self.learning_rate >= 0.0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError(f"epochs and batch_size must be >= 1, got "
                             f"{self.epochs}, {self.batch_size}")


@dataclass
class TrainReport:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] | None = None
    seconds: list[float] = field(default_factory=list)
    norm: NormStats | None = None

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch,train_loss,val_loss,seconds\n")
            for i, loss in enumerate(self.train_loss):
                val = "" if self.val_loss is None else repr(self.val_loss[i])
                fh.write(f"{i + 1},{loss!r},{val},{self.seconds[i]!r}\n")


def mse_loss(pred: np.ndarray, label: np.ndarray) -> tuple[float, np.ndarray]:
    """Half-sum squared error over the 2 outputs; gradient is pred - label."""
    pred = np.asarray(pred, dtype=np.float64)
    label = np.asarray(label, dtype=np.float64)
    if pred.shape != (2,) or label.shape != (2,):
        raise ValueError(f"pred and label must be length-2, got shapes "
                         f"{pred.shape}, {label.shape}")
    diff = pred - label
    return 0.5 * float(diff @ diff), diff


def fit_norm_stats(train_set: list[Sample]) -> NormStats:
    """Standardization statistics of log10 labels/frequency over the training split."""
    log_l = np.log10([s.l_label_h for s in train_set])
    log_q = np.log10([s.q_label for s in train_set])
    log_f = np.log10([s.freq_hz for s in train_set])

    def _std(v):
        s = float(np.std(v))
        return s if s > 0.0 else 1.0  # degenerate constant column

    return NormStats(mean_log_l=float(np.mean(log_l)), std_log_l=_std(log_l),
                     mean_log_q=float(np.mean(log_q)), std_log_q=_std(log_q),
                     mean_log_f=float(np.mean(log_f)), std_log_f=_std(log_f))


def _mean_loss(net: CoilNet, samples: list[Sample]) -> float:
    total = 0.0
    for s in samples:
        out = forward_cached(net, s.image, s.freq_hz)["out"]
        label = net.norm.normalize_labels(s.l_label_h, s.q_label)
        loss, _ = mse_loss(out, label)
        total += loss
    return total / len(samples)


def train(net: CoilNet, train_set: list[Sample], val_set: list[Sample] | None,
          cfg: TrainConfig) -> tuple[CoilNet, TrainReport]:
    """Train in place; returns the same net and a per-epoch report.

    NormStats are fitted from train_set only. Fully deterministic given
    cfg.seed.
    """
    if not train_set:
        raise ValueError("train_set must be nonempty")
    net.norm = fit_norm_stats(train_set)
    labels = [net.norm.normalize_labels(s.l_label_h, s.q_label) for s in train_set]
    params = net.parameters()
    rng = np.random.default_rng(cfg.seed)
    report = TrainReport(val_loss=[] if val_set else None, norm=net.norm)
    last_finite = math.nan
    n = len(train_set)
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        epoch_total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            grad_sum: dict[str, np.ndarray] | None = None
            for idx in batch:
                s = train_set[idx]
                cache = forward_cached(net, s.image, s.freq_hz)
                loss, gout = mse_loss(cache["out"], labels[idx])
                epoch_total += loss
                grads = backward(net, cache, gout)
                if grad_sum is None:
                    grad_sum = grads
                else:
                    for name, g in grads.items():
                        grad_sum[name] += g
            scale = cfg.learning_rate / len(batch)
            for name, g in grad_sum.items():
                params[name] -= scale * g
        epoch_loss = epoch_total / n
        if not math.isfinite(epoch_loss):
            raise TrainingDiverged(epoch + 1, last_finite)
        last_finite = epoch_loss
        report.train_loss.append(epoch_loss)
        if val_set:
            vloss = _mean_loss(net, val_set)
            if not math.isfinite(vloss):
                raise TrainingDiverged(epoch + 1, last_finite)
            report.val_loss.append(vloss)
        report.seconds.append(time.perf_counter() - t0)
    return net, report


def split_by_coil(dataset: list[Sample], train_coils: int,
                  seed: int) -> tuple[list[Sample], list[Sample]]:
    """Partition by coil identity so no coil appears in both splits."""
    coil_ids = sorted({s.coil_id for s in dataset})
    if train_coils >= len(coil_ids):
        raise ValueError(f"train_coils={train_coils} but only "
                         f"{len(coil_ids)} distinct coils")
    if train_coils < 1:
        raise ValueError(f"train_coils must be >= 1, got {train_coils}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(coil_ids))
    train_ids = {coil_ids[i] for i in order[:train_coils]}
    train = [s for s in dataset if s.coil_id in train_ids]
    test = [s for s in dataset if s.coil_id not in train_ids]
    return train, test
