"""Evaluation metrics and the evaluation harness.

Squared-error metrics are computed in normalized (standardized log)
space so inductance (~1e-6 H) and quality factor (~1e2) contribute
comparably; relative errors are reported in raw space.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .data import Sample
from .model import CoilNet, Prediction, forward


@dataclass
class EvalReport:
    mse: float
    paper_error: float
    mean_rel_err_l: float
    mean_rel_err_q: float
    median_rel_err: float
    baseline_mse: float
    n_samples: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_table(self) -> str:
        rows = [
            ("samples", f"{self.n_samples}"),
            ("mse (normalized)", f"{self.mse:.6g}"),
            ("error metric (normalized)", f"{self.paper_error:.6g}"),
            ("baseline mse (mean predictor)", f"{self.baseline_mse:.6g}"),
            ("mean relative error L", f"{100 * self.mean_rel_err_l:.2f}%"),
            ("mean relative error Q", f"{100 * self.mean_rel_err_q:.2f}%"),
            ("median relative error", f"{100 * self.median_rel_err:.2f}%"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _check_pairs(preds, labels):
    if len(preds) == 0 or len(preds) != len(labels):
        raise ValueError(f"need equal nonzero lengths, got {len(preds)} "
                         f"predictions and {len(labels)} labels")


def mse_metric(preds, labels) -> float:
    """(1/n) * sum_i ||pred_i - label_i||^2 over the 2-component outputs."""
    _check_pairs(preds, labels)
    p = np.asarray(preds, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    return float(np.sum((p - y) ** 2) / len(preds))


def paper_error(preds, labels) -> float:
    """Mean per-sample half-sum squared error; identical to mse_metric/2."""
    _check_pairs(preds, labels)
    p = np.asarray(preds, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    return float(np.mean(0.5 * np.sum((p - y) ** 2, axis=1)))


def relative_error(pred: Prediction, sample: Sample) -> tuple[float, float]:
    """Raw-space (|L_hat - L*|/L*, |Q_hat - Q*|/Q*)."""
    if not (sample.l_label_h > 0.0 and sample.q_label > 0.0):
        raise ValueError(f"labels must be positive, got L={sample.l_label_h}, "
                         f"Q={sample.q_label}")
    return (abs(pred.inductance_h - sample.l_label_h) / sample.l_label_h,
            abs(pred.quality - sample.q_label) / sample.q_label)


def evaluate(net: CoilNet, test_set: list[Sample]) -> EvalReport:
    """Run the model over test_set and fill every report field.

    The baseline is the constant train-mean predictor, which is exactly
    zero in the model's normalized label space.
    """
    if not test_set:
        raise ValueError("test_set must be nonempty")
    outs, labels, rel_l, rel_q = [], [], [], []
    for s in test_set:
        out = forward(net, s.image, s.freq_hz)
        label = net.norm.normalize_labels(s.l_label_h, s.q_label)
        outs.append(out)
        labels.append(label)
        l_h, q = net.norm.denormalize(out)
        pred = Prediction(inductance_h=l_h, quality=q)
        rl, rq = relative_error(pred, s)
        rel_l.append(rl)
        rel_q.append(rq)
    zeros = [np.zeros(2) for _ in test_set]
    return EvalReport(
        mse=mse_metric(outs, labels),
        paper_error=paper_error(outs, labels),
        mean_rel_err_l=float(np.mean(rel_l)),
        mean_rel_err_q=float(np.mean(rel_q)),
        median_rel_err=float(np.median(rel_l + rel_q)),
        baseline_mse=mse_metric(zeros, labels),
        n_samples=len(test_set),
    )
