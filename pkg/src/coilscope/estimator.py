"""scikit-learn style wrapper around the coil network.

X is a 2-D array with one row per sample: the 4096 flattened pixels of a
64x64 grayscale image (values in [0,1]) followed by the operating
frequency in Hz. y has two columns: inductance in henries and quality
factor. This keeps the model usable inside sklearn pipelines and model
selection utilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import model as _model
from .data import Sample
from .training import TrainConfig, train

N_PIXELS = 64 * 64


def samples_to_xy(samples: list[Sample]) -> tuple[np.ndarray, np.ndarray]:
    """Flatten Samples into the (X, y) layout the estimator consumes."""
    x = np.stack([np.concatenate([s.image.reshape(-1), [s.freq_hz]])
                  for s in samples])
    y = np.array([[s.l_label_h, s.q_label] for s in samples])
    return x, y


class CoilNetRegressor(BaseEstimator, RegressorMixin):
    """Image + frequency -> (L, Q) regressor with plain-SGD training."""

    def __init__(self, learning_rate: float = 1e-3, epochs: int = 200,
                 batch_size: int = 4, seed: int = 0, shuffle: bool = True):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.shuffle = shuffle

    def _validate(self, x, y=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != N_PIXELS + 1:
            raise ValueError(f"X must be (n_samples, {N_PIXELS + 1}): 4096 pixels "
                             f"plus frequency, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("X contains non-finite values")
        if y is not None:
            y = np.asarray(y, dtype=np.float64)
            if y.shape != (x.shape[0], 2):
                raise ValueError(f"y must be (n_samples, 2) = [L, Q], "
                                 f"got shape {y.shape}")
            if np.any(y <= 0.0):
                raise ValueError("labels must be strictly positive")
        return x, y

    def _rows_to_samples(self, x, y=None) -> list[Sample]:
        samples = []
        for i in range(x.shape[0]):
            img = x[i, :N_PIXELS].reshape(1, 64, 64)
            l_h, q = (y[i] if y is not None else (1.0, 1.0))
            samples.append(Sample(image=img, freq_hz=float(x[i, -1]),
                                  l_label_h=float(l_h), q_label=float(q),
                                  coil_id=f"row{i}"))
        return samples

    def fit(self, X, y):
        x, y = self._validate(X, y)
        cfg = TrainConfig(learning_rate=self.learning_rate, epochs=self.epochs,
                          batch_size=self.batch_size, seed=self.seed,
                          shuffle=self.shuffle)
        net = _model.init(self.seed)
        net, report = train(net, self._rows_to_samples(x, y), None, cfg)
        self.net_ = net
        self.report_ = report
        self.n_features_in_ = x.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "net_")
        x, _ = self._validate(X)
        out = np.empty((x.shape[0], 2))
        for i, s in enumerate(self._rows_to_samples(x)):
            pred = _model.predict(self.net_, s.image, s.freq_hz)
            out[i] = (pred.inductance_h, pred.quality)
        return out
