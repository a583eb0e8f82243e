"""Coil L/Q identification from images with a multi-modal CNN."""

from .data import (DEFAULT_FREQS_HZ, DEFAULT_NUM_COILS, DatasetManifest,
                   Sample, generate_dataset, load_dataset, write_dataset)
from .estimator import CoilNetRegressor, samples_to_xy
from .metrics import EvalReport, evaluate, mse_metric, paper_error, relative_error
from .model import (CheckpointError, CoilNet, NormStats, Prediction, forward,
                    init, load, predict, save)
from .physics import CoilGeometry, oracle_inductance, oracle_quality, skin_depth
from .render import rasterize
from .training import (TrainConfig, TrainingDiverged, TrainReport, mse_loss,
                       split_by_coil, train)

__version__ = "0.1.0"

__all__ = [
    "CheckpointError", "CoilGeometry", "CoilNet", "CoilNetRegressor",
    "DatasetManifest", "DEFAULT_FREQS_HZ", "DEFAULT_NUM_COILS", "EvalReport",
    "NormStats", "Prediction", "Sample", "TrainConfig", "TrainingDiverged",
    "TrainReport", "evaluate", "forward", "generate_dataset", "init", "load",
    "load_dataset", "mse_loss", "mse_metric", "oracle_inductance",
    "oracle_quality", "paper_error", "predict", "rasterize", "relative_error",
    "samples_to_xy", "save", "skin_depth", "split_by_coil", "train",
    "write_dataset",
]
