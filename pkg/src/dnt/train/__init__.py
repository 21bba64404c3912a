"""Training loop, evaluation metrics and ablation presets."""

from .loop import EpochLog, ImageCache, evaluate, predict, train
from .metrics import MetricsReport, compute_metrics, confusion_matrix
from .schedule import TrainConfig, lr_schedule

__all__ = ["EpochLog", "ImageCache", "MetricsReport", "TrainConfig", "compute_metrics",
           "confusion_matrix", "evaluate", "lr_schedule", "predict", "train"]
