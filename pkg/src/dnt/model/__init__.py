"""Two-stream DNT model: backbone, patch encoder, LBP fusion, classifier, checkpoints."""

from .checkpoint import CheckpointError, load, save
from .config import ModelConfig, PatchGrid
from .network import DntModel, forward, param_count, partition_patches, patch_features

__all__ = ["CheckpointError", "DntModel", "ModelConfig", "PatchGrid", "forward", "load",
           "param_count", "partition_patches", "patch_features", "save"]
