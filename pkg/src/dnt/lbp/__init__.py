"""Texture branch: LBP code maps and concatenated multi-neighborhood histograms."""

from ._backend import DEFAULT as DEFAULT_BACKEND, available as available_backends
from .core import (BLOCK_WIDTH, DEFAULT_CONFIGS, LbpConfig, TextureDescriptor, batch_descriptors,
                   descriptor_width, histogram, lbp_code_map, sample_neighbor, sampling_geometry,
                   texture_descriptor, to_grayscale, uniform_bin_map)

__all__ = [
    "BLOCK_WIDTH", "DEFAULT_BACKEND", "DEFAULT_CONFIGS", "LbpConfig", "TextureDescriptor",
    "available_backends", "batch_descriptors", "descriptor_width", "histogram", "lbp_code_map",
    "sample_neighbor", "sampling_geometry", "texture_descriptor", "to_grayscale", "uniform_bin_map",
]
