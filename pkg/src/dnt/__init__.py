"""DNT: deep patch-sequence features fused with multi-scale LBP textures."""

__version__ = "0.1.0"
