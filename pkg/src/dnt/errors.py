"""Exception hierarchy shared across the package.

The CLI maps ``UsageError`` and ``ConfigError`` to exit code 2.
"""


class DntError(Exception):
    pass


class ConfigError(DntError, ValueError):
    """Inconsistent configuration: shapes, rates, unknown keys."""


class UsageError(DntError, ValueError):
    """Bad call-site input such as an empty sequence or out-of-range label."""


class EmptyInteriorError(UsageError):
    """Image too small to contain any LBP center pixel."""


class ImageFormatError(DntError):
    """File is readable but not a supported Netpbm/PNG raster."""


class ManifestError(DntError):
    pass


class ImageReadError(DntError, OSError):
    """Missing, empty or truncated image file."""
