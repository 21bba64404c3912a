"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``DNT_PURE_PYTHON=1`` to force the fallback at import time.
"""

import os

from . import _fallback

try:
    if os.environ.get("DNT_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("compiled kernels disabled by DNT_PURE_PYTHON")
    from . import _lbp_ext
except ImportError:
    _lbp_ext = None

BACKENDS = {"python": _fallback}
if _lbp_ext is not None:
    BACKENDS["compiled"] = _lbp_ext

DEFAULT = "compiled" if _lbp_ext is not None else "python"


def get(name=None):
    name = name or DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"LBP backend {name!r} not available; have {sorted(BACKENDS)}") from None


def available():
    return sorted(BACKENDS)
