"""Pick the compiled core when it is importable, the numpy fallback otherwise.

Set ``KDEBOUNDS_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _fallback

GAUSSIAN, RQ, TSTUDENT, CONSTANT = (
    _fallback.GAUSSIAN, _fallback.RQ, _fallback.TSTUDENT, _fallback.CONSTANT,
)


def _load():
    if os.environ.get("KDEBOUNDS_PURE_PYTHON", "") not in ("", "0"):
        return _fallback, "python"
    try:
        from . import _ext
    except ImportError:
        return _fallback, "python"
    return _ext, "compiled"


_impl, BACKEND = _load()

sqdist_int = _impl.sqdist_int
min_sqdist_int = _impl.min_sqdist_int
distance_histogram = _impl.distance_histogram
kde_matvec = _impl.kde_matvec


def implementations() -> dict:
    """Both backends by name, for tests and benchmarks (compiled only if built)."""
    out = {"python": _fallback}
    try:
        from . import _ext
        out["compiled"] = _ext
    except ImportError:
        pass
    return out
