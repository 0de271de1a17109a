"""Kernel backend selection.

The compiled extension is used when it imports; setting
``DESITTER_LAB_PURE=1`` forces the numpy fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("DESITTER_LAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"


def blade_products(a, b, signs, target):
    return _impl.blade_products(
        np.ascontiguousarray(a, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
        np.ascontiguousarray(signs, dtype=np.float64),
        np.ascontiguousarray(target, dtype=np.int64),
    )


def christoffel(ginv, dg):
    return _impl.christoffel(
        np.ascontiguousarray(ginv, dtype=np.float64),
        np.ascontiguousarray(dg, dtype=np.float64),
    )


def geodesic_accel(gamma, u):
    return _impl.geodesic_accel(
        np.ascontiguousarray(gamma, dtype=np.float64),
        np.ascontiguousarray(u, dtype=np.float64),
    )


def backends():
    """Both implementations keyed by name (compiled only when available)."""
    out = {"python": _fallback}
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        return out
    out["compiled"] = _compiled
    return out
