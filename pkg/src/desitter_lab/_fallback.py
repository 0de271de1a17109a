"""Pure numpy versions of the compiled kernels (same signatures and results)."""

from __future__ import annotations

import numpy as np


def blade_products(a: np.ndarray, b: np.ndarray, signs: np.ndarray, target: np.ndarray) -> np.ndarray:
    m = a.shape[1]
    # pair contributions, then scatter-add into the target blade
    pair = a[:, :, None] * b[:, None, :] * signs[None, :, :]
    out = np.zeros_like(a)
    np.add.at(out, (slice(None), target.reshape(-1)), pair.reshape(a.shape[0], m * m))
    return out


def christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    lowered = dg.transpose(0, 2, 1, 3) + dg.transpose(0, 2, 3, 1) - dg
    # lowered[n, s, m, v] = d_m g_sv + d_v g_sm - d_s g_mv
    return 0.5 * np.einsum("nrs,nsmv->nrmv", ginv, lowered)


def geodesic_accel(gamma: np.ndarray, u: np.ndarray) -> np.ndarray:
    return -np.einsum("nrmv,nm,nv->nr", gamma, u, u)
