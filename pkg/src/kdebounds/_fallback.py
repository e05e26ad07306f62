"""Pure numpy versions of the hot loops in ``_ext.pyx``.

Signatures and results match the compiled module exactly; the selector in
``_backend`` picks one of the two at import time.
"""
from __future__ import annotations

import numpy as np

GAUSSIAN, RQ, TSTUDENT, CONSTANT = 0, 1, 2, 3


def sqdist_int(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """All pairwise squared distances between integer point sets, as int64."""
    X = np.ascontiguousarray(X, dtype=np.int64)
    Y = np.ascontiguousarray(Y, dtype=np.int64)
    diff = X[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def min_sqdist_int(X: np.ndarray, Y: np.ndarray) -> int:
    return int(sqdist_int(X, Y).min())


def distance_histogram(X: np.ndarray, Y: np.ndarray, dmax: int) -> np.ndarray:
    """``H[d, i] = #{j : |x_i - y_j|^2 = d}`` for ``d = 0..dmax``.

    Raises ValueError if some distance exceeds ``dmax``.
    """
    d = sqdist_int(X, Y)
    if d.size and d.max() > dmax:
        raise ValueError(f"squared distance {int(d.max())} exceeds cap {dmax}")
    n = d.shape[0]
    out = np.zeros((dmax + 1, n), dtype=np.int64)
    for i in range(n):
        out[:, i] = np.bincount(d[i], minlength=dmax + 1)
    return out


def _profile(x: np.ndarray, family: int, scale: float, param: float) -> np.ndarray:
    if family == GAUSSIAN:
        return np.exp(-scale * x)
    if family == RQ:
        return (1.0 + scale * x) ** (-param)
    if family == TSTUDENT:
        return 1.0 / (1.0 + (scale * x) ** param)
    if family == CONSTANT:
        return np.ones_like(x)
    raise ValueError(f"unknown kernel family code {family}")


def kde_matvec(X: np.ndarray, Y: np.ndarray, u: np.ndarray, family: int,
               scale: float, param: float) -> np.ndarray:
    """``v[i] = sum_j f(|x_i - y_j|^2) u[j]`` in float64."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.float64)
    for i in range(X.shape[0]):
        diff = Y - X[i]
        d = np.einsum("jk,jk->j", diff, diff)
        out[i] = _profile(d, family, scale, param) @ u
    return out
