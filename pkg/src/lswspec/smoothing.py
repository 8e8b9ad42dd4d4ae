"""Natural cubic smoothing splines on an equally spaced grid.

The smoother minimises ``sum_i (y_i - f(i))**2 + lam * integral f''(u)**2 du``
over natural cubic splines with knots at ``0..n-1``, i.e. ``f = (I + lam*K)^-1 y``
with the usual penalty matrix ``K = Q R^-1 Q'`` built from second differences.
The fit is computed through a single eigendecomposition of ``K`` (cached per
series length), which also makes the generalised cross-validation trace and
residuals cheap along a whole grid of penalties.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import solveh_banded

from .errors import ConfigurationError, DataError

__all__ = ["spline_smooth", "gcv_lambda", "GCV_GRID_SIZE"]

GCV_GRID_SIZE = 25
_GCV_SPAN = 1e4


@lru_cache(maxsize=8)
def _penalty_eigen(n: int):
    """Eigenvalues and eigenvectors of the penalty matrix for ``n`` knots.

    ``K`` is positive semi-definite with a two-dimensional null space (the
    straight lines), so smoothing leaves linear trends untouched and the
    large-penalty limit is the least-squares line.
    """
    m = n - 2
    # R (tridiagonal) and Q (second differences) for unit knot spacing.
    q = np.zeros((n, m))
    idx = np.arange(m)
    q[idx, idx] = 1.0
    q[idx + 1, idx] = -2.0
    q[idx + 2, idx] = 1.0
    if m == 1:
        rinv_qt = q.T * 1.5
    else:
        r_banded = np.zeros((2, m))
        r_banded[0, 1:] = 1.0 / 6.0
        r_banded[1, :] = 2.0 / 3.0
        rinv_qt = solveh_banded(r_banded, q.T)
    k = q @ rinv_qt
    eigvals, eigvecs = np.linalg.eigh((k + k.T) / 2.0)
    # K has rank n - 2 by construction; pin its null space (the straight
    # lines) to exactly zero so they pass through the smoother untouched at
    # any penalty and the large-penalty limit is the least-squares line.
    eigvals = np.clip(eigvals, 0.0, None)
    eigvals[:2] = 0.0
    eigvals.setflags(write=False)
    eigvecs.setflags(write=False)
    return eigvals, eigvecs


def _check_series(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ConfigurationError(f"expected a 1-d series, got shape {values.shape}")
    if values.size == 0:
        raise ConfigurationError("cannot smooth an empty series")
    if not np.all(np.isfinite(values)):
        raise DataError("series to smooth contains non-finite values")
    return values


def reference_lambda(n: int) -> float:
    """Penalty at which the identity and roughness terms have equal trace;
    used to centre the cross-validation grid on the data scale."""
    if n < 3:
        return 1.0
    eigvals, _ = _penalty_eigen(n)
    return float(n / eigvals.sum())


def gcv_lambda(values, grid_size: int = GCV_GRID_SIZE) -> float:
    """Pick the penalty minimising generalised cross-validation.

    The grid has ``grid_size`` log-spaced points spanning ``1e-4..1e4`` times
    the data-scaled reference penalty; ties resolve to the smallest penalty.
    """
    values = _check_series(values)
    n = values.shape[0]
    if n < 4:
        raise ConfigurationError(
            f"cross-validated smoothing needs at least 4 points, got {n}"
        )
    eigvals, eigvecs = _penalty_eigen(n)
    z = eigvecs.T @ values
    ref = reference_lambda(n)
    grid = np.geomspace(ref / _GCV_SPAN, ref * _GCV_SPAN, grid_size)
    best_lam = grid[0]
    best_score = np.inf
    for lam in grid:
        shrink = lam * eigvals / (1.0 + lam * eigvals)
        rss = float(np.sum((shrink * z) ** 2))
        df = float(np.sum(1.0 / (1.0 + lam * eigvals)))
        score = n * rss / (n - df) ** 2
        if score < best_score:
            best_score = score
            best_lam = lam
    return float(best_lam)


def spline_smooth(values, lam: float | str = "gcv") -> np.ndarray:
    """Smooth ``values`` with penalty ``lam`` (or ``"gcv"`` to select it).

    ``lam = 0`` reproduces the input; growing ``lam`` interpolates towards the
    least-squares straight line.
    """
    values = _check_series(values)
    n = values.shape[0]
    if isinstance(lam, str):
        if lam != "gcv":
            raise ConfigurationError(f"lambda must be a number or 'gcv', got {lam!r}")
        lam_value = gcv_lambda(values)
    else:
        lam_value = float(lam)
        if not np.isfinite(lam_value) or lam_value < 0:
            raise ConfigurationError(f"lambda must be non-negative, got {lam}")
    if n < 3 or lam_value == 0.0:
        return values.copy()
    eigvals, eigvecs = _penalty_eigen(n)
    z = eigvecs.T @ values
    return eigvecs @ (z / (1.0 + lam_value * eigvals))
