"""Independent oracles used by the test suite.

Everything here is computed by a different route than the package code:
explicit summation for the moving-average forms, dense joint-Gaussian
conditioning for the state-space model, and dense linear solves for the
smoothing spline.
"""
from __future__ import annotations

import numpy as np


def psi_reference(j: int) -> np.ndarray:
    """Haar coefficients over lags, built directly from the defining split."""
    half = 2 ** (j - 1)
    amp = 2.0 ** (-j / 2.0)
    return np.array([amp] * half + [-amp] * half)


def brute_force_component(j, t, w, xi, w_start=0, xi_start=0):
    """Literal summation of the time-varying MA at scale ``j`` and time ``t``."""
    psi = psi_reference(j)
    total = 0.0
    for lag in range(2 ** j):
        total += psi[lag] * w[t - lag - w_start] * xi[t - lag - xi_start]
    return total


def autocov_kernel(j: int, h: int) -> float:
    """Stationary autocovariance contribution ``sum_l psi[l] * psi[l+h]``."""
    psi = psi_reference(j)
    if h >= psi.shape[0]:
        return 0.0
    return float(np.dot(psi[: psi.shape[0] - h], psi[h:]))


def variance_stderr(x: np.ndarray) -> float:
    """Standard error of the sample variance of i.i.d. draws (no normality
    assumption): ``sqrt((m4 - m2**2) / n)``."""
    x = np.asarray(x, dtype=float)
    c = x - x.mean()
    m2 = np.mean(c ** 2)
    m4 = np.mean(c ** 4)
    return float(np.sqrt((m4 - m2 ** 2) / x.shape[0]))


def mean_stderr_dependent(z: np.ndarray, max_lag: int = 10) -> float:
    """Standard error of the mean of a short-memory series, summing sample
    autocovariances up to ``max_lag`` (Newey-West with flat weights)."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    c = z - z.mean()
    var = np.mean(c ** 2)
    for k in range(1, max_lag + 1):
        var += 2.0 * np.mean(c[:-k] * c[k:]) * (n - k) / n
    return float(np.sqrt(max(var, 0.0) / n))


def dense_kalman_oracle(model, y, horizon: int = 0) -> dict:
    """Exact filtered/smoothed moments, likelihood and forecasts via one dense
    joint-Gaussian conditioning (no recursions).

    The generative model: ``W_0 ~ N(prior_mean, prior_var)``,
    ``W_s = W_{s-1} + zeta_s`` with ``zeta ~ N(0, diag(state_noise))`` and
    ``y_s = a_s' W_s + nu_s`` with ``nu ~ N(0, obs_var)``.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0] - model.start_time
    obs = y[model.start_time:]
    dim = model.n_scales
    n_tot = n + horizon
    a = model.designs[:n_tot]
    q = np.diag(np.asarray(model.state_noise, dtype=float))
    p0 = np.asarray(model.prior_var, dtype=float)
    m0 = np.asarray(model.prior_mean, dtype=float)
    r = float(model.obs_var)

    # Joint covariance of all states: Cov(W_s, W_u) = P0 + min(s, u) * Q.
    cww = np.empty((n_tot, n_tot, dim, dim))
    for s in range(n_tot):
        for u in range(n_tot):
            cww[s, u] = p0 + min(s, u) * q
    # Observation covariance and state-observation cross covariance.
    cyy = np.empty((n, n))
    for s in range(n):
        for u in range(n):
            cyy[s, u] = a[s] @ cww[s, u] @ a[u]
        cyy[s, s] += r
    cwy = np.empty((n_tot, n, dim))
    for s in range(n_tot):
        for u in range(n):
            cwy[s, u] = cww[s, u] @ a[u]
    mu_y = a[:n] @ m0
    resid = obs - mu_y

    def condition(s, k):
        """Moments of W_s given y_0..y_{k-1}."""
        cov_yy = cyy[:k, :k]
        cross = cwy[s, :k].T  # (dim, k)
        sol = np.linalg.solve(cov_yy, resid[:k])
        mean = m0 + cross @ sol
        cov = cww[s, s] - cross @ np.linalg.solve(cov_yy, cross.T)
        return mean, cov

    filtered_means = np.empty((n, dim))
    filtered_covs = np.empty((n, dim, dim))
    smoothed_means = np.empty((n, dim))
    smoothed_covs = np.empty((n, dim, dim))
    for s in range(n):
        filtered_means[s], filtered_covs[s] = condition(s, s + 1)
        smoothed_means[s], smoothed_covs[s] = condition(s, n)

    sign, logdet = np.linalg.slogdet(cyy)
    loglik = -0.5 * (n * np.log(2.0 * np.pi) + logdet + resid @ np.linalg.solve(cyy, resid))

    forecasts = None
    if horizon > 0:
        forecasts = np.empty((horizon, 2))
        for h in range(1, horizon + 1):
            mean, cov = condition(n - 1 + h, n)
            forecasts[h - 1, 0] = a[n - 1 + h] @ mean
            forecasts[h - 1, 1] = a[n - 1 + h] @ cov @ a[n - 1 + h] + r
    return {
        "filtered_means": filtered_means,
        "filtered_covs": filtered_covs,
        "smoothed_means": smoothed_means,
        "smoothed_covs": smoothed_covs,
        "loglik": float(loglik),
        "forecasts": forecasts,
    }


def dense_spline_fit(y: np.ndarray, lam: float) -> np.ndarray:
    """Penalised least squares by dense assembly: solve ``(I + lam*K) f = y``
    with ``K = Q R^-1 Q'`` for unit-spaced knots."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 3 or lam == 0:
        return y.copy()
    m = n - 2
    rmat = np.zeros((m, m))
    for i in range(m):
        rmat[i, i] = 2.0 / 3.0
        if i + 1 < m:
            rmat[i, i + 1] = rmat[i + 1, i] = 1.0 / 6.0
    qmat = np.zeros((n, m))
    for i in range(m):
        qmat[i, i] = 1.0
        qmat[i + 1, i] = -2.0
        qmat[i + 2, i] = 1.0
    k = qmat @ np.linalg.solve(rmat, qmat.T)
    return np.linalg.solve(np.eye(n) + lam * k, y)
