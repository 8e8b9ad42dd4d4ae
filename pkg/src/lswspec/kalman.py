"""Kalman filtering, smoothing and forecast scoring for the amplitude model.

The model has an identity state transition with diagonal noise, a scalar
observation with a time-varying design row, and a Gaussian prior on the state
at ``start_time``.  The filter accumulates the exact log likelihood through
the prediction-error decomposition; the smoother is the fixed-interval
backward recursion.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decompose import StateSpaceModel
from .errors import ConfigurationError, NumericalError

__all__ = [
    "FilterState",
    "FilterOutput",
    "SmootherOutput",
    "kf_run",
    "rts_smooth",
    "predict",
    "sequential_bayes_factor",
    "msfe",
]


@dataclass(frozen=True)
class FilterState:
    """Posterior of the state at one time step after seeing ``y_t``."""

    t: int
    mean: np.ndarray
    cov: np.ndarray
    loglik_increment: float


@dataclass
class FilterOutput:
    """Arrays of filtered quantities for ``t = start_time .. start_time + n - 1``.

    ``pred_means``/``pred_covs`` hold the one-step-ahead state distribution,
    ``pred_y_mean``/``pred_y_var`` the implied predictive distribution of the
    observation, and ``observations`` echoes the filtered segment of ``y``.
    """

    start_time: int
    means: np.ndarray
    covs: np.ndarray
    pred_means: np.ndarray
    pred_covs: np.ndarray
    pred_y_mean: np.ndarray
    pred_y_var: np.ndarray
    loglik_increments: np.ndarray
    total_loglik: float
    observations: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.means.shape[0]

    def state(self, t: int) -> FilterState:
        i = t - self.start_time
        if i < 0 or i >= self.n_steps:
            raise ConfigurationError(f"no filtered state for time {t}")
        return FilterState(
            t=t,
            mean=self.means[i],
            cov=self.covs[i],
            loglik_increment=float(self.loglik_increments[i]),
        )


@dataclass
class SmootherOutput:
    """Full-sample posterior means and covariances of the state."""

    start_time: int
    means: np.ndarray
    covs: np.ndarray


def _symmetrize(p: np.ndarray) -> np.ndarray:
    return (p + p.T) / 2.0


def kf_run(model: StateSpaceModel, y: np.ndarray) -> FilterOutput:
    """Run the filter over ``y[model.start_time:]``.

    ``y`` is the full calendar series; observations before ``start_time`` are
    skipped because the lagged-amplitude state is only defined once a full
    wavelet support of innovations is available.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ConfigurationError(f"series must be one-dimensional, got shape {y.shape}")
    n = y.shape[0] - model.start_time
    if n < 1:
        raise ConfigurationError(
            f"series of length {y.shape[0]} has no observations at or after "
            f"start time {model.start_time}"
        )
    if model.designs.shape[0] < n:
        raise ConfigurationError(
            f"model has {model.designs.shape[0]} design rows for {n} observations"
        )
    dim = model.n_scales
    q = np.diag(np.asarray(model.state_noise, dtype=float))
    r = float(model.obs_var)
    means = np.empty((n, dim))
    covs = np.empty((n, dim, dim))
    pred_means = np.empty((n, dim))
    pred_covs = np.empty((n, dim, dim))
    pred_y_mean = np.empty(n)
    pred_y_var = np.empty(n)
    incs = np.empty(n)
    eye = np.eye(dim)

    mean = np.asarray(model.prior_mean, dtype=float).copy()
    cov = _symmetrize(np.asarray(model.prior_var, dtype=float).copy())
    for i in range(n):
        if i > 0:
            cov = cov + q
        pred_means[i] = mean
        pred_covs[i] = cov
        a = model.designs[i]
        obs = y[model.start_time + i]
        f = float(a @ mean)
        qt = float(a @ cov @ a) + r
        if not np.isfinite(qt) or qt <= 0.0:
            raise NumericalError(
                f"innovation variance {qt} is not positive at t={model.start_time + i}"
            )
        pred_y_mean[i] = f
        pred_y_var[i] = qt
        err = obs - f
        gain = (cov @ a) / qt
        mean = mean + gain * err
        ika = eye - np.outer(gain, a)
        cov = _symmetrize(ika @ cov @ ika.T + r * np.outer(gain, gain))
        means[i] = mean
        covs[i] = cov
        incs[i] = -0.5 * (np.log(2.0 * np.pi * qt) + err * err / qt)
    return FilterOutput(
        start_time=model.start_time,
        means=means,
        covs=covs,
        pred_means=pred_means,
        pred_covs=pred_covs,
        pred_y_mean=pred_y_mean,
        pred_y_var=pred_y_var,
        loglik_increments=incs,
        total_loglik=float(incs.sum()),
        observations=y[model.start_time:model.start_time + n].copy(),
    )


def rts_smooth(model: StateSpaceModel, fo: FilterOutput) -> SmootherOutput:
    """Backward fixed-interval smoother over the filtered sample."""
    n = fo.n_steps
    means = fo.means.copy()
    covs = fo.covs.copy()
    for i in range(n - 2, -1, -1):
        pred_cov = fo.pred_covs[i + 1]
        gain = fo.covs[i] @ np.linalg.inv(pred_cov)
        means[i] = fo.means[i] + gain @ (means[i + 1] - fo.pred_means[i + 1])
        covs[i] = _symmetrize(
            fo.covs[i] + gain @ (covs[i + 1] - pred_cov) @ gain.T
        )
    return SmootherOutput(start_time=fo.start_time, means=means, covs=covs)


def predict(model: StateSpaceModel, fo: FilterOutput, horizon: int) -> np.ndarray:
    """Out-of-sample predictive mean and variance of the observation.

    Returns an array of shape ``(horizon, 2)`` with rows ``(mean, var)`` for
    ``h = 1..horizon``; the model must carry design rows past the filtered
    sample (innovations simulated beyond the data).
    """
    if horizon < 1:
        raise ConfigurationError(f"horizon must be at least 1, got {horizon}")
    n = fo.n_steps
    if model.designs.shape[0] < n + horizon:
        raise ConfigurationError(
            f"model has {model.designs.shape[0] - n} design rows past the sample, "
            f"horizon {horizon} requested"
        )
    q = np.diag(np.asarray(model.state_noise, dtype=float))
    r = float(model.obs_var)
    mean = fo.means[-1]
    cov = fo.covs[-1]
    out = np.empty((horizon, 2))
    for h in range(1, horizon + 1):
        cov = cov + q
        a = model.designs[n + h - 1]
        out[h - 1, 0] = a @ mean
        out[h - 1, 1] = a @ cov @ a + r
    return out


def sequential_bayes_factor(loglik_a: np.ndarray, loglik_b: np.ndarray) -> np.ndarray:
    """Cumulative log Bayes factor of model A over model B from aligned
    per-observation log-likelihood increments."""
    loglik_a = np.asarray(loglik_a, dtype=float)
    loglik_b = np.asarray(loglik_b, dtype=float)
    if loglik_a.shape != loglik_b.shape or loglik_a.ndim != 1:
        raise ConfigurationError(
            f"likelihood streams must be aligned 1-d arrays, "
            f"got shapes {loglik_a.shape} and {loglik_b.shape}"
        )
    if loglik_a.size == 0:
        raise ConfigurationError("likelihood streams are empty")
    return np.cumsum(loglik_a - loglik_b)


def msfe(pred_means: np.ndarray, actuals: np.ndarray) -> float:
    """Mean squared one-step forecast error."""
    pred_means = np.asarray(pred_means, dtype=float)
    actuals = np.asarray(actuals, dtype=float)
    if pred_means.shape != actuals.shape or pred_means.ndim != 1:
        raise ConfigurationError(
            f"predictions and actuals must be aligned 1-d arrays, "
            f"got shapes {pred_means.shape} and {actuals.shape}"
        )
    if pred_means.size == 0:
        raise ConfigurationError("cannot score an empty forecast window")
    return float(np.mean((pred_means - actuals) ** 2))
