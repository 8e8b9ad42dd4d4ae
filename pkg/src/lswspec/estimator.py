"""Simulation-based estimation of the time-varying wavelet spectrum.

Because the model's design vectors depend on unobserved innovations, the
estimator simulates ``n_replicates`` innovation sets, runs the Kalman filter
and smoother under each, scores the replicates on the observed series (exact
log likelihood or negative forecast MSE on a trailing holdout) and keeps the
best one.  The spectrum at scale ``j`` and calendar time ``t`` is read off the
smoothed amplitude posterior, by default as the posterior mean of the squared
amplitude, and post-smoothed with a cubic smoothing spline per scale.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .decompose import assemble_model
from .errors import ConfigurationError, DataError
from .kalman import FilterOutput, kf_run, msfe, predict, rts_smooth, sequential_bayes_factor
from .smoothing import gcv_lambda, spline_smooth
from .wavelet import DEFAULT_MAX_SCALE

__all__ = [
    "EstimationConfig",
    "ScaleEstimate",
    "ReplicateScores",
    "SpectrumEstimate",
    "log_returns",
    "score_replicates",
    "estimate_spectrum",
    "SpectrumEstimator",
]

SCORE_RULES = ("loglik", "msfe")
SPECTRUM_FORMS = ("mean-of-square", "square-of-mean")
AGGREGATES = ("best", "weighted")
_PRIOR_SCALE = 1e6
_MIN_SCORED = 4


def log_returns(prices) -> np.ndarray:
    """Log returns ``log(p_t) - log(p_{t-1})`` of a positive price series."""
    prices = np.asarray(prices, dtype=float)
    if prices.ndim != 1 or prices.size < 2:
        raise ConfigurationError("need a 1-d series of at least two prices")
    if not np.all(np.isfinite(prices)):
        raise DataError("price series contains non-finite values")
    bad = np.flatnonzero(prices <= 0)
    if bad.size:
        raise DataError(
            f"price series must be strictly positive; first offence at index {bad[0]}"
        )
    return np.diff(np.log(prices))


@dataclass(frozen=True)
class EstimationConfig:
    """Tuning parameters for :func:`estimate_spectrum`.

    ``sigma2`` may be a scalar (shared across scales) or one value per scale;
    ``spline_lambda`` is a fixed penalty or ``"gcv"``; ``burn_in`` of ``None``
    defaults to ``2**n_scales`` likelihood increments excluded from scores.
    """

    n_scales: int = 2
    sigma2: float | Sequence[float] = 0.1
    n_replicates: int = 50
    seed: int = 0
    horizon: int = 0
    score_rule: str = "loglik"
    holdout_fraction: float = 0.2
    spline_lambda: float | str = "gcv"
    spectrum_form: str = "mean-of-square"
    aggregate: str = "best"
    keep_replicates: bool = False
    burn_in: int | None = None
    max_scale: int = DEFAULT_MAX_SCALE

    def __post_init__(self):
        if not isinstance(self.n_scales, (int, np.integer)) or isinstance(self.n_scales, bool):
            raise ConfigurationError(f"n_scales must be an integer, got {self.n_scales!r}")
        if not 1 <= self.n_scales <= self.max_scale:
            raise ConfigurationError(
                f"n_scales must be in 1..{self.max_scale}, got {self.n_scales}"
            )
        sig = self.sigma2
        if isinstance(sig, (int, float, np.floating, np.integer)):
            sig = (float(sig),) * self.n_scales
        else:
            sig = tuple(float(s) for s in sig)
        if len(sig) != self.n_scales:
            raise ConfigurationError(
                f"sigma2 has {len(sig)} entries for {self.n_scales} scales"
            )
        if any(not np.isfinite(s) or s < 0 for s in sig):
            raise ConfigurationError("sigma2 entries must be finite and non-negative")
        object.__setattr__(self, "sigma2", sig)
        if self.n_replicates < 1:
            raise ConfigurationError(
                f"n_replicates must be at least 1, got {self.n_replicates}"
            )
        if self.horizon < 0:
            raise ConfigurationError(f"horizon must be non-negative, got {self.horizon}")
        if self.score_rule not in SCORE_RULES:
            raise ConfigurationError(
                f"score_rule must be one of {SCORE_RULES}, got {self.score_rule!r}"
            )
        if not 0.0 < self.holdout_fraction <= 0.5:
            raise ConfigurationError(
                f"holdout_fraction must lie in (0, 0.5], got {self.holdout_fraction}"
            )
        if isinstance(self.spline_lambda, str):
            if self.spline_lambda != "gcv":
                raise ConfigurationError(
                    f"spline_lambda must be a number or 'gcv', got {self.spline_lambda!r}"
                )
        elif not np.isfinite(self.spline_lambda) or self.spline_lambda < 0:
            raise ConfigurationError(
                f"spline_lambda must be non-negative, got {self.spline_lambda}"
            )
        if self.spectrum_form not in SPECTRUM_FORMS:
            raise ConfigurationError(
                f"spectrum_form must be one of {SPECTRUM_FORMS}, got {self.spectrum_form!r}"
            )
        if self.aggregate not in AGGREGATES:
            raise ConfigurationError(
                f"aggregate must be one of {AGGREGATES}, got {self.aggregate!r}"
            )
        if self.burn_in is not None and self.burn_in < 0:
            raise ConfigurationError(f"burn_in must be non-negative, got {self.burn_in}")

    @property
    def start_time(self) -> int:
        return 2 ** self.n_scales

    def min_length(self) -> int:
        return self.start_time + 8

    def to_dict(self) -> dict:
        return {
            "n_scales": self.n_scales,
            "sigma2": list(self.sigma2),
            "n_replicates": self.n_replicates,
            "seed": self.seed,
            "horizon": self.horizon,
            "score_rule": self.score_rule,
            "holdout_fraction": self.holdout_fraction,
            "spline_lambda": self.spline_lambda,
            "spectrum_form": self.spectrum_form,
            "aggregate": self.aggregate,
            "keep_replicates": self.keep_replicates,
            "burn_in": self.burn_in,
            "max_scale": self.max_scale,
        }


@dataclass
class ScaleEstimate:
    """Estimated amplitude and spectrum trajectory at one scale.

    ``times[i]`` is the calendar index of ``w_mean[i]``: the state component
    for scale ``j`` at filter time ``t`` is the amplitude at ``t - 2**j + 1``.
    """

    scale: int
    times: np.ndarray
    w_mean: np.ndarray
    w_var: np.ndarray
    spectrum: np.ndarray
    spectrum_smoothed: np.ndarray
    spline_lambda: float


@dataclass
class ReplicateScores:
    """Replicate comparison table; ids are 1-based.

    ``bayes_factors[m]`` is the cumulative log Bayes factor of the selected
    replicate against replicate ``m + 1`` over the scored (post burn-in)
    likelihood increments.
    """

    rule: str
    burn_in: int
    loglik: np.ndarray
    msfe: np.ndarray
    scores: np.ndarray
    selected: int
    bayes_factors: np.ndarray


@dataclass
class SpectrumEstimate:
    """Result of one estimation run on one series."""

    config: EstimationConfig
    length: int
    start_time: int
    scales: list
    scores: ReplicateScores
    selected_filter: FilterOutput
    forecasts: np.ndarray | None = None
    replicate_spectra: np.ndarray | None = None

    def scale(self, j: int) -> ScaleEstimate:
        for est in self.scales:
            if est.scale == j:
                return est
        raise ConfigurationError(f"no estimate for scale {j}")


def _holdout_window(n_steps: int, burn_in: int, fraction: float) -> int:
    k = max(1, int(np.ceil(fraction * n_steps)))
    return min(k, n_steps - burn_in)


def score_replicates(
    outputs: Sequence[FilterOutput],
    rule: str = "loglik",
    holdout_fraction: float = 0.2,
    burn_in: int = 0,
) -> ReplicateScores:
    """Score and rank filter runs obtained under different innovation sets.

    All outputs must cover the same sample.  The log-likelihood score sums the
    increments after ``burn_in`` steps; the MSFE score is the negative mean
    squared one-step prediction error over the trailing holdout window.  Ties
    select the smallest replicate id.
    """
    if not outputs:
        raise ConfigurationError("no replicates to score")
    if rule not in SCORE_RULES:
        raise ConfigurationError(f"score_rule must be one of {SCORE_RULES}, got {rule!r}")
    n_steps = outputs[0].n_steps
    if any(fo.n_steps != n_steps for fo in outputs):
        raise ConfigurationError("replicates cover different samples")
    if not 0 <= burn_in < n_steps:
        raise ConfigurationError(
            f"burn_in must be in 0..{n_steps - 1}, got {burn_in}"
        )
    k = _holdout_window(n_steps, burn_in, holdout_fraction)
    logliks = np.array([fo.loglik_increments[burn_in:].sum() for fo in outputs])
    msfes = np.array(
        [msfe(fo.pred_y_mean[n_steps - k:], fo.observations[n_steps - k:]) for fo in outputs]
    )
    scores = logliks if rule == "loglik" else -msfes
    selected = int(np.argmax(scores)) + 1
    sel_inc = outputs[selected - 1].loglik_increments[burn_in:]
    bf = np.stack(
        [sequential_bayes_factor(sel_inc, fo.loglik_increments[burn_in:]) for fo in outputs]
    )
    return ReplicateScores(
        rule=rule,
        burn_in=burn_in,
        loglik=logliks,
        msfe=msfes,
        scores=scores,
        selected=selected,
        bayes_factors=bf,
    )


def _spectrum_from_moments(mean: np.ndarray, var: np.ndarray, form: str) -> np.ndarray:
    if form == "mean-of-square":
        return mean ** 2 + var
    return mean ** 2


def estimate_spectrum(y, config: EstimationConfig) -> SpectrumEstimate:
    """Estimate per-scale spectrum trajectories for the series ``y``.

    Deterministic for fixed ``(y, config)``: replicate innovation sets are
    drawn from independent streams spawned from ``config.seed``.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ConfigurationError(f"series must be 1-d, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DataError("series contains non-finite values")
    n_scales = config.n_scales
    start = config.start_time
    length = y.shape[0]
    if length < config.min_length():
        raise ConfigurationError(
            f"series of length {length} is too short for {n_scales} scales "
            f"(need at least {config.min_length()})"
        )
    n_steps = length - start
    burn = 2 ** n_scales if config.burn_in is None else config.burn_in
    burn = min(burn, max(n_steps - _MIN_SCORED, 0))

    kappa = _PRIOR_SCALE * float(max(np.var(y), 1e-12))
    prior_mean = np.zeros(n_scales)
    prior_var = np.eye(n_scales) * kappa

    xi_start = start - 2 ** n_scales + 1  # == 1
    n_xi = length + config.horizon - xi_start

    seeds = np.random.SeedSequence(config.seed).spawn(config.n_replicates)
    models = []
    outputs = []
    for seq in seeds:
        rng = np.random.default_rng(seq)
        xi = rng.standard_normal((n_scales, n_xi))
        model = assemble_model(
            n_scales,
            config.sigma2,
            xi,
            xi_start=xi_start,
            length=length,
            horizon=config.horizon,
            prior_mean=prior_mean,
            prior_var=prior_var,
            max_scale=config.max_scale,
        )
        models.append(model)
        outputs.append(kf_run(model, y))

    scores = score_replicates(
        outputs,
        rule=config.score_rule,
        holdout_fraction=config.holdout_fraction,
        burn_in=burn,
    )
    sel = scores.selected - 1

    need_all = config.aggregate == "weighted" or config.keep_replicates
    to_smooth = range(config.n_replicates) if need_all else [sel]
    smoothed = {m: rts_smooth(models[m], outputs[m]) for m in to_smooth}

    replicate_spectra = None
    if config.keep_replicates:
        replicate_spectra = np.stack(
            [
                np.stack(
                    [
                        _spectrum_from_moments(
                            smoothed[m].means[:, j], smoothed[m].covs[:, j, j],
                            config.spectrum_form,
                        )
                        for j in range(n_scales)
                    ]
                )
                for m in range(config.n_replicates)
            ]
        )

    if config.aggregate == "weighted":
        wgt = np.exp(scores.loglik - scores.loglik.max())
        wgt = wgt / wgt.sum()
        mean_stack = np.stack([smoothed[m].means for m in range(config.n_replicates)])
        var_stack = np.stack(
            [np.diagonal(smoothed[m].covs, axis1=1, axis2=2) for m in range(config.n_replicates)]
        )
        w_mean = np.einsum("m,mtj->tj", wgt, mean_stack)
        second = np.einsum("m,mtj->tj", wgt, var_stack + mean_stack ** 2)
        w_var = second - w_mean ** 2
    else:
        w_mean = smoothed[sel].means
        w_var = np.diagonal(smoothed[sel].covs, axis1=1, axis2=2)

    filter_times = np.arange(start, length)
    scale_estimates = []
    for j in range(1, n_scales + 1):
        mean_j = w_mean[:, j - 1]
        var_j = np.maximum(w_var[:, j - 1], 0.0)
        spectrum = _spectrum_from_moments(mean_j, var_j, config.spectrum_form)
        lam = config.spline_lambda
        if isinstance(lam, str):
            lam = gcv_lambda(spectrum)
        smoothed_spectrum = spline_smooth(spectrum, lam)
        scale_estimates.append(
            ScaleEstimate(
                scale=j,
                times=filter_times - (2 ** j - 1),
                w_mean=mean_j.copy(),
                w_var=var_j,
                spectrum=spectrum,
                spectrum_smoothed=smoothed_spectrum,
                spline_lambda=float(lam),
            )
        )

    forecasts = None
    if config.horizon > 0:
        forecasts = predict(models[sel], outputs[sel], config.horizon)

    return SpectrumEstimate(
        config=config,
        length=length,
        start_time=start,
        scales=scale_estimates,
        scores=scores,
        selected_filter=outputs[sel],
        forecasts=forecasts,
        replicate_spectra=replicate_spectra,
    )


class SpectrumEstimator(BaseEstimator):
    """Scikit-learn style interface around :func:`estimate_spectrum`.

    ``fit`` accepts a 1-d series or a 2-d array of columns; columns are
    estimated independently with identical settings (and seed), so fitting a
    panel is exactly equivalent to fitting each column alone.  ``transform``
    returns per-time smoothed spectrum features, one column per (series,
    scale) pair, restricted to the calendar range shared by all scales.
    """

    def __init__(
        self,
        n_scales: int = 2,
        sigma2: float | Sequence[float] = 0.1,
        n_replicates: int = 50,
        seed: int = 0,
        horizon: int = 0,
        score_rule: str = "loglik",
        holdout_fraction: float = 0.2,
        spline_lambda: float | str = "gcv",
        spectrum_form: str = "mean-of-square",
        aggregate: str = "best",
    ):
        self.n_scales = n_scales
        self.sigma2 = sigma2
        self.n_replicates = n_replicates
        self.seed = seed
        self.horizon = horizon
        self.score_rule = score_rule
        self.holdout_fraction = holdout_fraction
        self.spline_lambda = spline_lambda
        self.spectrum_form = spectrum_form
        self.aggregate = aggregate

    def _config(self) -> EstimationConfig:
        return EstimationConfig(
            n_scales=self.n_scales,
            sigma2=self.sigma2,
            n_replicates=self.n_replicates,
            seed=self.seed,
            horizon=self.horizon,
            score_rule=self.score_rule,
            holdout_fraction=self.holdout_fraction,
            spline_lambda=self.spline_lambda,
            spectrum_form=self.spectrum_form,
            aggregate=self.aggregate,
        )

    @staticmethod
    def _columns(X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[1] == 0:
            raise ConfigurationError(
                f"expected a series or a 2-d array of series, got shape {X.shape}"
            )
        return X

    def fit(self, X, y=None):
        X = self._columns(X)
        cfg = self._config()
        self.series_ = X
        self.results_ = [estimate_spectrum(X[:, c], cfg) for c in range(X.shape[1])]
        self.result_ = self.results_[0]
        return self

    def _features(self, results: list) -> np.ndarray:
        cfg = results[0].config
        start = cfg.start_time
        length = results[0].length
        lo = start - 1
        hi = length - 2 ** cfg.n_scales
        n_common = hi - lo + 1
        cols = []
        for res in results:
            for est in res.scales:
                offset = lo - int(est.times[0])
                cols.append(est.spectrum_smoothed[offset:offset + n_common])
        return np.column_stack(cols)

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "results_"):
            raise NotFittedError("SpectrumEstimator must be fitted before transform")
        X = self._columns(X)
        if X.shape == self.series_.shape and np.array_equal(X, self.series_):
            results = self.results_
        else:
            cfg = self._config()
            results = [estimate_spectrum(X[:, c], cfg) for c in range(X.shape[1])]
        return self._features(results)

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).transform(X)
