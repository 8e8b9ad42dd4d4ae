"""Simulation of locally stationary wavelet processes and benchmark series.

A process is a superposition over scales of time-varying moving averages:
``y_t = sum_j x_jt`` with ``x_jt = sum_l psi_j[l] * w_{j,t-l} * xi_{j,t-l}``,
where ``psi_j`` are the Haar coefficients, ``w_jt`` per-scale amplitude paths
and ``xi_jt`` i.i.d. standard normal innovations.  Extra innovations are drawn
at negative time indices so every ``x_jt`` is fully defined from ``t = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DataError
from .wavelet import DEFAULT_MAX_SCALE, haar_coeffs, validate_scale

__all__ = [
    "ConstantAmplitude",
    "PiecewiseAmplitude",
    "PathAmplitude",
    "FunctionAmplitude",
    "RandomWalkAmplitude",
    "AmplitudeSpec",
    "LswRealization",
    "MaSegment",
    "MaSegmentSpec",
    "MaRealization",
    "simulate_lsw",
    "simulate_concat_ma",
    "default_ma_segments",
    "ews",
]


def _check_finite(name: str, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.size and not np.all(np.isfinite(values)):
        raise DataError(f"{name} contains non-finite values")
    return values


@dataclass(frozen=True)
class ConstantAmplitude:
    """Amplitude held at ``value`` for all times."""

    value: float

    def level(self, z: float) -> float:
        return float(self.value)

    def path(self, length: int, n_pre: int, rng, sigma2: float) -> np.ndarray:
        _check_finite("amplitude value", np.array([self.value]))
        return np.full(n_pre + length, float(self.value))

    def to_dict(self) -> dict:
        return {"type": "constant", "value": float(self.value)}


@dataclass(frozen=True)
class PiecewiseAmplitude:
    """Piecewise-constant amplitude on rescaled time ``z = k / length``.

    ``values[i]`` applies on ``[breakpoints[i-1], breakpoints[i])`` with the
    final segment closed at ``z = 1``.
    """

    values: tuple
    breakpoints: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        brk = tuple(float(b) for b in self.breakpoints)
        if len(vals) != len(brk) + 1:
            raise ConfigurationError(
                "piecewise amplitude needs exactly one more value than breakpoints"
            )
        if any(not 0.0 < b < 1.0 for b in brk) or list(brk) != sorted(set(brk)):
            raise ConfigurationError(
                "piecewise breakpoints must be strictly increasing inside (0, 1)"
            )
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "breakpoints", brk)

    def level(self, z: float) -> float:
        idx = int(np.searchsorted(np.asarray(self.breakpoints), z, side="right"))
        return float(self.values[idx])

    def path(self, length: int, n_pre: int, rng, sigma2: float) -> np.ndarray:
        _check_finite("amplitude values", np.asarray(self.values))
        z = np.arange(length) / length
        idx = np.searchsorted(np.asarray(self.breakpoints), z, side="right")
        core = np.asarray(self.values, dtype=float)[idx]
        return np.concatenate([np.full(n_pre, core[0] if length else self.values[0]), core])

    def to_dict(self) -> dict:
        return {
            "type": "piecewise",
            "values": [float(v) for v in self.values],
            "breakpoints": [float(b) for b in self.breakpoints],
        }


@dataclass(frozen=True)
class PathAmplitude:
    """Amplitude given as an explicit path; must match the simulated length."""

    values: np.ndarray

    def level(self, z: float) -> float:
        values = np.asarray(self.values, dtype=float)
        idx = min(int(z * len(values)), len(values) - 1)
        return float(values[idx])

    def path(self, length: int, n_pre: int, rng, sigma2: float) -> np.ndarray:
        values = _check_finite("amplitude path", self.values)
        if values.ndim != 1 or len(values) != length:
            raise ConfigurationError(
                f"amplitude path has length {values.size}, expected {length}"
            )
        return np.concatenate([np.full(n_pre, values[0]), values])

    def to_dict(self) -> dict:
        return {"type": "path", "values": [float(v) for v in np.asarray(self.values)]}


@dataclass(frozen=True)
class FunctionAmplitude:
    """Amplitude sampled from a function of rescaled time, ``w_k = fn(k / length)``."""

    fn: Callable[[float], float]

    def level(self, z: float) -> float:
        return float(self.fn(z))

    def path(self, length: int, n_pre: int, rng, sigma2: float) -> np.ndarray:
        core = np.array([self.fn(k / length) for k in range(length)], dtype=float)
        _check_finite("amplitude function values", core)
        head = core[0] if length else float(self.fn(0.0))
        return np.concatenate([np.full(n_pre, head), core])

    def to_dict(self) -> dict:
        raise ConfigurationError("function amplitudes cannot be serialised to a config")


@dataclass(frozen=True)
class RandomWalkAmplitude:
    """Gaussian random-walk amplitude started at ``start``; step variance is the
    scale's ``sigma2`` entry.  Pre-sample values are held at ``start``."""

    start: float = 0.0

    def level(self, z: float) -> float:
        raise ConfigurationError(
            "random-walk amplitudes have no deterministic spectrum; "
            "evaluate the realised path instead"
        )

    def path(self, length: int, n_pre: int, rng, sigma2: float) -> np.ndarray:
        steps = rng.normal(0.0, np.sqrt(sigma2), size=max(length - 1, 0))
        core = float(self.start) + np.concatenate([[0.0], np.cumsum(steps)])
        return np.concatenate([np.full(n_pre, float(self.start)), core[:length]])

    def to_dict(self) -> dict:
        return {"type": "random-walk", "start": float(self.start)}


AmplitudeSource = (
    ConstantAmplitude
    | PiecewiseAmplitude
    | PathAmplitude
    | FunctionAmplitude
    | RandomWalkAmplitude
)


@dataclass(frozen=True)
class AmplitudeSpec:
    """Per-scale amplitude description for a simulated process.

    ``amplitudes[j-1]`` is the source for scale ``j`` and ``sigma2[j-1]`` the
    evolution variance used by random-walk sources.
    """

    amplitudes: tuple
    sigma2: tuple = ()
    max_scale: int = DEFAULT_MAX_SCALE

    def __post_init__(self):
        amps = tuple(self.amplitudes)
        if not amps:
            raise ConfigurationError("amplitude spec needs at least one scale")
        if len(amps) > self.max_scale:
            raise ConfigurationError(
                f"amplitude spec has {len(amps)} scales, limit is {self.max_scale}"
            )
        sig = self.sigma2
        if isinstance(sig, (int, float)):
            sig = (float(sig),) * len(amps)
        else:
            sig = tuple(float(s) for s in sig)
            if not sig:
                sig = (0.0,) * len(amps)
        if len(sig) != len(amps):
            raise ConfigurationError(
                f"sigma2 has {len(sig)} entries for {len(amps)} scales"
            )
        if any(s < 0 for s in sig):
            raise ConfigurationError("sigma2 entries must be non-negative")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "sigma2", sig)

    @property
    def n_scales(self) -> int:
        return len(self.amplitudes)

    def to_dict(self) -> dict:
        return {
            "scales": self.n_scales,
            "sigma2": [float(s) for s in self.sigma2],
            "amplitudes": [a.to_dict() for a in self.amplitudes],
        }


def ews(spec: AmplitudeSpec, j: int, z: float) -> float:
    """Evolutionary wavelet spectrum ``S_j(z) = W_j(z)**2`` at rescaled time ``z``."""
    j = validate_scale(j, spec.max_scale)
    if j > spec.n_scales:
        raise ConfigurationError(
            f"scale {j} not present in spec with {spec.n_scales} scales"
        )
    if not 0.0 <= z <= 1.0:
        raise ConfigurationError(f"rescaled time must lie in [0, 1], got {z}")
    level = spec.amplitudes[j - 1].level(float(z))
    return float(level) ** 2


@dataclass
class LswRealization:
    """A simulated process plus everything needed to re-evaluate it.

    ``xi`` and ``w`` rows cover times ``-n_pre .. length-1`` (column ``i`` is
    time ``i - n_pre``); ``x`` and ``y`` cover ``0 .. length-1``.
    """

    y: np.ndarray
    x: np.ndarray
    w: np.ndarray
    xi: np.ndarray
    n_pre: int
    seed: int
    spec: AmplitudeSpec

    @property
    def n_scales(self) -> int:
        return self.x.shape[0]

    @property
    def length(self) -> int:
        return self.y.shape[0]

    def spectrum_path(self, j: int) -> np.ndarray:
        """Realised spectrum ``w_jt**2`` for ``t = 0..length-1``."""
        j = validate_scale(j, self.n_scales)
        return self.w[j - 1, self.n_pre:] ** 2


def simulate_lsw(spec: AmplitudeSpec, length: int, seed: int = 0) -> LswRealization:
    """Draw one realisation of the process described by ``spec``.

    Innovations are drawn for times ``-(2**J - 1) .. length-1`` so the moving
    average at every scale is complete from the first output sample.
    """
    if length < 1:
        raise ConfigurationError(f"length must be positive, got {length}")
    n_scales = spec.n_scales
    n_pre = 2 ** n_scales - 1
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((n_scales, n_pre + length))
    w = np.empty_like(xi)
    for j in range(1, n_scales + 1):
        w[j - 1] = spec.amplitudes[j - 1].path(length, n_pre, rng, spec.sigma2[j - 1])
    _check_finite("amplitude paths", w)
    x = np.empty((n_scales, length))
    for j in range(1, n_scales + 1):
        psi = haar_coeffs(j, spec.max_scale)
        full = np.convolve(w[j - 1] * xi[j - 1], psi)
        x[j - 1] = full[n_pre:n_pre + length]
    y = x.sum(axis=0)
    return LswRealization(y=y, x=x, w=w, xi=xi, n_pre=n_pre, seed=seed, spec=spec)


@dataclass(frozen=True)
class MaSegment:
    """One stationary moving-average regime: ``x_t = sum_i coeffs[i] * eps_{t-i}``."""

    coeffs: tuple
    variance: float
    length: int

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ConfigurationError("MA segment needs at least one coefficient")
        if self.variance < 0:
            raise ConfigurationError("MA innovation variance must be non-negative")
        if self.length < 1:
            raise ConfigurationError("MA segment length must be positive")
        object.__setattr__(self, "coeffs", coeffs)

    def stationary_variance(self) -> float:
        return float(self.variance * sum(c * c for c in self.coeffs))

    def to_dict(self) -> dict:
        return {
            "coeffs": list(self.coeffs),
            "variance": float(self.variance),
            "length": int(self.length),
        }


@dataclass(frozen=True)
class MaSegmentSpec:
    """Concatenation of independent MA regimes."""

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ConfigurationError("segment spec needs at least one segment")
        object.__setattr__(self, "segments", segs)

    @property
    def length(self) -> int:
        return sum(s.length for s in self.segments)

    def to_dict(self) -> dict:
        return {"segments": [s.to_dict() for s in self.segments]}


@dataclass
class MaRealization:
    y: np.ndarray
    segment_ids: np.ndarray
    seed: int
    spec: MaSegmentSpec


def simulate_concat_ma(spec: MaSegmentSpec, seed: int = 0) -> MaRealization:
    """Simulate abruptly changing second-order structure by concatenating
    independent MA segments; innovations are drawn fresh for each segment."""
    rng = np.random.default_rng(seed)
    pieces = []
    ids = []
    for seg_id, seg in enumerate(spec.segments):
        order = len(seg.coeffs) - 1
        eps = rng.normal(0.0, np.sqrt(seg.variance), size=seg.length + order)
        x = np.convolve(eps, np.asarray(seg.coeffs))[order:order + seg.length]
        pieces.append(x)
        ids.append(np.full(seg.length, seg_id))
    return MaRealization(
        y=np.concatenate(pieces),
        segment_ids=np.concatenate(ids),
        seed=seed,
        spec=spec,
    )


def default_ma_segments() -> MaSegmentSpec:
    """An illustrative four-regime benchmark with visibly different
    second-order structure in each quarter (128 observations per regime)."""
    return MaSegmentSpec(
        segments=(
            MaSegment(coeffs=(1.0, 0.8), variance=1.0, length=128),
            MaSegment(coeffs=(1.0, -0.7, 0.2), variance=0.25, length=128),
            MaSegment(coeffs=(1.0,), variance=4.0, length=128),
            MaSegment(coeffs=(1.0, 0.9, 0.7, 0.3), variance=1.0, length=128),
        )
    )
