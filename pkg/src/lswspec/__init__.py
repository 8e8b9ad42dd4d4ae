"""Locally stationary wavelet time series: simulation, state-space
decomposition and simulation-based spectrum estimation."""
from __future__ import annotations

__version__ = "0.1.0"

from .decompose import (
    StateSpaceModel,
    TvmaCoeffs,
    assemble_model,
    build_design,
    eval_decomposed,
    eval_tvma,
    obs_noise_variance,
    tvma_coeffs,
)
from .errors import ConfigurationError, DataError, LswError, NumericalError
from .estimator import (
    EstimationConfig,
    ReplicateScores,
    ScaleEstimate,
    SpectrumEstimate,
    SpectrumEstimator,
    estimate_spectrum,
    log_returns,
    score_replicates,
)
from .kalman import (
    FilterOutput,
    FilterState,
    SmootherOutput,
    kf_run,
    msfe,
    predict,
    rts_smooth,
    sequential_bayes_factor,
)
from .simulate import (
    AmplitudeSpec,
    ConstantAmplitude,
    FunctionAmplitude,
    LswRealization,
    MaRealization,
    MaSegment,
    MaSegmentSpec,
    PathAmplitude,
    PiecewiseAmplitude,
    RandomWalkAmplitude,
    default_ma_segments,
    ews,
    simulate_concat_ma,
    simulate_lsw,
)
from .smoothing import gcv_lambda, spline_smooth
from .wavelet import DEFAULT_MAX_SCALE, haar_coeffs, support_length

__all__ = [
    "__version__",
    "AmplitudeSpec",
    "ConfigurationError",
    "ConstantAmplitude",
    "DataError",
    "DEFAULT_MAX_SCALE",
    "EstimationConfig",
    "FilterOutput",
    "FilterState",
    "FunctionAmplitude",
    "LswError",
    "LswRealization",
    "MaRealization",
    "MaSegment",
    "MaSegmentSpec",
    "NumericalError",
    "PathAmplitude",
    "PiecewiseAmplitude",
    "RandomWalkAmplitude",
    "ReplicateScores",
    "ScaleEstimate",
    "SmootherOutput",
    "SpectrumEstimate",
    "SpectrumEstimator",
    "StateSpaceModel",
    "TvmaCoeffs",
    "assemble_model",
    "build_design",
    "default_ma_segments",
    "estimate_spectrum",
    "eval_decomposed",
    "eval_tvma",
    "ews",
    "gcv_lambda",
    "haar_coeffs",
    "kf_run",
    "log_returns",
    "msfe",
    "obs_noise_variance",
    "predict",
    "rts_smooth",
    "score_replicates",
    "sequential_bayes_factor",
    "simulate_concat_ma",
    "simulate_lsw",
    "spline_smooth",
    "support_length",
    "tvma_coeffs",
]
