"""Non-decimated Haar wavelet coefficients, indexed by lag.

``haar_coeffs(j)[lag]`` is the multiplier applied to the innovation ``lag``
steps in the past, so scale ``j`` spans ``2**j`` consecutive time points
(``j = 1`` is the finest scale).
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

__all__ = ["DEFAULT_MAX_SCALE", "haar_coeffs", "support_length", "validate_scale"]

DEFAULT_MAX_SCALE = 6


def validate_scale(j: int, max_scale: int = DEFAULT_MAX_SCALE) -> int:
    """Check that ``j`` is an integer scale in ``1..max_scale`` and return it."""
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)):
        raise ConfigurationError(f"scale must be an integer, got {j!r}")
    if not 1 <= int(j) <= max_scale:
        raise ConfigurationError(f"scale must be in 1..{max_scale}, got {j}")
    return int(j)


def support_length(j: int, max_scale: int = DEFAULT_MAX_SCALE) -> int:
    """Number of non-zero coefficients at scale ``j`` (``2**j``)."""
    return 2 ** validate_scale(j, max_scale)


def haar_coeffs(j: int, max_scale: int = DEFAULT_MAX_SCALE) -> np.ndarray:
    """Haar coefficients at scale ``j`` as an array over lags ``0..2**j - 1``.

    The first half of the entries equals ``2**(-j/2)`` and the second half
    ``-2**(-j/2)``; they sum to zero and have unit sum of squares.
    """
    j = validate_scale(j, max_scale)
    half = 2 ** (j - 1)
    amp = 2.0 ** (-j / 2.0)
    out = np.full(2 * half, amp)
    out[half:] = -amp
    return out
