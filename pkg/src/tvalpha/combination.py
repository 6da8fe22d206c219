"""Cauchy combination of p-values.

One shared implementation backs both the classical CC benchmark and the
dependence-robust DCC test so their numerics are identical.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .errors import DimensionError, DomainError

#: p-values are pushed this far away from {0, 1} before the tangent transform,
#: which diverges at both endpoints.
CLAMP_EPS = 1e-15


def combine(p_values, weights=None) -> tuple[float, float]:
    """Combine p-values through the tangent transform.

    Parameters
    ----------
    p_values : array_like
        p-values in [0, 1]; values at the endpoints are clamped inward by
        ``CLAMP_EPS``.
    weights : array_like, optional
        Positive weights summing to one. Defaults to equal weights.

    Returns
    -------
    statistic, p_value : float
        The weighted tangent statistic and its standard-Cauchy upper-tail
        p-value.
    """
    p = np.atleast_1d(np.asarray(p_values, dtype=float))
    if p.ndim != 1 or p.size == 0:
        raise DimensionError("p_values must be a nonempty 1-D collection")
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError(f"p-values outside [0, 1]: {p}")

    if weights is None:
        w = np.full(p.size, 1.0 / p.size)
    else:
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if w.shape != p.shape:
            raise DimensionError(
                f"weights length {w.size} does not match p-values length {p.size}"
            )
        if np.any(w <= 0.0):
            raise DomainError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {w.sum()!r}")

    p = np.clip(p, CLAMP_EPS, 1.0 - CLAMP_EPS)
    statistic = float(w @ np.tan(np.pi * (0.5 - p)))
    # 1 - G(x) for the standard Cauchy CDF G, evaluated with full tail accuracy
    p_value = float(stats.cauchy.sf(statistic))
    return statistic, p_value
