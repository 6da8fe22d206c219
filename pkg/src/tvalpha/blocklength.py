"""Automatic block-length selection.

Each residual series gets a flat-top spectral recommendation for the
circular bootstrap; the panel-level block length is 1.5 times the median
recommendation, floored at 2 and capped at floor(sqrt(T)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateVarianceError

#: Multiplier on the implied-hypothesis autocorrelation band.
_BAND_C = 2.0

#: Minimum series length for the per-series selector.
_MIN_T = 20


@dataclass(frozen=True)
class BlockLengthReport:
    """Outcome of the data-driven block-length rule."""

    per_series: np.ndarray
    selected: int
    cap: int
    floor: int
    skipped: int

    def as_dict(self) -> dict:
        return {
            "selected": self.selected,
            "cap": self.cap,
            "floor": self.floor,
            "skipped": self.skipped,
            "per_series": [float(b) for b in self.per_series],
        }


def _significance_run_length(T: int) -> int:
    """Number of consecutive in-band autocorrelations that ends the scan."""
    return max(5, math.ceil(math.sqrt(math.log10(T))))


def _flat_top(x: np.ndarray) -> np.ndarray:
    """Trapezoidal taper: 1 on [0, 1/2], linear to 0 on [1/2, 1], 0 beyond."""
    ax = np.abs(x)
    return np.clip(2.0 * (1.0 - ax), 0.0, 1.0)


def _autocovariances(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocovariances R(0..max_lag) of a demeaned copy, divisor T."""
    T = x.shape[0]
    xc = x - x.mean()
    out = np.empty(max_lag + 1)
    out[0] = xc @ xc / T
    for k in range(1, max_lag + 1):
        out[k] = xc[k:] @ xc[:-k] / T
    return out


def _b_circ_from_acov(acov: np.ndarray, T: int) -> float:
    """Circular-bootstrap recommendation from precomputed autocovariances."""
    K_T = _significance_run_length(T)
    m_max = math.ceil(math.sqrt(T)) + K_T
    band = _BAND_C * math.sqrt(math.log10(T) / T)
    rho = acov[1:] / acov[0]

    # smallest m whose next K_T autocorrelations all sit inside the band
    inside = np.abs(rho) < band
    m_hat = None
    for m in range(0, m_max + 1):
        window = inside[m : m + K_T]
        if window.size == K_T and window.all():
            m_hat = m
            break
    if m_hat is None:
        significant = np.flatnonzero(~inside[:m_max])
        m_hat = int(significant[-1]) + 1 if significant.size else m_max

    upper = math.ceil(math.sqrt(T)) + K_T
    if m_hat == 0:
        return 1.0
    window = min(2 * m_hat, acov.size - 1)
    k = np.arange(1, window + 1)
    lam = _flat_top(k / (2.0 * m_hat))
    # symmetric sums over |k| <= 2 m_hat; the k = 0 term has weight 1
    g_hat = 2.0 * float(lam * k @ acov[1 : window + 1])
    spec0 = acov[0] + 2.0 * float(lam @ acov[1 : window + 1])
    d_circ = 2.0 * spec0**2
    if d_circ <= 0.0:
        return 1.0
    b = (2.0 * g_hat**2 / d_circ) ** (1.0 / 3.0) * T ** (1.0 / 3.0)
    return float(min(max(b, 1.0), upper))


def pwsd_per_series(x: np.ndarray) -> float:
    """Flat-top spectral block-length recommendation for one series.

    Scans the sample autocorrelations against the band +-2 sqrt(log10(T)/T)
    to pick the lag cutoff, then forms flat-top lag-window estimates of the
    spectral quantities entering the circular-bootstrap rate formula.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    T = x.shape[0]
    if T < _MIN_T:
        raise ConfigError(f"block-length selection needs T >= {_MIN_T}, got T={T}")
    if np.var(x) == 0.0:
        raise DegenerateVarianceError("constant series has no block-length signal")
    K_T = _significance_run_length(T)
    m_max = math.ceil(math.sqrt(T)) + K_T
    max_lag = min(T - 1, 2 * m_max)
    return _b_circ_from_acov(_autocovariances(x, max_lag), T)


def select_block_length(E0: np.ndarray) -> BlockLengthReport:
    """Aggregate per-series recommendations into one bootstrap block length.

    Parameters
    ----------
    E0 : (T, N) ndarray
        Centered null residual matrix.

    Returns
    -------
    BlockLengthReport
        With selected = max(2, min(floor(sqrt(T)), ceil(1.5 * median))) using
        the lower median across the series that admitted a recommendation.
    """
    E0 = np.asarray(E0, dtype=float)
    if E0.ndim != 2 or E0.shape[1] < 1:
        raise ConfigError("residual matrix must be 2-D with at least one column")
    T, N = E0.shape
    if T < _MIN_T:
        raise ConfigError(f"block-length selection needs T >= {_MIN_T}, got T={T}")

    K_T = _significance_run_length(T)
    max_lag = min(T - 1, 2 * (math.ceil(math.sqrt(T)) + K_T))
    Ec = E0 - E0.mean(axis=0)
    acov = np.empty((max_lag + 1, N))
    acov[0] = (Ec * Ec).sum(axis=0) / T
    for k in range(1, max_lag + 1):
        acov[k] = (Ec[k:] * Ec[:-k]).sum(axis=0) / T

    per_series = []
    skipped = 0
    for i in range(N):
        if acov[0, i] == 0.0:
            skipped += 1
            continue
        per_series.append(_b_circ_from_acov(acov[:, i], T))
    if not per_series:
        raise DegenerateVarianceError(
            "every residual series is constant; cannot select a block length"
        )
    if skipped:
        warnings.warn(
            f"skipped {skipped} constant series in block-length selection",
            stacklevel=2,
        )

    b = np.sort(np.asarray(per_series))
    median = float(b[(b.size - 1) // 2])  # lower median for determinism
    cap = math.floor(math.sqrt(T))
    selected = max(2, min(cap, math.ceil(1.5 * median)))
    return BlockLengthReport(
        per_series=np.asarray(per_series),
        selected=selected,
        cap=cap,
        floor=2,
        skipped=skipped,
    )
