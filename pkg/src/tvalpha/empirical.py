"""Panel ingestion and the full empirical testing pipeline.

Reads local CSV files (wide returns, factor series), aligns them by ISO
week, builds excess returns, drops incomplete assets, and runs the six
tests plus per-asset Box-Pierce white-noise diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from .blocklength import select_block_length
from .classical import cc_indep, max_test_indep, sum_test_indep
from .dependent import BootstrapPlan, LrvConfig, default_bandwidth, dependent_battery
from .errors import ConfigError, DimensionError, DomainError
from .panel import FactorSeries, ReturnPanel
from .sieve import fit_sieve
from .splines import SplineConfig, build_basis, build_design

FACTOR_COLUMNS = ("MKT", "SMB", "HML")
RATE_COLUMN = "RF"

FORMAT_VERSION = 1


@dataclass(frozen=True)
class PanelSource:
    """Local CSV inputs for the empirical pipeline.

    ``returns_csv``: wide file, first column dates, one column per asset.
    ``factors_csv``: file with date, MKT, SMB, HML, RF columns (any casing).
    ``percent_units``: divide factor and rate columns by 100 on load.
    """

    returns_csv: str
    factors_csv: str
    date_format: str | None = None
    percent_units: bool = False


def _parse_dates(raw: pd.Series, date_format: str | None, path: str) -> pd.Series:
    parsed = pd.to_datetime(raw, format=date_format, errors="coerce")
    bad = parsed.isna() & raw.notna()
    if bad.any():
        line = int(np.flatnonzero(bad.to_numpy())[0]) + 2  # header is line 1
        raise ConfigError(f"{path}: unparseable date {raw[bad].iloc[0]!r} at line {line}")
    return parsed


def _week_key(dates: pd.Series) -> pd.Index:
    iso = dates.dt.isocalendar()
    return pd.Index(iso.year.astype(int) * 100 + iso.week.astype(int))


def ingest_and_balance(src: PanelSource) -> tuple[ReturnPanel, FactorSeries]:
    """Join returns and factors by ISO week and keep complete assets only.

    Excess returns are computed as returns minus the risk-free rate. Assets
    with any missing value over the overlapping weeks are dropped; column
    order follows the input file.
    """
    returns = pd.read_csv(src.returns_csv)
    factors = pd.read_csv(src.factors_csv)
    if returns.shape[1] < 2:
        raise ConfigError(f"{src.returns_csv}: need a date column plus asset columns")

    ret_dates = _parse_dates(returns.iloc[:, 0], src.date_format, src.returns_csv)
    fac_dates = _parse_dates(factors.iloc[:, 0], src.date_format, src.factors_csv)

    fmap = {c.upper(): c for c in factors.columns[1:]}
    missing = [c for c in (*FACTOR_COLUMNS, RATE_COLUMN) if c not in fmap]
    if missing:
        raise ConfigError(f"{src.factors_csv}: missing factor columns {missing}")

    returns = returns.set_index(_week_key(ret_dates)).iloc[:, 1:]
    factors = factors.set_index(_week_key(fac_dates))
    for frame, path in ((returns, src.returns_csv), (factors, src.factors_csv)):
        if frame.index.duplicated().any():
            week = frame.index[frame.index.duplicated()][0]
            raise ConfigError(f"{path}: duplicate ISO week {week}")

    common = returns.index.intersection(factors.index)
    if common.empty:
        raise DimensionError("no overlapping weeks between returns and factors")
    common = common.sort_values()

    scale = 0.01 if src.percent_units else 1.0
    fac = factors.loc[common, [fmap[c] for c in FACTOR_COLUMNS]].astype(float) * scale
    rf = factors.loc[common, fmap[RATE_COLUMN]].astype(float) * scale
    ret = returns.loc[common].astype(float)

    excess = ret.sub(rf, axis=0)
    keep = excess.notna().all(axis=0)
    excess = excess.loc[:, keep]
    if excess.shape[1] == 0:
        raise DimensionError("no asset has complete returns over the overlap")

    panel = ReturnPanel(
        values=excess.to_numpy(),
        assets=tuple(excess.columns),
        periods=tuple(int(w) for w in common),
    )
    series = FactorSeries(values=fac.to_numpy(), names=FACTOR_COLUMNS)
    return panel, series


def box_pierce(x: np.ndarray, lag: int = 10) -> float:
    """Box-Pierce white-noise p-value: T sum of squared autocorrelations.

    The statistic is referred to a chi-square with ``lag`` degrees of
    freedom.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    T = x.shape[0]
    if lag < 1:
        raise DomainError(f"lag must be >= 1, got {lag}")
    if lag >= T:
        raise DomainError(f"lag {lag} must be below the series length {T}")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise DomainError("constant series has no autocorrelations")
    rho = np.array([float(xc[k:] @ xc[:-k]) / denom for k in range(1, lag + 1)])
    q = T * float(rho @ rho)
    return float(stats.chi2.sf(q, lag))


def run_empirical(
    src: PanelSource,
    spline: SplineConfig | None = None,
    block_length: int | None = None,
    bandwidth: int | None = None,
    bootstrap_reps: int = 500,
    seed: int = 0,
    bp_lag: int = 10,
    calibration: str = "adjusted",
    tests: tuple = ("SUM", "MAX", "CC", "DSUM", "DMAX", "DCC"),
) -> dict:
    """Full pipeline: ingest, fit, diagnose, and run the requested tests.

    Returns a JSON-ready report; per-asset Box-Pierce p-values are included
    under ``box_pierce.p_values`` keyed by asset.
    """
    panel, factors = ingest_and_balance(src)
    spline = spline or SplineConfig()
    basis = build_basis(panel.T, spline)
    fit = fit_sieve(panel, build_design(basis, factors))

    centered = fit.residuals - fit.residuals.mean(axis=0)
    if block_length is not None:
        ell, ell_source = int(block_length), "override"
    else:
        ell, ell_source = select_block_length(centered).selected, "data-driven"
    M = int(bandwidth) if bandwidth is not None else default_bandwidth(panel.T)

    outcomes = {}
    need_dep = {"DSUM", "DMAX", "DCC"} & set(tests)
    need_cls = {"SUM", "MAX", "CC"} & set(tests)
    if need_cls:
        s = sum_test_indep(fit)
        mx = max_test_indep(fit)
        cc = cc_indep(s.p_value, mx.p_value)
        for o in (s, mx, cc):
            if o.name in tests:
                outcomes[o.name] = o
    if need_dep:
        plan = BootstrapPlan(block_length=ell, replications=bootstrap_reps, seed=seed)
        ds, dm, dc = dependent_battery(fit, LrvConfig(bandwidth=M), plan, calibration)
        for o in (ds, dm, dc):
            if o.name in tests:
                outcomes[o.name] = o

    bp = {
        asset: box_pierce(fit.residuals[:, i], bp_lag)
        for i, asset in enumerate(panel.assets or range(panel.N))
    }
    bp_values = np.array(list(bp.values()))

    return {
        "format_version": FORMAT_VERSION,
        "T": panel.T,
        "N": panel.N,
        "block_length": ell,
        "block_length_source": ell_source,
        "bandwidth": M,
        "bootstrap_reps": bootstrap_reps,
        "seed": seed,
        "calibration": calibration,
        "tests": {
            name: {
                "statistic": out.statistic,
                "p_value": out.p_value,
                "calibration": out.calibration,
                "diagnostics": {k: _jsonable(v) for k, v in out.diagnostics.items()},
            }
            for name, out in sorted(outcomes.items())
        },
        "box_pierce": {
            "lag": bp_lag,
            "share_reject_5pct": float((bp_values < 0.05).mean()),
            "mean": float(bp_values.mean()),
            "median": float(np.median(bp_values)),
            "p_values": {k: float(v) for k, v in bp.items()},
        },
    }


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v
