"""Simulation designs: factor recursions, beta paths, dependent errors, alphas.

Two designs are provided: a one-factor model with a logistic beta path and a
three-factor variant. Both share the error generator, a cross-sectionally
correlated linear process with optional moving-average temporal dependence.
All processes run for 25 extra burn-in periods that are discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from .errors import ConfigError, DegenerateVarianceError
from .panel import FactorSeries, ReturnPanel

#: Discarded start-up periods for every simulated process.
BURN_IN = 25

#: Moving-average weights decay like exp(-2h) beyond lag 2; terms past this
#: lag are below double-precision resolution relative to unit-scale series.
_MA_LAG_CUTOFF = 60

EXAMPLES = ("one", "three_factor")
INNOVATIONS = ("gaussian", "t6")
DEPENDENCE_REGIMES = (0, 2, "full")


@dataclass(frozen=True)
class FactorParams:
    """AR(1)-GARCH(1,1) parameters, one entry per factor."""

    mu: tuple
    phi: tuple
    garch_a: tuple
    garch_b: tuple
    garch_c: tuple

    def __post_init__(self):
        lengths = {len(self.mu), len(self.phi), len(self.garch_a), len(self.garch_b), len(self.garch_c)}
        if len(lengths) != 1:
            raise ConfigError("factor parameter tuples must share one length")
        for a, b, c in zip(self.garch_a, self.garch_b, self.garch_c):
            if a <= 0.0:
                raise ConfigError(f"garch intercept must be positive, got {a}")
            if b + c >= 1.0:
                raise ConfigError(f"nonstationary garch: b + c = {b + c} >= 1")

    @property
    def d(self) -> int:
        return len(self.mu)


def factor_params(example: str) -> FactorParams:
    """Factor parameters for the named design."""
    if example == "one":
        return FactorParams(
            mu=(0.34,), phi=(0.05,), garch_a=(0.32,), garch_b=(0.67,), garch_c=(0.13,)
        )
    if example == "three_factor":
        return FactorParams(
            mu=(0.34, 0.04, 0.06),
            phi=(0.05, 0.07, 0.04),
            garch_a=(0.32, 0.33, 0.26),
            garch_b=(0.67, 0.51, 0.72),
            garch_c=(0.13, 0.03, 0.05),
        )
    raise ConfigError(f"unknown example {example!r}")


def gen_factors(params: FactorParams, T_total: int, rng: np.random.Generator) -> FactorSeries:
    """Simulate the AR(1)-GARCH(1,1) factors and drop the burn-in rows.

    The variance recursion is driven by its own standard normal shock stream,
    separate from the return shock. Initial state: f = mu, h at its
    stationary level, and one pre-sample variance shock.
    """
    if T_total <= BURN_IN:
        raise ConfigError(f"T_total must exceed the burn-in {BURN_IN}, got {T_total}")
    d = params.d
    mu = np.asarray(params.mu)
    phi = np.asarray(params.phi)
    a = np.asarray(params.garch_a)
    b = np.asarray(params.garch_b)
    c = np.asarray(params.garch_c)

    eps = rng.standard_normal((T_total, d))
    xi = rng.standard_normal((T_total, d))
    xi_prev = rng.standard_normal(d)

    f = np.empty((T_total, d))
    f_prev = mu.astype(float)
    h_prev = a / (1.0 - b - c)
    for t in range(T_total):
        h_t = a + b * h_prev + c * xi_prev**2
        f[t] = mu + phi * (f_prev - mu) + np.sqrt(h_t) * eps[t]
        f_prev, h_prev, xi_prev = f[t], h_t, xi[t]
    names = ("f1", "f2", "f3")[:d]
    return FactorSeries(values=f[BURN_IN:], names=names)


def logistic_path(u) -> np.ndarray:
    """Common time-variation curve 1 / (1 + exp(-2 (10 u - 2)))."""
    return 1.0 / (1.0 + np.exp(-2.0 * (10.0 * np.asarray(u, dtype=float) - 2.0)))


def beta_paths(example: str, T: int, N: int) -> np.ndarray:
    """Per-asset loading curves on the post-burn-in clock, shape (T, N, d).

    Both designs share the curves across assets, so the result is a
    broadcast (read-only) view.
    """
    u = np.arange(1, T + 1) / T
    z = logistic_path(u)
    if example == "one":
        curves = z[:, None]
    elif example == "three_factor":
        curves = np.column_stack([0.5 + 0.5 * z, 0.5 + 0.1 * z, 0.5 + 0.2 * z])
    else:
        raise ConfigError(f"unknown example {example!r}")
    return np.broadcast_to(curves[:, None, :], (T, N, curves.shape[1]))


@dataclass(frozen=True)
class ErrorParams:
    """Idiosyncratic error configuration.

    The cross-sectional covariance has unit diagonal and power-law
    off-diagonals phi2 / |i-j|^2 inside a band of width omega * N. Temporal
    dependence is a moving average of order ``ma_order`` whose lag-1 and
    lag-2 matrices share the banded shape scaled by phi1 / h, while lags
    h >= 3 use exp(-2h) times the identity.
    """

    N: int
    ma_order: int = 0
    innovation: str = "gaussian"
    omega: float = 0.9
    phi1: float = 0.6
    phi2: float = 0.4

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError(f"need N >= 1 assets, got {self.N}")
        if self.ma_order < 0:
            raise ConfigError(f"ma_order must be >= 0, got {self.ma_order}")
        if self.innovation not in INNOVATIONS:
            raise ConfigError(f"unknown innovation {self.innovation!r}")

    def sigma(self) -> np.ndarray:
        return _sigma_matrix(self.N, self.omega, self.phi2)

    def sigma_sqrt(self) -> np.ndarray:
        return _sigma_sqrt(self.N, self.omega, self.phi2)

    def ma_matrix(self, h: int) -> np.ndarray:
        """Moving-average coefficient matrix at lag h >= 1."""
        if h < 1:
            raise ConfigError("ma lag must be >= 1")
        if h <= 2:
            band = _sigma_matrix(self.N, self.omega, 1.0)  # unit-diag banded shape
            return (self.phi1 / h) * band
        return math.exp(-2.0 * h) * np.eye(self.N)


def _band_width(N: int, omega: float) -> int:
    return int(math.floor(omega * N))


def _sigma_matrix(N: int, omega: float, phi2: float) -> np.ndarray:
    col = np.zeros(N)
    col[0] = 1.0
    width = _band_width(N, omega)
    k = np.arange(1, N)
    inside = k <= width
    col[1:][inside] = phi2 / k[inside] ** 2
    return toeplitz(col)


@lru_cache(maxsize=8)
def _sigma_sqrt_cached(N: int, omega: float, phi2: float) -> np.ndarray:
    sigma = _sigma_matrix(N, omega, phi2)
    vals, vecs = np.linalg.eigh(sigma)
    if vals[0] < -1e-6:
        raise DegenerateVarianceError(
            f"cross-sectional covariance indefinite: min eigenvalue {vals[0]:.3e}"
        )
    vals = np.clip(vals, 0.0, None)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    root.flags.writeable = False
    return root


def _sigma_sqrt(N: int, omega: float, phi2: float) -> np.ndarray:
    return _sigma_sqrt_cached(N, omega, phi2)


def _innovations(rng: np.random.Generator, shape, kind: str) -> np.ndarray:
    """Unit-variance innovation draws: standard normal or standardized t(6)."""
    if kind == "gaussian":
        return rng.standard_normal(shape)
    num = rng.standard_normal(shape)
    chi = rng.chisquare(6, shape)
    return num / np.sqrt(chi / 6.0) / math.sqrt(1.5)


def gen_errors(params: ErrorParams, T_total: int, rng: np.random.Generator) -> np.ndarray:
    """Simulate the error process for T_total periods (burn-in kept).

    Main-sample innovations are drawn before the pre-sample ones, so the
    ma_order = 0 output coincides bitwise with any higher-order regime whose
    coefficient matrices are zero.
    """
    N = params.N
    S = params.sigma_sqrt()
    u_main = _innovations(rng, (T_total, N), params.innovation)
    z_main = u_main @ S  # S symmetric, so row-wise S u_t

    M = params.ma_order
    if M == 0:
        return z_main

    lag_cut = min(M, _MA_LAG_CUTOFF)
    u_pre = _innovations(rng, (lag_cut, N), params.innovation)
    z_pre = u_pre @ S
    z_ext = np.vstack([z_pre, z_main])  # rows: times 1-lag_cut .. T_total

    e = z_main.copy()
    dense = min(M, 2)
    lagged = np.zeros_like(z_main)
    for h in range(1, dense + 1):
        block = z_ext[lag_cut - h : lag_cut - h + T_total]
        lagged += block / h
    if dense:
        band = _sigma_matrix(N, params.omega, 1.0)
        e += params.phi1 * (lagged @ band)
    for h in range(3, lag_cut + 1):
        e += math.exp(-2.0 * h) * z_ext[lag_cut - h : lag_cut - h + T_total]
    return e


@dataclass(frozen=True)
class AlphaAlternative:
    """Sparse time-varying alternative: s active assets, scale constant c."""

    sparsity: int
    c_scale: float

    def __post_init__(self):
        if self.sparsity < 1:
            raise ConfigError(f"sparsity must be >= 1, got {self.sparsity}")
        if self.c_scale <= 0.0:
            raise ConfigError(f"scale constant must be positive, got {self.c_scale}")


def default_c_scale(dependence) -> float:
    """Signal scale constant keyed by the dependence regime."""
    table = {0: 12.0, 2: 80.0, "full": 90.0}
    try:
        return table[dependence]
    except KeyError:
        raise ConfigError(f"unknown dependence regime {dependence!r}") from None


def gen_alpha(alt: AlphaAlternative, T: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """Draw the sparse alpha matrix on the post-burn-in clock.

    Active assets share the baseline level sqrt(c log N / (s T)); each adds
    0.35 times that level times a cosine wave with random frequency in
    [pi/2, pi] and random phase, centered and scaled to unit sample variance
    over the grid so the time average stays exactly at the baseline.
    """
    s = alt.sparsity
    if s > N:
        raise ConfigError(f"sparsity {s} exceeds cross-section size {N}")
    support = rng.choice(N, size=s, replace=False)
    freq = rng.uniform(np.pi / 2.0, np.pi, size=s)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=s)

    level = math.sqrt(alt.c_scale * math.log(N) / (s * T))
    u = np.arange(1, T + 1) / T
    g = np.sqrt(2.0) * np.cos(np.outer(u, freq) + phase)
    g = g - g.mean(axis=0)
    g = g / g.std(axis=0)

    alpha = np.zeros((T, N))
    alpha[:, support] = level + 0.35 * level * g
    return alpha


@dataclass(frozen=True)
class ExperimentPlan:
    """One Monte Carlo cell: design, hypothesis, and replication budget."""

    example: str = "one"
    T: int = 200
    N: int = 250
    dependence: object = 0  # 0, 2, or "full" (meaning T - 1)
    innovation: str = "gaussian"
    alpha: AlphaAlternative | None = None
    replications: int = 500
    bootstrap_reps: int = 500
    seed: int = 0
    level: float = 0.05
    spline_order: int = 4
    basis_dim: int = 5
    bandwidth: int | None = None
    block_length: int | None = None

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise ConfigError(f"unknown example {self.example!r}")
        if self.innovation not in INNOVATIONS:
            raise ConfigError(f"unknown innovation {self.innovation!r}")
        if self.dependence not in DEPENDENCE_REGIMES:
            raise ConfigError(f"dependence must be one of {DEPENDENCE_REGIMES}")
        for name in ("T", "N", "replications", "bootstrap_reps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"level must be in (0, 1), got {self.level}")

    @property
    def ma_order(self) -> int:
        return self.T - 1 if self.dependence == "full" else int(self.dependence)

    def error_params(self) -> ErrorParams:
        return ErrorParams(N=self.N, ma_order=self.ma_order, innovation=self.innovation)

    def resolved_alpha(self) -> AlphaAlternative | None:
        """Alternative with the regime-default scale filled in."""
        if self.alpha is None:
            return None
        if self.alpha.c_scale > 0:
            return self.alpha
        return AlphaAlternative(self.alpha.sparsity, default_c_scale(self.dependence))

    def to_dict(self) -> dict:
        out = {
            "example": self.example,
            "T": self.T,
            "N": self.N,
            "dependence": self.dependence,
            "innovation": self.innovation,
            "replications": self.replications,
            "bootstrap_reps": self.bootstrap_reps,
            "seed": self.seed,
            "level": self.level,
            "spline_order": self.spline_order,
            "basis_dim": self.basis_dim,
            "bandwidth": self.bandwidth,
            "block_length": self.block_length,
        }
        if self.alpha is not None:
            out["alpha"] = {"sparsity": self.alpha.sparsity, "c_scale": self.alpha.c_scale}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentPlan":
        data = dict(data)
        alpha = data.pop("alpha", None)
        if alpha is not None:
            alpha = AlphaAlternative(
                sparsity=int(alpha["sparsity"]),
                c_scale=float(alpha.get("c_scale") or 0.0) or default_c_scale(data.get("dependence", 0)),
            )
        known = {f for f in cls.__dataclass_fields__ if f != "alpha"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown plan fields: {sorted(unknown)}")
        return cls(alpha=alpha, **data)


def simulate_panel(plan: ExperimentPlan, rng: np.random.Generator) -> tuple[ReturnPanel, FactorSeries]:
    """Compose factors, betas, errors, and alphas into one return panel.

    Draw order within the stream: factor shocks, error innovations, then
    alpha support/frequency/phase. The burn-in is discarded consistently, so
    alpha and beta paths run on the clock t = 1..T.
    """
    T, N = plan.T, plan.N
    T_total = T + BURN_IN
    factors = gen_factors(factor_params(plan.example), T_total, rng)
    errors = gen_errors(plan.error_params(), T_total, rng)[BURN_IN:]
    beta = beta_paths(plan.example, T, N)
    Y = np.einsum("tnd,td->tn", beta, factors.values) + errors
    alt = plan.resolved_alpha()
    if alt is not None:
        Y = Y + gen_alpha(alt, T, N, rng)
    return ReturnPanel(values=Y), factors
