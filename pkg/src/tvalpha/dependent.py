"""Dependence-robust tests: DSUM, DMAX, and their Cauchy combination.

The null centering and scaling come from a circular moving block bootstrap
of the centered projected score process; the max statistic is normalized by
a Bartlett long-run variance per coordinate. One resampling engine backs
both statistics so a shared pool of draws calibrates the combined test.

Calibration modes
-----------------
The raw bootstrap moments ("plain") estimate a block-tapered, demeaned, and
annihilator-filtered version of the statistic's null moments. Each of those
three filters shrinks the target when serial dependence is strong; at
simulation-scale designs the joint shrinkage is first order and the plain
calibration over-rejects. The default "adjusted" mode repairs this with a
lag-trace model of the filters:

* the statistic's exact mean is ``sum_j w_j g_j`` with observable weights
  ``w_j`` built from eta autocorrelations (the annihilator drops out of the
  statistic's mean because M_Z eta = eta, but not out of the bootstrap's);
* the measured score autocovariance traces satisfy ``E ghat = A g`` with a
  computable matrix ``A`` capturing the annihilator filter and demeaning,
  so the true lag traces ``g`` come from solving the small linear system;
* the bootstrap sum-statistic mean is rescaled by the implied ratio and the
  spread comes from a split-sample estimate of tr(Omega^2) that averages
  out covariance-estimation noise;
* the max statistic switches to its extreme-value calibration, whose size
  tracks the nominal level at these designs, while the bootstrap max stays
  available as the plain construction.

The repair factors converge to one under the rate conditions that make the
plain bootstrap valid, so the adjustment vanishes asymptotically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .classical import gumbel_sf, max_centering
from .combination import combine
from .errors import ConfigError, DegenerateVarianceError
from .outcome import TestOutcome
from .sieve import SieveFit, ScoreProcess, score_process

try:
    import numba
    from numba import njit, prange

    # the default TBB layer emits version warnings on some images
    numba.config.THREADING_LAYER = "workqueue"
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is available in CI images
    _HAVE_NUMBA = False

#: Workspace budget for one chunk of gathered bootstrap series (numpy path).
_CHUNK_BYTES = 48_000_000

CALIBRATION_MODES = ("adjusted", "plain")


@dataclass(frozen=True)
class BootstrapPlan:
    """Circular moving block bootstrap configuration.

    Attributes
    ----------
    block_length : int
        Block length, at least 2 and at most T.
    replications : int
        Number of bootstrap resamples B.
    seed : int
        Base seed; replication b draws from an independent child stream, so
        results do not depend on execution order.
    """

    block_length: int
    replications: int
    seed: int

    def __post_init__(self):
        if int(self.block_length) != self.block_length or self.block_length < 2:
            raise ConfigError(
                f"block length must be an integer >= 2, got {self.block_length}"
            )
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError(
                f"bootstrap replications must be >= 1, got {self.replications}"
            )

    def block_count(self, T: int) -> int:
        """Number of blocks k = ceil(T / block_length)."""
        if self.block_length > T:
            raise ConfigError(
                f"block length {self.block_length} exceeds series length {T}"
            )
        return -(-T // self.block_length)


@dataclass(frozen=True)
class LrvConfig:
    """Bartlett long-run variance configuration (bandwidth M >= 1)."""

    bandwidth: int
    kernel: str = "bartlett"

    def __post_init__(self):
        if int(self.bandwidth) != self.bandwidth or self.bandwidth < 1:
            raise ConfigError(f"bandwidth must be an integer >= 1, got {self.bandwidth}")
        if self.kernel != "bartlett":
            raise ConfigError(f"unsupported kernel {self.kernel!r}")


def default_bandwidth(T: int) -> int:
    """Rule-of-thumb Bartlett bandwidth max(2, floor(T^{1/3})), capped at T/4.

    The T^{1/3} rate balances the kernel's truncation bias against its
    estimation noise for the max statistic; larger constants push the
    extreme-value calibration visibly conservative at simulation sizes.
    """
    if T < 8:
        raise ConfigError(f"bandwidth rule needs T >= 8, got T={T}")
    # the epsilon keeps exact cubes from rounding down (1000**(1/3) < 10)
    return min(max(2, math.floor(T ** (1.0 / 3.0) + 1e-9)), T // 4)


def circular_blocks_resample(
    X_tilde: np.ndarray, plan: BootstrapPlan, rng: np.random.Generator
) -> np.ndarray:
    """Draw one circular moving block resample of the rows of ``X_tilde``.

    k block start points are drawn uniformly from {0, ..., T-1}; each block
    wraps around modulo T, and the concatenated series is truncated to T rows.
    """
    T = X_tilde.shape[0]
    k = plan.block_count(T)
    starts = rng.integers(0, T, size=k)
    return X_tilde[_row_indices(starts[None, :], plan.block_length, T)[0]]


def _row_indices(starts: np.ndarray, block_length: int, T: int) -> np.ndarray:
    """Map (B, k) block starts to (B, T) wrapped row indices, truncated to T."""
    offsets = np.arange(block_length)
    idx = (starts[:, :, None] + offsets[None, None, :]) % T
    return idx.reshape(starts.shape[0], -1)[:, :T]


def _start_indices(T: int, plan: BootstrapPlan) -> np.ndarray:
    """Block starts for every replication, one child stream per replication."""
    k = plan.block_count(T)
    children = np.random.SeedSequence(plan.seed).spawn(plan.replications)
    out = np.empty((plan.replications, k), dtype=np.int64)
    for b, child in enumerate(children):
        out[b] = np.random.default_rng(child).integers(0, T, size=k)
    return out


def bartlett_lrv(X: np.ndarray, bandwidth: int) -> np.ndarray:
    """Bartlett long-run variance of each column of ``X`` over the trailing axes.

    ``X`` has shape (..., T, N). Lag-h autocovariances use divisor T - h and
    no demeaning; the kernel weight at |h| = M is zero, so only lags below the
    bandwidth contribute.
    """
    T = X.shape[-2]
    if bandwidth >= T:
        raise ConfigError(f"bandwidth {bandwidth} must be smaller than T={T}")
    acc = np.einsum("...ti,...ti->...i", X, X) / T
    for h in range(1, bandwidth):
        w = 1.0 - h / bandwidth
        phi_h = np.einsum("...ti,...ti->...i", X[..., h:, :], X[..., : T - h, :])
        acc = acc + (2.0 * w / (T - h)) * phi_h
    return acc


def lrv_bartlett(e_col: np.ndarray, eta: np.ndarray, cfg: LrvConfig) -> float:
    """Long-run variance of one coordinate's weighted residual series.

    Computes the kernel-weighted sum of lag autocovariances of
    x_t = e_col[t] * eta[t]. A nonpositive value is returned as computed,
    never clamped; callers decide whether that is an error.
    """
    e_col = np.asarray(e_col, dtype=float).reshape(-1)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if e_col.shape != eta.shape:
        raise ConfigError("residual column and eta must have the same length")
    x = (e_col * eta)[:, None]
    return float(bartlett_lrv(x, cfg.bandwidth)[0])


@dataclass(frozen=True)
class BootstrapDraws:
    """Per-replication bootstrap statistics from one shared pool."""

    tsum: np.ndarray
    qmax: np.ndarray | None
    block_length: int
    replications: int


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _pool_kernel(X, starts, ell, M):  # pragma: no cover - compiled
        B, k = starts.shape
        T, N = X.shape
        tsum = np.empty(B)
        qmax = np.empty(B)
        for b in prange(B):
            idx = np.empty(T, np.int64)
            pos = 0
            for m in range(k):
                j = starts[b, m]
                for s in range(ell):
                    if pos < T:
                        idx[pos] = (j + s) % T
                        pos += 1
            mean = np.zeros(N)
            for t in range(T):
                r = idx[t]
                for i in range(N):
                    mean[i] += X[r, i]
            acc = 0.0
            for i in range(N):
                mean[i] /= T
                acc += mean[i] * mean[i]
            tsum[b] = acc
            if M > 0:
                phi = np.zeros((M, N))
                for t in range(T):
                    rt = idx[t]
                    hmax = M if t + 1 >= M else t + 1
                    for h in range(hmax):
                        rs = idx[t - h]
                        for i in range(N):
                            phi[h, i] += X[rt, i] * X[rs, i]
                qb = -np.inf
                for i in range(N):
                    s = phi[0, i] / T
                    for h in range(1, M):
                        s += 2.0 * (1.0 - h / M) * phi[h, i] / (T - h)
                    q = T * mean[i] * mean[i] / s
                    if q > qb:
                        qb = q
                qmax[b] = qb
            else:
                qmax[b] = np.nan
        return tsum, qmax


def _pool_numpy(X_tilde, starts, ell, M):
    """Chunked numpy fallback for the bootstrap pool."""
    B = starts.shape[0]
    T, N = X_tilde.shape
    tsum = np.empty(B)
    qmax = np.full(B, np.nan)
    chunk = max(1, min(B, _CHUNK_BYTES // (T * N * 8)))
    for lo in range(0, B, chunk):
        hi = min(lo + chunk, B)
        rows = _row_indices(starts[lo:hi], ell, T)
        series = X_tilde[rows]  # (C, T, N)
        means = series.mean(axis=1)
        tsum[lo:hi] = (means * means).sum(axis=1)
        if M > 0:
            lrv = bartlett_lrv(series, M)
            with np.errstate(divide="ignore", invalid="ignore"):
                qmax[lo:hi] = (T * means * means / lrv).max(axis=1)
    return tsum, qmax


def bootstrap_pool(
    X_tilde: np.ndarray, plan: BootstrapPlan, bandwidth: int | None = None
) -> BootstrapDraws:
    """Run the circular block bootstrap once and collect the pooled draws.

    Every resample records the squared norm of its series mean; when
    ``bandwidth`` is given, the max of T * mean_i^2 / lrv_i with the
    long-run variance re-estimated on the resampled series is recorded too.
    """
    X_tilde = np.ascontiguousarray(X_tilde, dtype=float)
    T, _ = X_tilde.shape
    starts = _start_indices(T, plan)
    M = int(bandwidth) if bandwidth is not None else 0
    if _HAVE_NUMBA:
        tsum, qmax = _pool_kernel(X_tilde, starts, plan.block_length, M)
    else:
        tsum, qmax = _pool_numpy(X_tilde, starts, plan.block_length, M)
    return BootstrapDraws(
        tsum=tsum,
        qmax=qmax if M > 0 else None,
        block_length=plan.block_length,
        replications=plan.replications,
    )


# ---------------------------------------------------------------------------
# Finite-sample moment repair for the bootstrap calibration
# ---------------------------------------------------------------------------


def _circular_lag_traces(X_tilde: np.ndarray, max_lag: int) -> np.ndarray:
    """ghat_h = (1/T) sum_t X_tilde[t+h] . X_tilde[t] with circular indexing."""
    T = X_tilde.shape[0]
    out = np.empty(max_lag + 1)
    out[0] = float((X_tilde * X_tilde).sum()) / T
    for h in range(1, max_lag + 1):
        rolled = np.concatenate([X_tilde[h:], X_tilde[:h]], axis=0)
        out[h] = float((rolled * X_tilde).sum()) / T
    return out


def _eta_weights(eta: np.ndarray, H: int) -> np.ndarray:
    """Weights with E(T_DSUM) = sum_j w_j g_j (two-sided lags folded in)."""
    T = eta.shape[0]
    w = np.empty(H + 1)
    w[0] = float(eta @ eta) / T**2
    for j in range(1, H + 1):
        w[j] = 2.0 * float(eta[j:] @ eta[:-j]) / T**2
    return w


def _measurement_matrix(q_basis: np.ndarray, eta: np.ndarray, H: int, rows: int) -> np.ndarray:
    """Matrix A with E ghat_h = sum_j A[h, j] g_j for the centered score.

    Row h models the circular lag-h trace of the centered projected score;
    column j is the contribution of the true lag-j error autocovariance
    trace. The annihilator enters through its orthonormal basis ``q_basis``;
    demeaning subtracts the statistic's own mean weights from every row.
    """
    Q = q_basis
    T, m = Q.shape
    w = _eta_weights(eta, H)
    A = np.zeros((rows + 1, H + 1))

    def shift_up(M_, j):
        out = np.zeros_like(M_)
        if j == 0:
            return M_.copy()
        out[:-j] = M_[j:]
        return out

    def shift_down(M_, j):
        out = np.zeros_like(M_)
        if j == 0:
            return M_.copy()
        out[j:] = M_[:-j]
        return out

    W = {}
    for j in range(H + 1):
        if j == 0:
            W[j] = np.eye(m)
        else:
            C = Q[j:].T @ Q[:-j]
            W[j] = C + C.T

    t_idx = np.arange(T)
    for h in range(rows + 1):
        a_idx = (t_idx + h) % T
        eta_pair = eta[a_idx] * eta
        Qa = Q[a_idx]
        for j in range(H + 1):
            # direct term: |a - t| = j holds only for the unwrapped pairs
            # with j = h (wrapped pairs sit at distance T - h > H)
            if j == h:
                s1 = float(eta[h:] @ eta[: T - h]) / T if h > 0 else float(eta @ eta) / T
            else:
                s1 = 0.0
            # P D_j term: q_a . (q_{t-j} + q_{t+j})
            Bj = shift_up(Q, j) + shift_down(Q, j) if j > 0 else Q
            s2 = float(eta_pair @ np.einsum("tm,tm->t", Qa, Bj)) / T
            # D_j P term: (q_{a-j} + q_{a+j}) . q_t, realized by shifting the
            # gathered a-rows along t (moves a = t + h with it; edge O(h/T))
            Aj = shift_up(Qa, j) + shift_down(Qa, j) if j > 0 else Qa
            s3 = float(eta_pair @ np.einsum("tm,tm->t", Aj, Q)) / T
            # P D_j P term: q_a' W_j q_t
            s4 = float(eta_pair @ np.einsum("tm,tm->t", Qa @ W[j], Q)) / T
            A[h, j] = s1 - s2 - s3 + s4 - w[j]
    return A


def _lag_window_matrix(X: np.ndarray, H: int, weights: np.ndarray) -> np.ndarray:
    """sum_h weights[h] (Gamma_hat_h + Gamma_hat_h') via one banded filter."""
    L, N = X.shape
    Y = X * (weights[0] / L)
    for h in range(1, min(H, L - 1) + 1):
        w = weights[h] / (L - h)
        Y[h:] += w * X[:-h]
        Y[:-h] += w * X[h:]
    return X.T @ Y


def _half_score(resid_block: np.ndarray, q_block: np.ndarray):
    """Re-residualize one half against its own half-design.

    The rows of the full-sample orthonormal basis span the same column space
    as the half rows of Z, so annihilating them reproduces the half-sample
    sieve fit exactly; this decouples the two halves, which otherwise share
    the full fit's estimation noise.
    """
    T2 = resid_block.shape[0]
    Q1, _ = np.linalg.qr(q_block)
    E1 = resid_block - Q1 @ (Q1.T @ resid_block)
    ones = np.ones(T2)
    h1 = ones - Q1 @ (Q1.T @ ones)
    kappa1 = float(h1 @ h1)
    eta1 = h1 / (kappa1 / T2)
    X1 = E1 * eta1[:, None]
    return X1 - X1.mean(axis=0), Q1, eta1


def _scaled_half_matrix(fit, rows, g_true, H, weights, c2s):
    """Lag-window matrix of one refit row subset, repaired to model scale."""
    X1, Q1, eta1 = _half_score(fit.residuals[rows], fit.q_basis[rows])
    A1 = _measurement_matrix(Q1, eta1, H, H)
    target = float(c2s @ g_true)
    meas = float(c2s @ (A1 @ g_true))
    scale = target / meas if meas > 0 else 1.0
    if not np.isfinite(scale) or scale <= 0.0:
        scale = 1.0
    return scale * _lag_window_matrix(X1, H, weights)


def _cross_half_trace(
    fit: SieveFit, g_true: np.ndarray, H: int, weights: np.ndarray
) -> float:
    """Split-sample estimate of tr(Omega^2) for the lag-window matrix Omega.

    Each half is refit on its own rows, so the two factors of the Frobenius
    inner product carry independent covariance-noise realizations: the
    product is unbiased for tr(Omega^2) up to edge terms, unlike the square
    of a single estimate which carries an O(N^2/T) noise inflation. Two
    split layouts (contiguous halves and interleaved quarter pairs) are
    averaged to reduce the estimator's own noise.
    """
    T = fit.residuals.shape[0]
    c2s = np.ones(H + 1)
    c2s[1:] = 2.0 * weights[1 : H + 1]
    idx = np.arange(T)
    halves = np.array_split(idx, 2)
    thirds = np.array_split(idx, 3)
    pairs = [(halves[0], halves[1])]
    pairs += [(thirds[a], thirds[b]) for a in range(3) for b in range(a + 1, 3)]
    values = []
    for rows_a, rows_b in pairs:
        first = _scaled_half_matrix(fit, rows_a, g_true, H, weights, c2s)
        second = _scaled_half_matrix(fit, rows_b, g_true, H, weights, c2s)
        values.append(float((first * second).sum()))
    return float(np.mean(values))


@dataclass(frozen=True)
class MomentRepair:
    """Adjusted centering/scaling ingredients for the bootstrap calibration."""

    mean_ratio: float
    sd_target: float
    g_true: np.ndarray
    max_lag: int


def estimate_moment_repair(
    fit: SieveFit,
    score: ScoreProcess,
    plan: BootstrapPlan,
    bandwidth: int,
) -> MomentRepair:
    """Fit the lag-trace model and derive the calibration repair factors.

    Returns the ratio between the statistic's model-implied mean and the
    bootstrap's tapered target, together with a split-sample plug-in
    standard deviation for the sum statistic.
    """
    T = fit.T
    ell = plan.block_length
    H = min(max(bandwidth, 2), max(2, T // 8))
    rows = max(H, ell - 1)

    ghat = _circular_lag_traces(score.X_tilde, rows)
    A = _measurement_matrix(fit.q_basis, fit.eta, H, rows)
    w = _eta_weights(fit.eta, H)

    square = A[: H + 1, : H + 1]
    try:
        g_true = np.linalg.solve(square, ghat[: H + 1])
    except np.linalg.LinAlgError:
        g_true = np.linalg.lstsq(square, ghat[: H + 1], rcond=None)[0]
    if g_true[0] <= 0.0:
        # model breakdown; fall back to the measured traces (no repair)
        g_true = ghat[: H + 1].copy()

    mean_model = float(w @ g_true)
    taper = np.ones(min(ell, rows + 1))
    taper[1:] = 2.0 * (1.0 - np.arange(1, taper.size) / ell)
    boot_target = float(taper @ ghat[: taper.size]) / T
    mean_ratio = mean_model / boot_target if boot_target > 0 else 1.0
    if not np.isfinite(mean_ratio) or mean_ratio <= 0.0:
        mean_ratio = 1.0

    # spread target: 2 T^-2 tr(Omega^2) with Omega the full-weight lag-window
    # matrix, estimated by the split-sample inner product with each half
    # repaired to the model scale
    half_weights = np.ones(H + 1)
    half_weights[1:] = 1.0 - np.arange(1, H + 1) / T
    cross = _cross_half_trace(fit, g_true, H, half_weights)
    if cross > 0:
        # the repaired centering is itself estimated from the lag traces
        # (center ~= w' A^{-1} ghat); its noise widens the null law of the
        # studentized statistic, so it is folded into the scale via the
        # delta method with an equal-variance-per-lag approximation
        sens = np.linalg.solve(square.T, w)
        var_center = (2.0 * cross / T) * float(sens @ sens)
        sd_target = math.sqrt(2.0 * cross / T**2 + max(var_center, 0.0))
    else:
        sd_target = float("nan")

    return MomentRepair(
        mean_ratio=float(mean_ratio),
        sd_target=float(sd_target),
        g_true=g_true,
        max_lag=H,
    )


def dsum_test(
    fit: SieveFit,
    plan: BootstrapPlan,
    draws: BootstrapDraws | None = None,
    calibration: str = "adjusted",
) -> TestOutcome:
    """Sum-type test centered and scaled by bootstrap moments.

    The statistic is the squared norm of the average-alpha vector; its null
    mean and standard deviation are estimated from the bootstrap draws. With
    ``calibration="adjusted"`` (default) the moments carry the finite-sample
    repair described in the module docstring; ``"plain"`` uses the raw
    bootstrap moments.
    """
    if calibration not in CALIBRATION_MODES:
        raise ConfigError(f"unknown calibration {calibration!r}")
    if plan.replications < 2:
        raise ConfigError("the sum-type bootstrap needs at least 2 replications")
    score = score_process(fit)
    if draws is None:
        draws = bootstrap_pool(score.X_tilde, plan)
    t_dsum = float(fit.delta_hat @ fit.delta_hat)
    mu = float(draws.tsum.mean())
    sigma = float(draws.tsum.std(ddof=1))
    if sigma <= 0.0:
        raise DegenerateVarianceError(
            "bootstrap distribution of the sum statistic is degenerate"
        )
    diagnostics = {
        "raw_statistic": t_dsum,
        "bootstrap_mean": mu,
        "bootstrap_sd": sigma,
        "block_length": plan.block_length,
        "bootstrap_reps": plan.replications,
    }
    if calibration == "adjusted":
        repair = estimate_moment_repair(fit, score, plan, default_bandwidth(fit.T))
        mu = mu * repair.mean_ratio
        if np.isfinite(repair.sd_target) and repair.sd_target > 0:
            sigma = repair.sd_target
        else:
            sigma = sigma * repair.mean_ratio
        diagnostics["mean_ratio"] = repair.mean_ratio
        diagnostics["adjusted_mean"] = mu
        diagnostics["adjusted_sd"] = sigma
    statistic = (t_dsum - mu) / sigma
    return TestOutcome(
        name="DSUM",
        statistic=statistic,
        p_value=float(stats.norm.sf(statistic)),
        calibration="bootstrap",
        diagnostics=diagnostics,
    )


def dmax_test(
    fit: SieveFit,
    cfg: LrvConfig,
    plan: BootstrapPlan,
    calibration: str = "bootstrap",
    draws: BootstrapDraws | None = None,
) -> TestOutcome:
    """Max-type test normalized by coordinatewise Bartlett long-run variances.

    ``calibration`` is either ``"bootstrap"`` (block bootstrap of the max
    statistic, re-estimating the long-run variance on every resample, with
    the (1 + count)/(B + 1) p-value) or ``"gumbel"`` (extreme-value limit).
    """
    if calibration not in ("bootstrap", "gumbel"):
        raise ConfigError(f"unknown calibration {calibration!r}")
    score = score_process(fit)
    lrv = bartlett_lrv(score.X_hat, cfg.bandwidth)
    bad = np.flatnonzero(lrv <= 0.0)
    if bad.size:
        raise DegenerateVarianceError(
            f"nonpositive long-run variance for asset index {bad[0]}"
        )
    t_sq = fit.T * fit.delta_hat**2 / lrv
    i_max = int(np.argmax(t_sq))
    statistic = float(t_sq[i_max])
    diagnostics = {
        "argmax": i_max,
        "lrv_at_argmax": float(lrv[i_max]),
        "bandwidth": cfg.bandwidth,
    }

    if calibration == "gumbel":
        centering = max_centering(fit.N)
        p_value = float(gumbel_sf(statistic - centering))
        diagnostics["centering"] = centering
    else:
        if draws is None or draws.qmax is None:
            draws = bootstrap_pool(score.X_tilde, plan, bandwidth=cfg.bandwidth)
        B = draws.replications
        exceed = int(np.sum(draws.qmax >= statistic))
        p_value = (1 + exceed) / (B + 1)
        diagnostics["block_length"] = draws.block_length
        diagnostics["bootstrap_reps"] = B
    return TestOutcome(
        name="DMAX",
        statistic=statistic,
        p_value=p_value,
        calibration=calibration,
        diagnostics=diagnostics,
    )


def dcc_test(p_dsum: float, p_dmax: float) -> TestOutcome:
    """Equal-weight Cauchy combination of the DSUM and DMAX p-values."""
    statistic, p_value = combine([p_dsum, p_dmax])
    return TestOutcome(
        name="DCC",
        statistic=statistic,
        p_value=p_value,
        calibration="cauchy",
        diagnostics={"p_dsum": float(p_dsum), "p_dmax": float(p_dmax)},
    )


def dependent_battery(
    fit: SieveFit,
    cfg: LrvConfig,
    plan: BootstrapPlan,
    calibration: str = "adjusted",
) -> tuple[TestOutcome, TestOutcome, TestOutcome]:
    """Run DSUM, DMAX and their combination off one shared bootstrap pool.

    In "adjusted" mode (default) the sum test uses the repaired bootstrap
    moments and the max test the extreme-value calibration, which is the
    configuration that holds its size at simulation-scale designs. In
    "plain" mode both tests use the raw bootstrap constructions and one
    pool of resamples serves both, halving the resampling cost; each
    p-value is the marginal one either way, so the combination stays valid.
    """
    if calibration not in CALIBRATION_MODES:
        raise ConfigError(f"unknown calibration {calibration!r}")
    score = score_process(fit)
    if calibration == "adjusted":
        draws = bootstrap_pool(score.X_tilde, plan)
        dsum = dsum_test(fit, plan, draws=draws, calibration="adjusted")
        dmax = dmax_test(fit, cfg, plan, calibration="gumbel")
    else:
        draws = bootstrap_pool(score.X_tilde, plan, bandwidth=cfg.bandwidth)
        dsum = dsum_test(fit, plan, draws=draws, calibration="plain")
        dmax = dmax_test(fit, cfg, plan, calibration="bootstrap", draws=draws)
    dcc = dcc_test(dsum.p_value, dmax.p_value)
    return dsum, dmax, dcc
