"""Null-restricted sieve regression and the projected score process.

The annihilator M_Z is never materialized: residuals and the h vector come
from a thin QR factorization of Z, so everything runs in O(T L^2 (d+1)^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, SingularDesignError
from .panel import ReturnPanel
from .splines import DesignMatrix

#: Reject fits when cond(Z'Z) exceeds this cap.
CONDITION_CAP = 1e12


@dataclass(frozen=True)
class SieveFit:
    """Everything derived from one null-restricted sieve regression.

    Attributes
    ----------
    residuals : (T, N) ndarray
        E_hat = M_Z R, the annihilated returns.
    h : (T,) ndarray
        M_Z 1_T.
    kappa : float
        1' M_Z 1 = sum of h_t`^2`.
    eta : (T,) ndarray
        h_t / (kappa / T); averages to one.
    delta_hat : (N,) ndarray
        Average-alpha estimates, one per asset.
    sigma_hat : (N, N) ndarray
        Centered residual covariance with divisor T.
    dims : tuple
        (T, N, d, L).
    """

    residuals: np.ndarray
    h: np.ndarray
    kappa: float
    eta: np.ndarray
    delta_hat: np.ndarray
    sigma_hat: np.ndarray
    dims: tuple
    #: Orthonormal basis of the fitted sieve space (T x rank); lets downstream
    #: code apply the annihilator without materializing it.
    q_basis: np.ndarray = None

    @property
    def T(self) -> int:
        return self.dims[0]

    @property
    def N(self) -> int:
        return self.dims[1]

    @property
    def d(self) -> int:
        return self.dims[2]

    @property
    def L(self) -> int:
        return self.dims[3]


@dataclass(frozen=True)
class ScoreProcess:
    """Projected score X_hat and its columnwise-centered version X_tilde."""

    X_hat: np.ndarray
    X_tilde: np.ndarray


def fit_sieve(panel: ReturnPanel, design: DesignMatrix, cond_cap: float = CONDITION_CAP) -> SieveFit:
    """Fit the null-restricted sieve regression of every asset on Z.

    Parameters
    ----------
    panel : ReturnPanel
        T x N excess returns.
    design : DesignMatrix
        Sieve regressors from :func:`tvalpha.splines.build_design`.
    cond_cap : float
        Maximum admissible condition number of Z'Z.

    Returns
    -------
    SieveFit

    Raises
    ------
    DimensionError
        If panel and design row counts disagree.
    ConfigError
        If T < 2 (d+1) L, too few observations for a stable fit.
    SingularDesignError
        If cond(Z'Z) exceeds ``cond_cap``.

    Notes
    -----
    The centered basis block sums to the zero vector across its columns
    (partition of unity), so Z carries exactly one structural rank
    deficiency. The first centered-basis column is dropped before
    factorizing; this leaves the column space, and hence every projection
    quantity, unchanged. The condition guard applies to the reduced design.
    """
    R = panel.values
    Z = design.Z
    T, N = R.shape
    if Z.shape[0] != T:
        raise DimensionError(f"panel has {T} rows but design has {Z.shape[0]}")
    m = Z.shape[1]
    if T < 2 * m:
        raise ConfigError(
            f"need T >= 2 (d+1) L = {2 * m} observations for the sieve fit, got T={T}"
        )

    Z_reduced = Z[:, 1:]
    Q, Rfac = np.linalg.qr(Z_reduced)
    sv = np.linalg.svd(Rfac, compute_uv=False)
    cond = np.inf if sv[-1] == 0.0 else (sv[0] / sv[-1]) ** 2
    if cond > cond_cap:
        raise SingularDesignError(cond, cond_cap)

    # M_Z x = x - Q (Q' x), applied columnwise
    residuals = R - Q @ (Q.T @ R)
    ones = np.ones(T)
    h = ones - Q @ (Q.T @ ones)
    kappa = float(h @ h)
    eta = h / (kappa / T)
    delta_hat = residuals.T @ h / kappa

    centered = residuals - residuals.mean(axis=0)
    sigma_hat = centered.T @ centered / T

    return SieveFit(
        residuals=residuals,
        h=h,
        kappa=kappa,
        eta=eta,
        delta_hat=delta_hat,
        sigma_hat=sigma_hat,
        dims=(T, N, design.d, design.L),
        q_basis=Q,
    )


def score_process(fit: SieveFit) -> ScoreProcess:
    """Form X_hat[t] = residuals[t] * eta_t and center it columnwise.

    The column means of X_hat reproduce delta_hat exactly, so X_tilde is
    X_hat recentred at the estimated average alphas.
    """
    X_hat = fit.residuals * fit.eta[:, None]
    X_tilde = X_hat - X_hat.mean(axis=0)
    return ScoreProcess(X_hat=X_hat, X_tilde=X_tilde)
