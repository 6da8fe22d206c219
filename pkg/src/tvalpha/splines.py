"""Normalized B-spline bases and the sieve design matrix.

The basis is evaluated on the clamped uniform knot vector with the standard
triangular (de Boor) recursion, which keeps repeated end knots well defined.
Rows of the basis matrix sum to one; the centered basis subtracts the grid
column means so the intercept direction stays identified in the regression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .panel import FactorSeries


@dataclass(frozen=True)
class SplineConfig:
    """Order-q spline space on [0, 1] with p uniform interior knots.

    Parameters
    ----------
    order : int
        Spline order q >= 2 (q = 4 is cubic).
    interior_knots : int
        Number p >= 0 of interior knots placed at k/(p+1), k = 1..p.
    """

    order: int = 4
    interior_knots: int = 1
    knot_layout: str = "uniform"

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ConfigError(f"spline order must be an integer >= 2, got {self.order}")
        if int(self.interior_knots) != self.interior_knots or self.interior_knots < 0:
            raise ConfigError(
                f"interior knot count must be an integer >= 0, got {self.interior_knots}"
            )
        if self.knot_layout != "uniform":
            raise ConfigError(f"unsupported knot layout {self.knot_layout!r}")

    @property
    def basis_dim(self) -> int:
        """Total basis dimension L = p + q."""
        return self.interior_knots + self.order

    @classmethod
    def from_basis_dim(cls, basis_dim: int, order: int = 4) -> "SplineConfig":
        """Build a config from (L, q), solving p = L - q."""
        if basis_dim < order:
            raise ConfigError(
                f"basis dimension {basis_dim} smaller than spline order {order}"
            )
        return cls(order=order, interior_knots=basis_dim - order)

    def knots(self) -> np.ndarray:
        """Clamped knot vector: q-fold endpoints, uniform interior knots."""
        p, q = self.interior_knots, self.order
        interior = np.arange(1, p + 1) / (p + 1)
        return np.concatenate([np.zeros(q), interior, np.ones(q)])


@dataclass(frozen=True)
class BasisEval:
    """Basis values on the grid u_t = t/T together with the centered version."""

    grid: np.ndarray
    values: np.ndarray
    centered: np.ndarray
    config: SplineConfig

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def L(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DesignMatrix:
    """Sieve regressors Z with rows (centered basis, f_1 * basis, ..., f_d * basis)."""

    Z: np.ndarray
    d: int
    L: int

    @property
    def T(self) -> int:
        return self.Z.shape[0]

    @property
    def n_cols(self) -> int:
        return self.Z.shape[1]


def evaluate_basis(u, cfg: SplineConfig) -> np.ndarray:
    """Evaluate all L normalized B-splines at points ``u`` in [0, 1].

    Uses the triangular recursion over the nonzero span, vectorized across
    evaluation points. The right endpoint u = 1 is attached to the last
    nondegenerate knot span so the partition of unity holds on all of [0, 1].
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise DimensionError("evaluation points must lie in [0, 1]")
    q = cfg.order
    L = cfg.basis_dim
    knots = cfg.knots()
    degree = q - 1

    # Knot span index: largest mu with knots[mu] <= u, restricted to spans
    # [degree, L-1] which are exactly the nondegenerate ones.
    mu = np.searchsorted(knots, u, side="right") - 1
    mu = np.clip(mu, degree, L - 1)

    n = u.shape[0]
    vals = np.zeros((n, q))
    vals[:, 0] = 1.0
    left = np.empty((n, q))
    right = np.empty((n, q))
    for j in range(1, q):
        left[:, j] = u - knots[mu + 1 - j]
        right[:, j] = knots[mu + j] - u
        saved = np.zeros(n)
        for r in range(j):
            # denominator equals knots[mu+r+1] - knots[mu+r+1-j] > 0 on valid spans
            temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
            vals[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        vals[:, j] = saved

    out = np.zeros((n, L))
    rows = np.arange(n)[:, None]
    cols = mu[:, None] + np.arange(-degree, 1)[None, :]
    out[rows, cols] = vals
    return out


def build_basis(T: int, cfg: SplineConfig) -> BasisEval:
    """Evaluate the basis and its centered version on the grid t/T, t = 1..T."""
    if T < 2:
        raise ConfigError(f"need at least 2 grid points, got T={T}")
    grid = np.arange(1, T + 1) / T
    values = evaluate_basis(grid, cfg)
    centered = values - values.mean(axis=0)
    return BasisEval(grid=grid, values=values, centered=centered, config=cfg)


def build_design(basis: BasisEval, factors: FactorSeries) -> DesignMatrix:
    """Assemble Z from the centered basis block and one basis block per factor.

    Row t is (Bc(t/T)', f_t1 B(t/T)', ..., f_td B(t/T)')' for the centered
    basis Bc and raw basis B, giving (d+1)L columns in total.
    """
    f = factors.values
    if f.shape[0] != basis.T:
        raise DimensionError(
            f"factor rows ({f.shape[0]}) do not match basis grid length ({basis.T})"
        )
    d = f.shape[1]
    blocks = [basis.centered]
    for j in range(d):
        blocks.append(f[:, j : j + 1] * basis.values)
    return DesignMatrix(Z=np.hstack(blocks), d=d, L=basis.L)
