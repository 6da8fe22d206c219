import numpy as np
import pytest
from numpy.testing import assert_allclose

from tvalpha.errors import ConfigError, DimensionError
from tvalpha.panel import FactorSeries
from tvalpha.splines import BasisEval, SplineConfig, build_basis, build_design, evaluate_basis


def naive_bspline(x, order, i, knots):
    """Textbook Cox-de Boor recursion, one basis function at one point.

    The last nondegenerate interval is treated as closed so the basis forms
    a partition of unity on all of [0, 1].
    """
    k = order - 1
    if k == 0:
        last = np.max(np.flatnonzero(knots < knots[-1]))
        if knots[i] <= x < knots[i + 1]:
            return 1.0
        if x == knots[-1] and i == last:
            return 1.0
        return 0.0
    c1 = c2 = 0.0
    if knots[i + k] != knots[i]:
        c1 = (x - knots[i]) / (knots[i + k] - knots[i]) * naive_bspline(x, order - 1, i, knots)
    if knots[i + k + 1] != knots[i + 1]:
        c2 = (
            (knots[i + k + 1] - x)
            / (knots[i + k + 1] - knots[i + 1])
            * naive_bspline(x, order - 1, i + 1, knots)
        )
    return c1 + c2


class TestSplineConfig:
    def test_basis_dim(self):
        assert SplineConfig(order=4, interior_knots=1).basis_dim == 5
        assert SplineConfig(order=2, interior_knots=0).basis_dim == 2

    def test_from_basis_dim(self):
        cfg = SplineConfig.from_basis_dim(5, order=4)
        assert cfg.interior_knots == 1

    def test_knot_vector(self):
        cfg = SplineConfig(order=3, interior_knots=2)
        knots = cfg.knots()
        assert_allclose(knots, [0, 0, 0, 1 / 3, 2 / 3, 1, 1, 1])
        assert np.all(np.diff(knots) >= 0)

    @pytest.mark.parametrize("order,p", [(1, 0), (0, 1), (4, -1), (2.5, 0)])
    def test_invalid_config(self, order, p):
        with pytest.raises(ConfigError):
            SplineConfig(order=order, interior_knots=p)

    def test_basis_dim_below_order(self):
        with pytest.raises(ConfigError):
            SplineConfig.from_basis_dim(3, order=4)


class TestBuildBasis:
    def test_partition_of_unity_small(self):
        # T=4, q=2, p=0: every row sums to one
        basis = build_basis(4, SplineConfig(order=2, interior_knots=0))
        assert_allclose(basis.values.sum(axis=1), np.ones(4), atol=1e-10)

    def test_centering_identity(self):
        basis = build_basis(10, SplineConfig(order=4, interior_knots=1))
        assert np.abs(basis.centered.mean(axis=0)).max() < 1e-12

    @pytest.mark.parametrize("order,p,T", [(2, 0, 4), (3, 2, 8), (4, 1, 10), (4, 5, 37)])
    def test_partition_of_unity(self, order, p, T):
        basis = build_basis(T, SplineConfig(order=order, interior_knots=p))
        assert np.abs(basis.values.sum(axis=1) - 1.0).max() < 1e-10

    def test_against_naive_recursion(self):
        # q=3, p=2 at u=0.5 and the full grid, versus the textbook recursion
        cfg = SplineConfig(order=3, interior_knots=2)
        knots = cfg.knots()
        basis = build_basis(8, cfg)
        for t, u in enumerate(basis.grid):
            expected = [naive_bspline(u, cfg.order, i, knots) for i in range(cfg.basis_dim)]
            assert_allclose(basis.values[t], expected, atol=1e-12)
        mid = evaluate_basis([0.5], cfg)[0]
        expected = [naive_bspline(0.5, 3, i, knots) for i in range(5)]
        assert_allclose(mid, expected, atol=1e-12)

    def test_against_scipy(self):
        from scipy.interpolate import BSpline

        cfg = SplineConfig(order=4, interior_knots=3)
        basis = build_basis(25, cfg)
        ref = BSpline.design_matrix(basis.grid, cfg.knots(), cfg.order - 1).toarray()
        assert_allclose(basis.values, ref, atol=1e-12)

    def test_local_support(self):
        cfg = SplineConfig(order=4, interior_knots=6)
        basis = build_basis(50, cfg)
        assert int((basis.values != 0).sum(axis=1).max()) <= cfg.order

    def test_endpoint_value(self):
        basis = build_basis(10, SplineConfig(order=4, interior_knots=1))
        # u = 1 is in the grid; the last basis function carries all the mass
        assert_allclose(basis.values[-1, -1], 1.0)

    def test_too_small_grid(self):
        with pytest.raises(ConfigError):
            build_basis(1, SplineConfig())

    def test_out_of_domain(self):
        with pytest.raises(DimensionError):
            evaluate_basis([-0.1], SplineConfig())


class TestBuildDesign:
    def test_no_factor_degenerate(self):
        basis = build_basis(12, SplineConfig(order=3, interior_knots=1))
        design = build_design(basis, FactorSeries(np.empty((12, 0))))
        assert design.d == 0
        assert_allclose(design.Z, basis.centered)

    def test_unit_factor(self):
        basis = build_basis(12, SplineConfig(order=3, interior_knots=1))
        design = build_design(basis, FactorSeries(np.ones((12, 1))))
        L = basis.L
        assert_allclose(design.Z[:, L : 2 * L], basis.values)

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(7)
        basis = build_basis(20, SplineConfig(order=4, interior_knots=1))
        f = rng.standard_normal((20, 2))
        design = build_design(basis, FactorSeries(f))
        L = basis.L
        assert design.n_cols == 3 * L
        for t in range(20):
            for j in range(L):
                assert design.Z[t, L + j] == f[t, 0] * basis.values[t, j]
                assert design.Z[t, 2 * L + j] == f[t, 1] * basis.values[t, j]

    def test_first_block_centered(self):
        rng = np.random.default_rng(1)
        basis = build_basis(30, SplineConfig(order=4, interior_knots=1))
        design = build_design(basis, FactorSeries(rng.standard_normal((30, 1))))
        assert np.abs(design.Z[:, : basis.L].mean(axis=0)).max() < 1e-12

    def test_row_mismatch(self):
        basis = build_basis(10, SplineConfig(order=3, interior_knots=0))
        with pytest.raises(DimensionError):
            build_design(basis, FactorSeries(np.ones((11, 1))))

    def test_design_rank(self):
        # the centered partition-of-unity block loses exactly one dimension,
        # so with generic factors the rank is (d+1)L - 1
        rng = np.random.default_rng(5)
        basis = build_basis(60, SplineConfig(order=4, interior_knots=1))
        design = build_design(basis, FactorSeries(rng.standard_normal((60, 2))))
        rank = np.linalg.matrix_rank(design.Z.T @ design.Z)
        assert rank == design.n_cols - 1
