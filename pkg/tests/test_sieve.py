import numpy as np
import pytest
from numpy.testing import assert_allclose

from tvalpha.errors import ConfigError, DimensionError, SingularDesignError
from tvalpha.panel import FactorSeries, ReturnPanel
from tvalpha.sieve import fit_sieve, score_process
from tvalpha.splines import SplineConfig, build_basis, build_design


def make_design(T, d, L=3, order=3, seed=0):
    rng = np.random.default_rng(seed)
    basis = build_basis(T, SplineConfig.from_basis_dim(L, order))
    f = FactorSeries(rng.standard_normal((T, d)))
    return build_design(basis, f), f, rng


class TestFitSieve:
    def test_exact_fit_zero_residuals(self):
        design, _, rng = make_design(40, 1)
        lam = rng.standard_normal(design.n_cols)
        R = ReturnPanel(np.column_stack([design.Z @ lam, design.Z @ (2 * lam)]))
        fit = fit_sieve(R, design)
        assert_allclose(fit.delta_hat, 0.0, atol=1e-10)
        assert_allclose(fit.residuals, 0.0, atol=1e-10)

    def test_intercept_recovery(self):
        # R = c 1_T + Z lambda: the annihilator ratio returns exactly c
        design, _, rng = make_design(40, 1)
        lam = rng.standard_normal(design.n_cols)
        c = 1.7
        R = ReturnPanel((c + design.Z @ lam)[:, None] * np.ones((1, 3)))
        fit = fit_sieve(R, design)
        assert_allclose(fit.delta_hat, c, rtol=1e-10)

    def test_frisch_waugh_oracle(self):
        # delta_hat equals the intercept from a full OLS on [1, Z]
        design, _, rng = make_design(30, 1, seed=3)
        R = rng.standard_normal((30, 3))
        fit = fit_sieve(ReturnPanel(R), design)
        X = np.column_stack([np.ones(30), design.Z[:, 1:]])
        for i in range(3):
            coef, *_ = np.linalg.lstsq(X, R[:, i], rcond=None)
            assert_allclose(fit.delta_hat[i], coef[0], rtol=1e-8)

    def test_delta_identity(self):
        design, _, rng = make_design(50, 2, seed=4)
        fit = fit_sieve(ReturnPanel(rng.standard_normal((50, 4))), design)
        lhs = fit.residuals.T @ fit.h / fit.kappa
        assert_allclose(lhs, fit.delta_hat, rtol=1e-10)

    def test_kappa_bounds_and_eta_mean(self):
        design, _, rng = make_design(50, 1, seed=5)
        fit = fit_sieve(ReturnPanel(rng.standard_normal((50, 2))), design)
        assert 0.0 < fit.kappa <= 50.0
        assert_allclose(fit.eta.mean(), 1.0, rtol=1e-12)

    def test_residual_orthogonality(self):
        design, _, rng = make_design(60, 1, seed=6)
        fit = fit_sieve(ReturnPanel(rng.standard_normal((60, 3))), design)
        assert np.abs(design.Z.T @ fit.residuals).max() < 1e-8

    def test_projection_idempotent(self):
        design, f, rng = make_design(60, 1, seed=7)
        fit = fit_sieve(ReturnPanel(rng.standard_normal((60, 3))), design)
        refit = fit_sieve(ReturnPanel(fit.residuals), design)
        assert_allclose(refit.residuals, fit.residuals, rtol=1e-10, atol=1e-12)

    def test_scale_equivariance(self):
        design, _, rng = make_design(40, 1, seed=8)
        R = rng.standard_normal((40, 2))
        fit1 = fit_sieve(ReturnPanel(R), design)
        fit3 = fit_sieve(ReturnPanel(3.0 * R), design)
        assert_allclose(fit3.delta_hat, 3.0 * fit1.delta_hat, rtol=1e-12)
        assert_allclose(fit3.residuals, 3.0 * fit1.residuals, rtol=1e-12)

    def test_sigma_hat_divisor_T(self):
        design, _, rng = make_design(40, 1, seed=9)
        R = rng.standard_normal((40, 3))
        fit = fit_sieve(ReturnPanel(R), design)
        centered = fit.residuals - fit.residuals.mean(axis=0)
        assert_allclose(fit.sigma_hat, centered.T @ centered / 40, rtol=1e-12)

    def test_dimension_mismatch(self):
        design, _, rng = make_design(40, 1)
        with pytest.raises(DimensionError):
            fit_sieve(ReturnPanel(rng.standard_normal((41, 2))), design)

    def test_too_few_observations(self):
        design, _, rng = make_design(40, 1, L=3)
        short = ReturnPanel(rng.standard_normal((40, 2)))
        small_design, _, _ = make_design(11, 1, L=3)
        with pytest.raises(ConfigError):
            fit_sieve(ReturnPanel(rng.standard_normal((11, 2))), small_design)

    def test_singular_design(self):
        T = 40
        basis = build_basis(T, SplineConfig.from_basis_dim(3, 3))
        # two identical factors make the factor blocks collinear
        f = FactorSeries(np.tile(np.random.default_rng(0).standard_normal((T, 1)), 2))
        design = build_design(basis, f)
        with pytest.raises(SingularDesignError) as err:
            fit_sieve(ReturnPanel(np.random.default_rng(1).standard_normal((T, 2))), design)
        assert err.value.cond > 1e12


class TestScoreProcess:
    def test_unit_eta_gives_residuals(self):
        design, _, rng = make_design(40, 1, seed=10)
        fit = fit_sieve(ReturnPanel(rng.standard_normal((40, 2))), design)
        forced = fit.__class__(
            residuals=fit.residuals,
            h=fit.h,
            kappa=fit.kappa,
            eta=np.ones(40),
            delta_hat=fit.delta_hat,
            sigma_hat=fit.sigma_hat,
            dims=fit.dims,
            q_basis=fit.q_basis,
        )
        sp = score_process(forced)
        assert_allclose(sp.X_hat, fit.residuals)

    def test_column_centering(self):
        design, _, rng = make_design(50, 1, seed=11)
        fit = fit_sieve(ReturnPanel(rng.standard_normal((50, 4))), design)
        sp = score_process(fit)
        assert np.abs(sp.X_tilde.mean(axis=0)).max() < 1e-12

    def test_elementwise_oracle(self):
        design, _, rng = make_design(20, 1, seed=12)
        fit = fit_sieve(ReturnPanel(rng.standard_normal((20, 2))), design)
        sp = score_process(fit)
        for t in range(20):
            for i in range(2):
                assert sp.X_hat[t, i] == fit.residuals[t, i] * fit.eta[t]

    def test_score_mean_equals_delta(self):
        design, _, rng = make_design(30, 1, seed=13)
        fit = fit_sieve(ReturnPanel(rng.standard_normal((30, 3))), design)
        sp = score_process(fit)
        assert_allclose(sp.X_hat.mean(axis=0), fit.delta_hat, rtol=1e-10, atol=1e-14)
