import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import toeplitz

from iapower.arima import ArimaSpec, acvf
from iapower.toeplitz import (
    NotPositiveDefiniteError,
    SymToeplitz,
    durbin_levinson,
    gaussian_loglik,
    levinson_solve,
    log_det,
    quad_form,
    trench_inverse,
    whiten,
)


def ar1_row(phi, n):
    return acvf(ArimaSpec.ar1(phi), n - 1)


def random_spd_row(rng, n):
    # acvf of a random stable AR(2)+MA(1) is a valid SPD Toeplitz row
    pacf = rng.uniform(-0.8, 0.8, size=2)
    ar = (pacf[0] * (1 - pacf[1]), pacf[1])
    return acvf(ArimaSpec(ar, (rng.uniform(-0.7, 0.7),)), n - 1)


class TestTrench:
    def test_scalar(self):
        np.testing.assert_allclose(trench_inverse(SymToeplitz([4.0])), [[0.25]])

    def test_identity(self):
        np.testing.assert_allclose(trench_inverse(SymToeplitz(np.eye(5)[0])), np.eye(5))

    def test_ar1_tridiagonal(self):
        B = trench_inverse(SymToeplitz(ar1_row(0.5, 6)))
        np.testing.assert_allclose(B, np.linalg.inv(toeplitz(ar1_row(0.5, 6))), atol=1e-10)
        assert np.max(np.abs(np.triu(B, 2))) < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(1, 100), seed=st.integers(0, 2**31))
    def test_matches_dense_inverse(self, n, seed):
        row = random_spd_row(np.random.default_rng(seed), n)
        B = trench_inverse(SymToeplitz(row))
        A = np.linalg.inv(toeplitz(row))
        assert np.max(np.abs(B - A)) <= 1e-8 * max(1.0, np.max(np.abs(A)))

    def test_fractional_dense(self):
        row = acvf(ArimaSpec.fractional(0.4), 99)
        B = trench_inverse(SymToeplitz(row))
        np.testing.assert_allclose(B @ toeplitz(row), np.eye(100), atol=1e-8)

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefiniteError):
            trench_inverse(SymToeplitz([1.0, 1.0, 1.0]))


class TestLevinson:
    def test_identity(self):
        np.testing.assert_allclose(levinson_solve(SymToeplitz([1.0, 0, 0]), [1, 2, 3]), [1, 2, 3])

    def test_random_dense_oracle(self):
        rng = np.random.default_rng(3)
        row = random_spd_row(rng, 8)
        b = rng.normal(size=8)
        np.testing.assert_allclose(
            levinson_solve(SymToeplitz(row), b), np.linalg.solve(toeplitz(row), b), atol=1e-9
        )

    @settings(max_examples=20, deadline=None)
    @given(n=st.integers(1, 40), seed=st.integers(0, 2**31))
    def test_consistent_with_trench(self, n, seed):
        rng = np.random.default_rng(seed)
        m = SymToeplitz(random_spd_row(rng, n))
        b = rng.normal(size=n)
        np.testing.assert_allclose(trench_inverse(m) @ b, levinson_solve(m, b), atol=1e-9)

    def test_matrix_rhs(self):
        rng = np.random.default_rng(1)
        row = random_spd_row(rng, 12)
        R = rng.normal(size=(12, 3))
        np.testing.assert_allclose(
            levinson_solve(SymToeplitz(row), R), np.linalg.solve(toeplitz(row), R), atol=1e-9
        )


class TestLogDet:
    def test_identity(self):
        assert log_det(SymToeplitz([1.0, 0, 0, 0])) == pytest.approx(0.0, abs=1e-15)

    def test_diagonal(self):
        assert log_det(SymToeplitz([2.5, 0, 0])) == pytest.approx(3 * np.log(2.5))

    def test_ar1_cholesky(self):
        A = toeplitz(ar1_row(0.7, 10))
        oracle = 2 * np.sum(np.log(np.diag(np.linalg.cholesky(A))))
        assert log_det(SymToeplitz(ar1_row(0.7, 10))) == pytest.approx(oracle, abs=1e-9)

    def test_ar1_closed_form(self):
        # prediction variances are gamma_0 then sigma_a2 = 1, so |Gamma_n| = gamma_0
        phi, n = 0.6, 30
        assert log_det(SymToeplitz(ar1_row(phi, n))) == pytest.approx(-np.log(1 - phi**2))


class TestLoglik:
    def test_identity_zero(self):
        assert gaussian_loglik(SymToeplitz([1.0, 0.0]), [0.0, 0.0], 1.0) == pytest.approx(0.0)

    def test_identity_ones(self):
        assert gaussian_loglik(SymToeplitz([1.0, 0.0]), [1.0, 1.0], 1.0) == pytest.approx(-1.0)

    def test_ar1_innovations_form(self):
        # independent oracle: conditional AR(1) factorization
        phi, n = 0.5, 20
        y = np.random.default_rng(0).normal(size=n)
        s2 = 1.7
        g0 = 1 / (1 - phi**2)
        e = np.r_[y[0], y[1:] - phi * y[:-1]]
        v = np.r_[g0, np.ones(n - 1)]
        oracle = -0.5 * (np.sum(np.log(v)) + n * np.log(s2) + np.sum(e**2 / v) / s2)
        assert gaussian_loglik(SymToeplitz(ar1_row(phi, n)), y, s2) == pytest.approx(oracle, abs=1e-8)


class TestTools:
    def test_durbin_levinson_variances_positive(self):
        for spec in (ArimaSpec.fractional(0.45), ArimaSpec((0.9,), (-0.5,)), ArimaSpec.ar1(0.95)):
            pacf, v = durbin_levinson(SymToeplitz(acvf(spec, 199)))
            assert np.all(v > 0)
            assert pacf[0] == 1 and np.all(np.abs(pacf[1:]) < 1)

    def test_ar1_pacf(self):
        pacf, v = durbin_levinson(SymToeplitz(ar1_row(0.5, 6)))
        assert pacf[1] == pytest.approx(0.5)
        np.testing.assert_allclose(pacf[2:], 0, atol=1e-12)
        np.testing.assert_allclose(v, [4 / 3, 1, 1, 1, 1, 1])

    def test_quad_form_dense(self):
        rng = np.random.default_rng(5)
        row = random_spd_row(rng, 25)
        X = rng.normal(size=(25, 3))
        Y = rng.normal(size=(25, 2))
        A = np.linalg.inv(toeplitz(row))
        m = SymToeplitz(row)
        np.testing.assert_allclose(quad_form(m, X), X.T @ A @ X, atol=1e-9)
        np.testing.assert_allclose(quad_form(m, X, Y), X.T @ A @ Y, atol=1e-9)

    def test_steady_state_freeze_is_harmless(self):
        row = ar1_row(0.5, 300)
        X = np.random.default_rng(2).normal(size=(300, 2))
        m = SymToeplitz(row)
        np.testing.assert_allclose(
            quad_form(m, X, steady_tol=1e-15, window=4), quad_form(m, X), rtol=1e-12
        )

    def test_whiten_identity(self):
        X = np.arange(6.0).reshape(3, 2)
        E, v = whiten(SymToeplitz([1.0, 0, 0]), X)
        np.testing.assert_allclose(E, X)
        np.testing.assert_allclose(v, 1)

    def test_matmul(self):
        row = ar1_row(0.3, 7)
        x = np.arange(7.0)
        np.testing.assert_allclose(SymToeplitz(row) @ x, toeplitz(row) @ x)
