import numpy as np
import pytest
from scipy.linalg import toeplitz

from iapower.arima import ArimaSpec, acvf, simulate
from iapower.estimation import (
    FitError,
    FitResult,
    Structure,
    _profile,
    fit_sia,
    lr_test,
    profile_loglik,
    q_statistic,
    z_test,
)
from iapower.information import exact_info, sigma_omega
from iapower.intervention import InterventionSpec, StudyDesign, difference, series
from iapower.simulation import simulate_sia
from iapower.toeplitz import SymToeplitz, gaussian_loglik

AR5 = ArimaSpec.ar1(0.5)
D50 = StudyDesign(50, 25)
IV25 = InterventionSpec("step", 25)


def rng(seed):
    return np.random.default_rng(seed)


def test_white_noise_difference_of_means():
    y = simulate_sia(ArimaSpec(), "step", D50, 0.7, rng(0))
    fit = fit_sia(y, Structure(), IV25)
    assert fit.omega == pytest.approx(y[24:].mean() - y[:24].mean(), abs=1e-10)
    assert fit.xi == pytest.approx(y[:24].mean(), abs=1e-10)


def test_white_noise_ols():
    y = simulate_sia(ArimaSpec(), "ramp", D50, 0.1, rng(1))
    X = np.column_stack([np.ones(50), series("ramp", 25, 50)])
    beta, res, *_ = np.linalg.lstsq(X, y, rcond=None)
    fit = fit_sia(y, Structure(), InterventionSpec("ramp", 25))
    np.testing.assert_allclose([fit.xi, fit.omega], beta, atol=1e-10)
    assert fit.sigma_a2 == pytest.approx(res[0] / 50)


def test_gls_at_fixed_parameters():
    y = simulate_sia(AR5, "step", D50, 1.0, rng(2))
    X = np.column_stack([np.ones(50), series("step", 25, 50)])
    Gi = np.linalg.inv(toeplitz(acvf(AR5, 49)))
    beta = np.linalg.solve(X.T @ Gi @ X, X.T @ Gi @ y)
    pr = _profile(y, X, np.array([0.5]), np.zeros(0), 0.0)
    np.testing.assert_allclose(pr.beta, beta, atol=1e-10)


def test_profile_loglik_matches_toeplitz_likelihood():
    y = simulate_sia(AR5, "step", D50, 1.0, rng(3))
    X = np.column_stack([np.ones(50), series("step", 25, 50)])
    pr = _profile(y, X, np.array([0.4]), np.zeros(0), 0.0)
    full = gaussian_loglik(SymToeplitz(acvf(ArimaSpec.ar1(0.4), 49)), y - X @ pr.beta, pr.sigma2)
    assert pr.loglik == pytest.approx(full, abs=1e-8)


@pytest.mark.parametrize(
    "model, kind",
    [(AR5, "step"), (ArimaSpec.ima1(0.5), "step"), (ArimaSpec.fractional(0.3), "step"), (ArimaSpec((0.5,), (0.3,)), "ramp")],
)
def test_no_false_convergence(model, kind):
    iv = InterventionSpec(kind, 25)
    for s in range(15):
        y = simulate_sia(model, kind, D50, 0.5, rng(100 + s))
        fit = fit_sia(y, model, iv)
        truth = profile_loglik(y, model, iv, False, model.ar, model.ma, model.f)
        assert fit.loglik >= truth - 1e-6


def test_deterministic():
    y = simulate_sia(ArimaSpec.fractional(0.2), "step", D50, 0.5, rng(4))
    a = fit_sia(y, ArimaSpec.fractional(0.2), IV25)
    b = fit_sia(y, ArimaSpec.fractional(0.2), IV25)
    assert a == b


def test_recovers_parameters_long_series():
    m = ArimaSpec((0.6,), (0.3,))
    d = StudyDesign(800, 401)
    y = simulate_sia(m, "step", d, 2.0, rng(5))
    fit = fit_sia(y, m, InterventionSpec("step", 401))
    assert fit.converged
    assert fit.ar[0] == pytest.approx(0.6, abs=0.1)
    assert fit.ma[0] == pytest.approx(0.3, abs=0.12)
    assert fit.omega == pytest.approx(2.0, abs=4 * fit.se_omega)
    assert fit.sigma_a2 == pytest.approx(1.0, abs=0.15)


def test_mean_known_and_differenced():
    m = ArimaSpec.ima1(0.4)
    y = simulate_sia(m, "step", D50, 1.0, rng(6))
    fit = fit_sia(y, m, IV25, mean_known=True)
    assert fit.xi is None and fit.se_xi is None
    assert fit.nobs == 49
    # with theta fixed the estimate is the GLS slope on the differenced data
    pr = _profile(difference(y, 1)[1:], difference(series("step", 25, 50), 1)[1:, None].astype(float),
                  np.zeros(0), np.array(fit.ma), 0.0)
    assert fit.omega == pytest.approx(pr.beta[0], abs=1e-10)


def test_degenerate_series():
    with pytest.raises(FitError):
        fit_sia(np.full(30, 2.0), AR5, InterventionSpec("step", 15))


def test_too_short():
    with pytest.raises(ValueError):
        fit_sia(np.zeros(4), ArimaSpec((0.1, 0.1), (0.1,)), InterventionSpec("step", 2))


def _fit(omega, se, ok=True):
    return FitResult(0.0, omega, (), (), 0.0, 1.0, 0.1, se, 0.0, ok, 1)


def test_z_values():
    z = z_test(_fit(1.0, 0.5))
    assert z.statistic == 2.0 and z.reject
    z = z_test(_fit(0.0, 0.5))
    assert z.statistic == 0.0 and not z.reject


def test_z_requires_convergence():
    with pytest.raises(FitError):
        z_test(_fit(1.0, 0.5, ok=False))


def test_lr_close_to_z_squared():
    d = StudyDesign(400, 201)
    iv = InterventionSpec("step", 201)
    checked = 0
    for s in range(10):
        y = simulate_sia(AR5, "step", d, 0.5, rng(200 + s))
        z = z_test(fit_sia(y, AR5, iv)).statistic
        if abs(z) < 3:
            lr = lr_test(y, AR5, iv).statistic
            assert abs(lr - z * z) <= 0.15 * z * z
            checked += 1
    assert checked >= 3


def test_lr_nonnegative_and_white_noise_f():
    y = simulate(ArimaSpec(), 60, 7)
    t = lr_test(y, Structure(), InterventionSpec("step", 31))
    X0 = np.ones((60, 1))
    X1 = np.column_stack([X0, series("step", 31, 60)])
    rss0 = np.sum((y - y.mean()) ** 2)
    rss1 = np.sum((y - X1 @ np.linalg.lstsq(X1, y, rcond=None)[0]) ** 2)
    assert t.statistic == pytest.approx(60 * np.log(rss0 / rss1), abs=1e-8)


def test_q_white_noise():
    y = simulate(ArimaSpec(sigma_a2=2.0), 40, 8)
    q, df = q_statistic(y, ArimaSpec(sigma_a2=2.0), 31)
    assert df == 10
    assert q == pytest.approx(np.sum(y[30:] ** 2) / 2.0)


def test_q_ar1_is_innovations():
    m = AR5.with_(xi=1.0)
    y = simulate(m, 40, 9)
    q, df = q_statistic(y, m, 21)
    e = (y[1:] - 1.0) - 0.5 * (y[:-1] - 1.0)
    assert q == pytest.approx(np.sum(e[19:] ** 2))


def test_q_null_mean():
    m = ArimaSpec.ima1(0.5)
    qs = [q_statistic(simulate(m, 60, s), m, 41)[0] for s in range(2000)]
    # chi2 with 20 df: mean 20, sd of the mean sqrt(40/2000)
    assert abs(np.mean(qs) - 20) < 4 * np.sqrt(40 / 2000)


@pytest.mark.slow
def test_omega_hat_unbiased_and_sd():
    est = []
    for s in range(1000):
        y = simulate_sia(AR5, "step", D50, 0.0, rng(10_000 + s))
        est.append(fit_sia(y, AR5, IV25).omega)
    est = np.array(est)
    sd = est.std(ddof=1)
    assert abs(est.mean()) < 3 * sd / np.sqrt(est.size)
    assert sd == pytest.approx(0.526681, rel=0.10)
    assert sd == pytest.approx(sigma_omega(exact_info(AR5, "step", D50)), rel=0.10)
