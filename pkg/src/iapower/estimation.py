"""Exact Gaussian maximum likelihood for the intervention model, and tests.

For fixed time-series parameters ``lambda2 = (phi, theta, f)`` the
regression coefficients are obtained by generalized least squares and the
innovation variance is profiled out, so only ``lambda2`` is searched
numerically.  The likelihood is evaluated on the ``n - d`` differenced
observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, solve_triangular, toeplitz
from scipy.optimize import minimize
from scipy.special import chdtri, ndtri

from .arima import ArimaSpec, _require_valid, acvf
from .intervention import InterventionSpec, StudyDesign, difference, regressor_matrix

__all__ = [
    "Structure",
    "FitResult",
    "FitError",
    "fit_sia",
    "z_test",
    "lr_test",
    "q_statistic",
    "profile_loglik",
]

MAX_ITER = 500
BOUNDARY = 0.999


class FitError(RuntimeError):
    """The likelihood could not be maximized."""


class Structure(NamedTuple):
    """Model shape to be fitted: orders and whether ``f`` is estimated."""

    p: int = 0
    d: int = 0
    q: int = 0
    fractional: bool = False

    @classmethod
    def of(cls, spec) -> "Structure":
        if isinstance(spec, Structure):
            return spec
        if isinstance(spec, ArimaSpec):
            return cls(spec.p, spec.d, spec.q, spec.f != 0)
        return cls(*spec)

    @property
    def dim(self) -> int:
        return self.p + self.q + int(self.fractional)


@dataclass
class FitResult:
    """Maximum-likelihood fit of the intervention model."""

    xi: Optional[float]
    omega: Optional[float]
    ar: tuple
    ma: tuple
    f: float
    sigma_a2: float
    se_xi: Optional[float]
    se_omega: Optional[float]
    loglik: float
    converged: bool
    iterations: int
    at_boundary: bool = False
    nobs: int = 0
    message: str = ""

    def model(self, d: int = 0) -> ArimaSpec:
        return ArimaSpec(self.ar, self.ma, d, self.f, self.sigma_a2, self.xi or 0.0)


def _pacf_to_coef(r: np.ndarray) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    a = np.zeros(0)
    for rk in r:
        a = np.r_[a - rk * a[::-1], rk]
    return a


def _coef_to_pacf(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float).copy()
    r = np.zeros(a.size)
    for k in range(a.size - 1, -1, -1):
        rk = a[k]
        r[k] = rk
        if k:
            a = (a[:k] + rk * a[:k][::-1]) / (1 - rk * rk)
    return r


def _unpack(x: np.ndarray, st: Structure):
    x = np.asarray(x, dtype=float)
    rp = np.tanh(x[: st.p])
    rq = np.tanh(x[st.p : st.p + st.q])
    f = 0.5 * math.tanh(x[st.p + st.q]) if st.fractional else 0.0
    return _pacf_to_coef(rp), _pacf_to_coef(rq), f, np.r_[rp, rq]


def _pack(ar, ma, f, st: Structure) -> np.ndarray:
    def at(r):
        return np.arctanh(np.clip(r, -0.995, 0.995))

    x = np.r_[at(_coef_to_pacf(ar)), at(_coef_to_pacf(ma))]
    if st.fractional:
        x = np.r_[x, np.arctanh(np.clip(2 * f, -0.99, 0.99))]
    return x


class _Profile(NamedTuple):
    loglik: float
    beta: np.ndarray
    sigma2: float
    WJ: np.ndarray


def _profile(yd: np.ndarray, J: np.ndarray, ar, ma, f) -> _Profile:
    """Profile loglikelihood over (beta, sigma_a2) at fixed lambda2."""
    N = yd.size
    spec = ArimaSpec(tuple(ar), tuple(ma), 0, f, 1.0)
    g = acvf(spec, N - 1)
    c, _ = cho_factor(toeplitz(g), lower=True, check_finite=False)
    L = np.tril(c)
    Wy = solve_triangular(L, yd, lower=True, check_finite=False)
    if J.shape[1]:
        WJ = solve_triangular(L, J, lower=True, check_finite=False)
        beta, *_ = np.linalg.lstsq(WJ, Wy, rcond=None)
        res = Wy - WJ @ beta
    else:
        WJ = J
        beta = np.zeros(0)
        res = Wy
    S = float(res @ res)
    if not S > 1e-20 * float(Wy @ Wy) + 1e-300:
        raise FitError("residual sum of squares is zero; the series is degenerate")
    s2 = S / N
    ll = -0.5 * N * math.log(s2) - float(np.sum(np.log(np.diag(L)))) - 0.5 * N
    return _Profile(ll, beta, s2, WJ)


def profile_loglik(y, structure, iv: InterventionSpec, mean_known: bool, ar=(), ma=(), f=0.0) -> float:
    """Profile loglikelihood of the data at given time-series parameters."""
    st = Structure.of(structure)
    yd, J = _prepare(y, st, iv, mean_known)
    return _profile(yd, J, np.asarray(ar, float), np.asarray(ma, float), f).loglik


def _prepare(y, st: Structure, iv: Optional[InterventionSpec], mean_known: bool, with_iv: bool = True):
    y = np.asarray(y, dtype=float)
    n = y.size
    if n <= st.p + st.q + 3 + st.d:
        raise ValueError(f"series of length {n} is too short for the structure {tuple(st)}")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    yd = difference(y, st.d)[st.d :]
    if iv is None or iv.T is None:
        raise ValueError("the intervention must carry its onset T")
    design = StudyDesign(n, iv.T, iv.b or 0, mean_known)
    J = regressor_matrix(iv, design, st.d, drop_presample=True)
    if not with_iv:
        J = J[:, :0] if mean_known else J[:, :1]
    return yd, J


def _fit(yd, J, st: Structure, starts: Sequence[np.ndarray] = ()) -> tuple:
    def negll(x):
        ar, ma, f, _ = _unpack(x, st)
        try:
            return -_profile(yd, J, ar, ma, f).loglik
        except (LinAlgError, np.linalg.LinAlgError, ValueError, FitError):
            return 1e300

    if st.dim == 0:
        return np.zeros(0), True, 0, ""
    cands = [np.asarray(s, dtype=float) for s in starts]
    if st.dim == 1:
        cands += [np.array([u]) for u in np.linspace(-2.5, 2.5, 11)]
    else:
        cands.append(np.zeros(st.dim))
        for k in range(st.dim):
            for u in (-1.0, 1.0):
                e = np.zeros(st.dim)
                e[k] = u
                cands.append(e)
    vals = [negll(c) for c in cands]
    x0 = cands[int(np.argmin(vals))]
    if not np.isfinite(min(vals)) or min(vals) >= 1e300:
        raise FitError("loglikelihood is undefined at every starting point")
    res = minimize(
        negll,
        x0,
        method="Nelder-Mead",
        options={"maxiter": MAX_ITER, "xatol": 1e-7, "fatol": 1e-10, "initial_simplex": _simplex(x0)},
    )
    return res.x, bool(res.success), int(res.nit), str(res.message)


def _simplex(x0: np.ndarray) -> np.ndarray:
    k = x0.size
    S = np.tile(x0, (k + 1, 1))
    S[1:] += 0.3 * np.eye(k)
    return S


def fit_sia(
    y,
    structure,
    iv: InterventionSpec,
    mean_known: bool = False,
    starts: Sequence[np.ndarray] = (),
) -> FitResult:
    """Exact maximum-likelihood fit of the intervention model.

    Args:
        y: observed series ``z_1..z_n``.
        structure: an :class:`ArimaSpec` (only its shape is used), a
            :class:`Structure`, or a ``(p, d, q, fractional)`` tuple.
        iv: intervention with its onset ``T`` (and delay ``b``).
        mean_known: if true the constant is fixed at zero.
        starts: extra starting points in the optimizer's unconstrained
            coordinates.
    """
    st = Structure.of(structure)
    yd, J = _prepare(y, st, iv, mean_known)
    x, ok, nit, msg = _fit(yd, J, st, starts)
    return _result(yd, J, st, x, ok, nit, msg, mean_known, has_iv=True)


def _result(yd, J, st, x, ok, nit, msg, mean_known, has_iv) -> FitResult:
    ar, ma, f, pac = _unpack(x, st)
    pr = _profile(yd, J, ar, ma, f)
    boundary = bool(np.any(np.abs(pac) > BOUNDARY) or abs(f) > 0.5 * BOUNDARY)
    if J.shape[1]:
        cov = pr.sigma2 * np.linalg.inv(pr.WJ.T @ pr.WJ)
        se_all = np.sqrt(np.diag(cov))
    beta = list(pr.beta)
    if mean_known:
        xi, se_xi = None, None
        omega = beta[0] if has_iv else None
        se_om = float(se_all[0]) if has_iv else None
    else:
        xi, se_xi = float(beta[0]), float(se_all[0])
        omega = float(beta[1]) if has_iv else None
        se_om = float(se_all[1]) if has_iv else None
    return FitResult(
        xi=xi,
        omega=None if omega is None else float(omega),
        ar=tuple(float(a) for a in ar),
        ma=tuple(float(m) for m in ma),
        f=float(f),
        sigma_a2=pr.sigma2,
        se_xi=se_xi,
        se_omega=se_om,
        loglik=pr.loglik,
        converged=ok,
        iterations=nit,
        at_boundary=boundary,
        nobs=yd.size,
        message=msg,
    )


class TestResult(NamedTuple):
    statistic: float
    reject: bool


def z_test(fit: FitResult, alpha: float = 0.05) -> TestResult:
    """``Z = omega_hat / se(omega_hat)``, two-sided at level ``alpha``."""
    if not fit.converged:
        raise FitError(f"fit did not converge ({fit.message})")
    if fit.omega is None or not fit.se_omega:
        raise FitError("fit has no intervention estimate")
    z = fit.omega / fit.se_omega
    return TestResult(float(z), bool(abs(z) > -ndtri(alpha / 2)))


def lr_test(
    y, structure, iv: InterventionSpec, mean_known: bool = False, alpha: float = 0.05
) -> TestResult:
    """Likelihood-ratio test of ``omega = 0`` against chi-square(1)."""
    st = Structure.of(structure)
    yd, J = _prepare(y, st, iv, mean_known)
    J0 = J[:, :0] if mean_known else J[:, :1]
    x0, ok0, n0, m0 = _fit(yd, J0, st)
    null = _result(yd, J0, st, x0, ok0, n0, m0, mean_known, has_iv=False)
    x1, ok1, n1, m1 = _fit(yd, J, st, starts=[x0])
    full = _result(yd, J, st, x1, ok1, n1, m1, mean_known, has_iv=True)
    if not (null.converged and full.converged):
        raise FitError("likelihood-ratio fits did not both converge")
    stat = max(0.0, 2.0 * (full.loglik - null.loglik))
    return TestResult(stat, bool(stat > chdtri(1, alpha)))


def q_statistic(y, model: ArimaSpec, T: int) -> tuple[float, int]:
    """Forecast-actuality statistic ``sum_{t=T}^n a_t^2 / sigma_a2``.

    ``a_t`` are exact one-step prediction errors of the differenced series,
    given the model (including ``xi``) and scaled by their relative
    variances, so that each term is a standard normal square under the null.
    """
    _require_valid(model)
    y = np.asarray(y, dtype=float)
    n = y.size
    d = model.d
    if not d + 1 <= T <= n:
        raise ValueError(f"onset T={T} outside {d + 1}..{n}")
    yd = difference(y, d)[d:] - model.xi
    g = acvf(model, yd.size - 1) / model.sigma_a2
    c, _ = cho_factor(toeplitz(g), lower=True, check_finite=False)
    e = solve_triangular(np.tril(c), yd, lower=True, check_finite=False)
    q = float(np.sum(e[T - 1 - d :] ** 2)) / model.sigma_a2
    return q, n - T + 1
