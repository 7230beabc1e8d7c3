"""ARIMA and fractional ARIMA error models.

Sign convention (Box-Jenkins)::

    phi(B) = 1 - phi_1 B - ... - phi_p B^p
    theta(B) = 1 - theta_1 B - ... - theta_q B^q

    phi(B) (1 - B)^f (1 - B)^d (z_t - ...) = theta(B) a_t,  a_t ~ N(0, sigma_a2)

All second-order quantities (``acvf``, ``stationary_sigma``) refer to the
stationary component obtained after integer differencing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.signal import lfilter
from scipy.special import gammaln

from .toeplitz import SymToeplitz, _predictors

__all__ = [
    "ArimaSpec",
    "InvalidModelError",
    "NoAdmissibleParameterError",
    "ValidationResult",
    "validate",
    "psi_weights",
    "pi_weights",
    "acvf",
    "stationary_sigma",
    "simulate",
    "arma11_match_fractional",
    "fractional_acf",
]

ROOT_TOL = 1e-8
# relative size below which ARMA autocovariances are dropped from the
# fractional convolution kernel
KERNEL_TOL = 1e-14
MAX_KERNEL = 200_000


class InvalidModelError(ValueError):
    """The model violates a stationarity, invertibility or range condition."""


class NoAdmissibleParameterError(ValueError):
    """No parameter value inside the admissible region solves the problem."""


@dataclass(frozen=True)
class ArimaSpec:
    """Pre-intervention error model.

    Attributes:
        ar: AR coefficients ``phi_1..phi_p``.
        ma: MA coefficients ``theta_1..theta_q`` (Box-Jenkins sign).
        d: integer differencing order.
        f: fractional differencing parameter in (-0.5, 0.5).
        sigma_a2: innovation variance.
        xi: constant term, on the differenced scale when ``d > 0``.
    """

    ar: tuple = ()
    ma: tuple = ()
    d: int = 0
    f: float = 0.0
    sigma_a2: float = 1.0
    xi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(x) for x in np.atleast_1d(self.ar)))
        object.__setattr__(self, "ma", tuple(float(x) for x in np.atleast_1d(self.ma)))
        object.__setattr__(self, "f", float(self.f))
        object.__setattr__(self, "sigma_a2", float(self.sigma_a2))
        object.__setattr__(self, "xi", float(self.xi))
        if int(self.d) != self.d:
            raise InvalidModelError(f"d must be an integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))

    @classmethod
    def white_noise(cls, sigma_a2: float = 1.0) -> "ArimaSpec":
        return cls(sigma_a2=sigma_a2)

    @classmethod
    def ar1(cls, phi: float, sigma_a2: float = 1.0) -> "ArimaSpec":
        return cls(ar=(phi,), sigma_a2=sigma_a2)

    @classmethod
    def ima1(cls, theta: float, sigma_a2: float = 1.0) -> "ArimaSpec":
        return cls(ma=(theta,), d=1, sigma_a2=sigma_a2)

    @classmethod
    def fractional(cls, f: float, sigma_a2: float = 1.0) -> "ArimaSpec":
        return cls(f=f, sigma_a2=sigma_a2)

    @property
    def p(self) -> int:
        return len(self.ar)

    @property
    def q(self) -> int:
        return len(self.ma)

    @property
    def ar_poly(self) -> np.ndarray:
        """Coefficients of phi(B) in increasing powers of B."""
        return np.r_[1.0, -np.asarray(self.ar, dtype=float)]

    @property
    def ma_poly(self) -> np.ndarray:
        """Coefficients of theta(B) in increasing powers of B."""
        return np.r_[1.0, -np.asarray(self.ma, dtype=float)]

    @property
    def short_memory(self) -> bool:
        return self.f == 0.0

    def with_(self, **changes) -> "ArimaSpec":
        from dataclasses import replace

        return replace(self, **changes)

    def describe(self) -> str:
        parts = []
        if self.ar:
            parts.append("ar=" + ",".join(f"{x:g}" for x in self.ar))
        if self.ma:
            parts.append("ma=" + ",".join(f"{x:g}" for x in self.ma))
        if self.d:
            parts.append(f"d={self.d}")
        if self.f:
            parts.append(f"f={self.f:g}")
        parts.append(f"sigma_a2={self.sigma_a2:g}")
        return "ARFIMA(" + "; ".join(parts) + ")"


class ValidationResult(NamedTuple):
    ok: bool
    violations: tuple

    def __bool__(self) -> bool:
        return self.ok


def _roots(poly_increasing: np.ndarray) -> np.ndarray:
    c = np.asarray(poly_increasing, dtype=float)
    # coefficients this small put roots beyond any tolerance; drop them
    c = np.trim_zeros(np.where(np.abs(c) < 1e-300, 0.0, c), "b")
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c[::-1])


def validate(spec: ArimaSpec, tol: float = ROOT_TOL) -> ValidationResult:
    """Check stationarity, invertibility, coprimality and parameter ranges.

    Never raises; returns the list of violated conditions.
    """
    bad = []
    if spec.d < 0:
        bad.append(f"d={spec.d} must be nonnegative")
    if not abs(spec.f) < 0.5:
        bad.append(f"|f|={abs(spec.f):g} must be below 0.5")
    if not spec.sigma_a2 > 0:
        bad.append(f"sigma_a2={spec.sigma_a2:g} must be positive")
    if not all(np.isfinite(spec.ar + spec.ma + (spec.f, spec.sigma_a2, spec.xi))):
        bad.append("parameters must be finite")
        return ValidationResult(False, tuple(bad))
    ar_r = _roots(spec.ar_poly)
    ma_r = _roots(spec.ma_poly)
    if np.any(np.abs(ar_r) - 1 <= tol):
        bad.append("AR polynomial has a root on or inside the unit circle (not stationary)")
    if np.any(np.abs(ma_r) - 1 <= tol):
        bad.append("MA polynomial has a root on or inside the unit circle (not invertible)")
    if ar_r.size and ma_r.size:
        dist = np.abs(ar_r[:, None] - ma_r[None, :]).min()
        if dist <= tol:
            bad.append("AR and MA polynomials share a common root")
    return ValidationResult(not bad, tuple(bad))


def _require_valid(spec: ArimaSpec) -> None:
    res = validate(spec)
    if not res.ok:
        raise InvalidModelError("; ".join(res.violations))


def _frac_weights(f: float, count: int) -> np.ndarray:
    """Coefficients of (1 - B)^{-f}: w_k = w_{k-1} (k - 1 + f) / k."""
    k = np.arange(1, count)
    return np.cumprod(np.r_[1.0, (k - 1 + f) / k])


def psi_weights(spec: ArimaSpec, count: int, include_d: bool = False) -> np.ndarray:
    """MA(infinity) coefficients of theta(B) / (phi(B) (1-B)^f).

    With ``include_d`` the expansion also includes (1-B)^{-d}.
    """
    _require_valid(spec)
    if count < 1:
        raise ValueError("count must be positive")
    imp = np.zeros(count)
    imp[0] = 1.0
    psi = lfilter(spec.ma_poly, spec.ar_poly, imp)
    if spec.f:
        psi = np.convolve(psi, _frac_weights(spec.f, count))[:count]
    if include_d:
        for _ in range(spec.d):
            psi = np.cumsum(psi)
    return psi


def pi_weights(spec: ArimaSpec, count: int, include_d: bool = True) -> np.ndarray:
    """AR(infinity) coefficients of phi(B) (1-B)^f (1-B)^d / theta(B).

    ``pi_0 = 1`` and ``a_t = sum_k pi_k z_{t-k}``.  The integer difference
    is included only when ``include_d`` is set.
    """
    _require_valid(spec)
    if count < 1:
        raise ValueError("count must be positive")
    imp = np.zeros(count)
    imp[0] = 1.0
    pi = lfilter(spec.ar_poly, spec.ma_poly, imp)
    if spec.f:
        pi = np.convolve(pi, _frac_weights(-spec.f, count))[:count]
    if include_d:
        for _ in range(spec.d):
            pi = np.r_[pi[0], np.diff(pi)]
    return pi


def _arma_acvf(ar: np.ndarray, ma: np.ndarray, sigma_a2: float, max_lag: int) -> np.ndarray:
    """Exact ARMA autocovariances from the linear equations for gamma_0..gamma_m."""
    p, q = ar.size, ma.size
    th = np.r_[1.0, -ma]
    imp = np.zeros(q + 1)
    imp[0] = 1.0
    psi = lfilter(th, np.r_[1.0, -ar], imp)
    # rhs_k = sigma^2 sum_{j=k}^q th_j psi_{j-k}
    rhs = np.array([th[k:] @ psi[: q + 1 - k] for k in range(q + 1)]) * sigma_a2
    m = max(p, q)
    A = np.eye(m + 1)
    for k in range(m + 1):
        for j in range(1, p + 1):
            A[k, abs(k - j)] -= ar[j - 1]
    b = np.zeros(m + 1)
    b[: q + 1] = rhs[: m + 1]
    g = np.linalg.solve(A, b)
    out = np.zeros(max(max_lag, m) + 1)
    out[: m + 1] = g
    for k in range(m + 1, out.size):
        out[k] = ar @ out[k - p : k][::-1] if p else 0.0
    return out[: max_lag + 1]


def fractional_acf(f: float, max_lag: int) -> np.ndarray:
    """Autocorrelations of fractional noise: rho_k = rho_{k-1} (k-1+f)/(k-f)."""
    k = np.arange(1, max_lag + 1)
    return np.cumprod(np.r_[1.0, (k - 1 + f) / (k - f)])


def _frac_gamma0(f: float, sigma_a2: float) -> float:
    return sigma_a2 * float(np.exp(gammaln(1 - 2 * f) - 2 * gammaln(1 - f)))


def acvf(spec: ArimaSpec, max_lag: int) -> np.ndarray:
    """Autocovariances gamma_0..gamma_max_lag of the stationary component."""
    _require_valid(spec)
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    ar = np.asarray(spec.ar)
    ma = np.asarray(spec.ma)
    if not spec.f:
        return _arma_acvf(ar, ma, spec.sigma_a2, max_lag)
    g0 = _frac_gamma0(spec.f, spec.sigma_a2)
    if not spec.ar and not spec.ma:
        return g0 * fractional_acf(spec.f, max_lag)
    # gamma_k = sum_h c_h gamma^F_{k-h}, c = ARMA acvf with unit innovations
    H = 64
    while True:
        c = _arma_acvf(ar, ma, 1.0, H)
        if abs(c[-1]) < KERNEL_TOL * c[0] or H >= MAX_KERNEL:
            break
        H *= 2
    keep = np.nonzero(np.abs(c) >= KERNEL_TOL * c[0])[0]
    H = int(keep[-1]) if keep.size else 0
    c = c[: H + 1]
    gf = g0 * fractional_acf(spec.f, max_lag + H)
    two_sided = np.r_[c[:0:-1], c]  # lags -H..H
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        idx = np.abs(k - np.arange(-H, H + 1))
        out[k] = two_sided @ gf[idx]
    return out


def stationary_sigma(spec: ArimaSpec) -> float:
    """Standard deviation of the stationary (differenced) error component."""
    return float(np.sqrt(acvf(spec, 0)[0]))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def simulate(spec: ArimaSpec, n: int, seed=None) -> np.ndarray:
    """Exact Gaussian realization of length ``n`` of the error process.

    The stationary part is drawn from its exact joint law via the
    Durbin-Levinson one-step predictors, the constant ``xi`` is added, and
    the result is cumulatively summed ``d`` times (zero pre-sample values).

    Args:
        spec: the model.
        n: series length.
        seed: anything accepted by ``numpy.random.default_rng``, or a
            Generator.
    """
    _require_valid(spec)
    if n < 1:
        raise ValueError("n must be positive")
    rng = _rng(seed)
    g = acvf(spec, n - 1)
    eps = rng.standard_normal(n)
    x = np.empty(n)
    # short-memory predictors reach their steady state geometrically fast
    steady = 1e-15 if spec.short_memory else 0.0
    window = 2 * (spec.q + 1) + 2
    for t, (a, v) in enumerate(_predictors(SymToeplitz(g).first_row, steady, window)):
        L = a.size
        mean = a @ x[t - L : t][::-1] if L else 0.0
        x[t] = mean + np.sqrt(v) * eps[t]
    z = x + spec.xi
    for _ in range(spec.d):
        z = np.cumsum(z)
    return z


def _arma11_rho(phi: float, theta: float) -> float:
    return (1 - phi * theta) * (phi - theta) / (1 + theta * theta - 2 * phi * theta)


def arma11_match_fractional(f: float) -> tuple[float, float]:
    """ARMA(1,1) ``(phi_1, theta_1)`` sharing the first two autocorrelations
    of fractional noise with parameter ``f``.

    Raises:
        ValueError: ``f`` outside (0, 0.5).
        NoAdmissibleParameterError: no invertible ``theta_1`` exists.
    """
    if not 0 < f < 0.5:
        raise ValueError(f"f must lie in (0, 0.5), got {f!r}")
    r1 = f / (1 - f)
    r2 = r1 * (1 + f) / (2 - f)
    phi = r2 / r1
    eps = 1e-12
    lo, hi = -1 + eps, phi - eps
    h = lambda th: _arma11_rho(phi, th) - r1  # noqa: E731
    if not h(lo) * h(hi) < 0:
        raise NoAdmissibleParameterError(f"no invertible theta_1 matches f={f!r}")
    theta = brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(phi), float(theta)
