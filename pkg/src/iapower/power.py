"""Power functions, sample-size and detection-limit solvers, Q-test power."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import chdtri, gammainc, gammaincc, gammaln, ndtr, ndtri, pdtr, pdtrc

from .arima import ArimaSpec, _require_valid, acvf, pi_weights, stationary_sigma
from .information import info, limiting_sigma_omega, sigma_omega
from .intervention import Kind, Sided, StudyDesign

__all__ = [
    "NoSolutionError",
    "PowerCurve",
    "power_delta",
    "power_omega",
    "power",
    "power_curve",
    "sample_size",
    "detection_limit_approx",
    "detection_limit_exact",
    "qtest_noncentrality",
    "qtest_power",
    "noncentral_chisq_cdf",
    "noncentral_chisq_sf",
]

MAX_M = 10**6
POISSON_TAIL = 1e-12


class NoSolutionError(ValueError):
    """The target power cannot be reached; ``limiting_power`` is the supremum."""

    def __init__(self, message: str, limiting_power: float):
        super().__init__(message)
        self.limiting_power = float(limiting_power)


def _z(alpha: float, sided: Sided) -> float:
    a = alpha / 2 if Sided(sided) is Sided.TWO_SIDED else alpha
    return float(-ndtri(a))


def power_delta(delta, sigma: float, sigma_omega: float, alpha: float = 0.05, sided="two_sided"):
    """Normal-theory power at scaled effect ``delta = omega / sigma``.

    Two-sided: ``Phi(-z - lam) + 1 - Phi(z - lam)`` with
    ``lam = delta * sigma / sigma_omega`` and ``z = z_{1-alpha/2}``.
    One-sided tests use ``z_{1-alpha}`` and one tail.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not (sigma > 0 and sigma_omega > 0):
        raise ValueError("sigma and sigma_omega must be positive")
    sided = Sided(sided)
    lam = np.asarray(delta, dtype=float) * (sigma / sigma_omega)
    z = _z(alpha, sided)
    if sided is Sided.TWO_SIDED:
        out = ndtr(-z - lam) + ndtr(lam - z)
    elif sided is Sided.UPPER:
        out = ndtr(lam - z)
    else:
        out = ndtr(-z - lam)
    return float(out) if np.ndim(out) == 0 else out


def power(model: ArimaSpec, iv, design: StudyDesign, delta, method: str = "exact"):
    """Power at scaled effect(s) ``delta`` for the given model and design."""
    so = sigma_omega(info(model, iv, design, method))
    return power_delta(delta, stationary_sigma(model), so, design.alpha, design.sided)


def power_omega(omega, model: ArimaSpec, iv, design: StudyDesign, method: str = "exact"):
    """Power at effect(s) ``omega`` in response units: ``Pi(omega / sigma)``."""
    sigma = stationary_sigma(model)
    return power(model, iv, design, np.asarray(omega, dtype=float) / sigma, method)


@dataclass
class PowerCurve:
    """Grid of (effect, power) pairs with the design that produced it."""

    scale: str
    effects: np.ndarray
    powers: np.ndarray
    design: StudyDesign
    model: str = ""
    extra: dict = field(default_factory=dict)

    COLUMNS = ("scale", "effect", "power")

    def __post_init__(self):
        if self.scale not in ("delta", "omega"):
            raise ValueError("scale must be 'delta' or 'omega'")
        self.effects = np.atleast_1d(np.asarray(self.effects, dtype=float))
        self.powers = np.atleast_1d(np.asarray(self.powers, dtype=float))
        if self.effects.shape != self.powers.shape:
            raise ValueError("effects and powers differ in length")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.effects.tolist(), self.powers.tolist()))

    def design_dict(self) -> dict:
        d = self.design
        return {
            "n": d.n,
            "T": d.T,
            "b": d.b,
            "mean_known": d.mean_known,
            "alpha": d.alpha,
            "sided": d.sided.value,
        }

    def to_csv(self, precision: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for e, p in self.points:
            w.writerow([self.scale, f"{e:.{precision}f}", f"{p:.{precision}f}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, design: StudyDesign, model: str = "") -> "PowerCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty power-curve CSV")
        scales = {r["scale"] for r in rows}
        if len(scales) != 1:
            raise ValueError("mixed scales in power-curve CSV")
        return cls(
            scales.pop(),
            [float(r["effect"]) for r in rows],
            [float(r["power"]) for r in rows],
            design,
            model,
        )

    def to_json(self, precision: int = 6) -> str:
        obj = {
            "design": self.design_dict(),
            "model": self.model,
            "scale": self.scale,
            "points": [
                {"effect": round(e, precision), "power": round(p, precision)} for e, p in self.points
            ],
        }
        obj.update(self.extra)
        return json.dumps(obj, indent=2)


def power_curve(
    model: ArimaSpec,
    iv,
    design: StudyDesign,
    deltas: Optional[Sequence[float]] = None,
    omegas: Optional[Sequence[float]] = None,
    method: str = "exact",
) -> PowerCurve:
    """Power over a grid of ``deltas`` or ``omegas`` (exactly one of them)."""
    if (deltas is None) == (omegas is None):
        raise ValueError("give exactly one of deltas or omegas")
    so = sigma_omega(info(model, iv, design, method))
    sigma = stationary_sigma(model)
    if deltas is not None:
        eff = np.asarray(deltas, dtype=float)
        pw = power_delta(eff, sigma, so, design.alpha, design.sided)
        scale = "delta"
    else:
        eff = np.asarray(omegas, dtype=float)
        pw = power_delta(eff / sigma, sigma, so, design.alpha, design.sided)
        scale = "omega"
    extra = {"sigma": sigma, "sigma_omega": so, "method": method}
    return PowerCurve(scale, eff, np.atleast_1d(pw), design, model.describe(), extra)


def sample_size(
    delta0: float,
    alpha0: float,
    target: float,
    T: int,
    model: ArimaSpec,
    kind="step",
    mean_known: bool = False,
    sided="two_sided",
    method: str = "exact",
    b: int = 0,
    max_m: int = MAX_M,
) -> int:
    """Smallest number ``m`` of post-onset observations reaching ``target``.

    With the mean estimated the series has ``n = T + m - 1`` observations
    and onset ``T``.  With the mean known the onset is moved to the start of
    the series (``T = 1``, ``n = m``) and the argument ``T`` is ignored.

    Raises:
        NoSolutionError: the power never reaches ``target``; the exception
            carries the limiting power.
    """
    if not 0 < target < 1:
        raise ValueError("target must lie in (0, 1)")
    if mean_known:
        T = 1
    sigma = stationary_sigma(model)

    def pw(m: int) -> float:
        d = StudyDesign(T + m - 1 + b, T, b, mean_known, alpha0, sided)
        try:
            so = sigma_omega(info(model, kind, d, method))
        except (np.linalg.LinAlgError, ValueError):
            return 0.0  # too few observations to estimate the model
        return power_delta(delta0, sigma, so, alpha0, sided)

    if not mean_known and Kind(kind) is Kind.STEP and model.d == 0 and model.short_memory:
        lim_method = "pierce" if method in ("pierce", "closed") else "exact"
        lim = power_delta(delta0, sigma, limiting_sigma_omega(model, T, lim_method), alpha0, sided)
        if lim < target:
            raise NoSolutionError(
                f"target power {target} is unreachable; limiting power is {lim:.6f}", lim
            )
    lo, hi = 0, 1
    p_prev = None
    while True:
        p = pw(hi)
        if p >= target:
            break
        if hi >= max_m or (p_prev is not None and p > 0 and abs(p - p_prev) < 1e-12):
            raise NoSolutionError(
                f"target power {target} not reached by m={hi}; power there is {p:.6f}", p
            )
        p_prev = p
        lo, hi = hi, min(2 * hi, max_m)
    # invariant: pw(lo) < target <= pw(hi) (lo = 0 means "no data")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pw(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def detection_limit_approx(model: ArimaSpec, T: int) -> float:
    """Rule-of-thumb detection limit ``3.3 * sqrt(gamma_delta / T)``.

    ``gamma_delta = sum_k gamma_k / gamma_0`` over all integer lags, which
    for an ARMA model equals ``sigma_a2 theta(1)^2 / (phi(1)^2 gamma_0)``.
    """
    _require_valid(model)
    if model.d or not model.short_memory:
        raise ValueError("the detection limit needs a stationary short-memory model")
    if T < 1:
        raise ValueError("T must be positive")
    g0 = acvf(model, 0)[0]
    gd = model.sigma_a2 * model.ma_poly.sum() ** 2 / (model.ar_poly.sum() ** 2 * g0)
    return float(3.3 * math.sqrt(gd / T))


def detection_limit_exact(
    model: ArimaSpec,
    T: int,
    alpha: float = 0.05,
    target: float = 0.9,
    method: str = "exact",
    sided="two_sided",
    tol: float = 1e-4,
) -> float:
    """Scaled effect detected with probability ``target`` as ``n -> inf``.

    Solves ``Pi(delta) = target`` by bisection, using the analytic limit
    of ``sigma_omega`` for a step with estimated mean.
    """
    if not 0 < target < 1:
        raise ValueError("target must lie in (0, 1)")
    so = limiting_sigma_omega(model, T, method)
    sigma = stationary_sigma(model)
    if target <= power_delta(0.0, sigma, so, alpha, sided) + 1e-12:
        return 0.0
    f = lambda dl: power_delta(dl, sigma, so, alpha, sided) - target  # noqa: E731
    lo, hi = 0.0, 100.0
    if f(hi) < 0:
        raise NoSolutionError("no detection limit below delta = 100", f(hi) + target)
    while hi - lo > tol / 4:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _poisson_range(lam: float) -> np.ndarray:
    """Indices carrying all but ``POISSON_TAIL`` of the Poisson(lam) mass."""
    j0 = int(math.floor(lam))
    k = int(10 + 10 * math.sqrt(lam))
    while True:
        lo, hi = max(0, j0 - k), j0 + k
        below = pdtr(lo - 1, lam) if lo > 0 else 0.0
        if below + pdtrc(hi, lam) < POISSON_TAIL:
            return np.arange(lo, hi + 1)
        k *= 2


def _poisson_weights(j: np.ndarray, lam: float) -> np.ndarray:
    if lam == 0:
        return (j == 0).astype(float)
    return np.exp(j * math.log(lam) - lam - gammaln(j + 1))


def noncentral_chisq_cdf(x: float, df: float, nc: float) -> float:
    """CDF of the noncentral chi-square by its Poisson mixture of central laws."""
    if df <= 0 or nc < 0:
        raise ValueError("need df > 0 and nc >= 0")
    if x <= 0:
        return 0.0
    lam = nc / 2
    j = _poisson_range(lam)
    return float(np.clip(_poisson_weights(j, lam) @ gammainc(df / 2 + j, x / 2), 0, 1))


def noncentral_chisq_sf(x: float, df: float, nc: float) -> float:
    """Upper tail of the noncentral chi-square, summed directly for accuracy."""
    if df <= 0 or nc < 0:
        raise ValueError("need df > 0 and nc >= 0")
    if x <= 0:
        return 1.0
    lam = nc / 2
    j = _poisson_range(lam)
    return float(np.clip(_poisson_weights(j, lam) @ gammaincc(df / 2 + j, x / 2), 0, 1))


def qtest_noncentrality(model: ArimaSpec, omega: float, m: int) -> float:
    """``nu = (omega^2 / sigma_a2) * || 1_m' Pi ||^2`` for a step.

    ``Pi`` is the lower-triangular Toeplitz matrix of the pi-weights of
    ``(1-B)^d phi(B) / theta(B)``; its column sums are partial sums of the
    weights.
    """
    if m < 1:
        raise ValueError("need at least one post-onset observation")
    cs = np.cumsum(pi_weights(model, m, include_d=True))
    return float(omega**2 / model.sigma_a2 * (cs @ cs))


def qtest_power(model: ArimaSpec, omega: float, design: StudyDesign) -> float:
    """Power of the forecast-actuality Q test against a step of size ``omega``.

    Rejects for large ``Q`` only: ``P(chi2_m(nu) > chi2_{m, 1-alpha})``.
    """
    m = design.n - design.onset + 1
    if m < 1:
        raise ValueError(f"no post-onset observations (n={design.n}, onset={design.onset})")
    nu = qtest_noncentrality(model, omega, m)
    crit = float(chdtri(m, design.alpha))
    return noncentral_chisq_sf(crit, m, nu)
