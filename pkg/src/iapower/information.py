"""Expected information for the regression parameters (xi, omega).

Three routes are available:

* :func:`exact_info` -- ``J' Gamma^{-1} J / sigma_a2`` on the differenced
  scale, with ``Gamma`` the stationary covariance divided by ``sigma_a2``;
* :func:`pierce_info` -- the large-sample approximation built from the
  filtered regressor ``v_t = -phi(B)/theta(B) w_t`` and ``kappa = -phi(1)/theta(1)``;
* :func:`closed_form` -- algebraic expressions of the Pierce entries for
  AR(1) and IMA(1) errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .arima import ArimaSpec, _require_valid, acvf
from .intervention import (
    InterventionSpec,
    Kind,
    StudyDesign,
    _resolve,
    difference,
    regressor_matrix,
    series,
)
from .toeplitz import (
    SymToeplitz,
    levinson_solve,
    quad_form,
    trench_inverse,
    whiten,
)

__all__ = [
    "FisherInfo",
    "SingularInformationError",
    "exact_info",
    "pierce_info",
    "closed_form",
    "info",
    "sigma_omega",
    "limiting_sigma_omega",
    "model_kind",
]

METHODS = ("exact", "pierce", "closed")


class SingularInformationError(np.linalg.LinAlgError):
    """The information matrix is singular; omega is not identifiable."""


@dataclass(frozen=True)
class FisherInfo:
    """Information block for (xi, omega), entries already divided by sigma_a2.

    With ``mean_known`` only ``i22`` is meaningful.
    """

    i11: float
    i12: float
    i22: float
    sigma_a2: float = 1.0
    mean_known: bool = False

    def matrix(self) -> np.ndarray:
        if self.mean_known:
            return np.array([[self.i22]])
        return np.array([[self.i11, self.i12], [self.i12, self.i22]])

    @property
    def det(self) -> float:
        return self.i11 * self.i22 - self.i12**2

    @classmethod
    def from_matrix(cls, M, sigma_a2: float, mean_known: bool) -> "FisherInfo":
        M = np.atleast_2d(M)
        if mean_known:
            return cls(0.0, 0.0, float(M[0, 0]), sigma_a2, True)
        return cls(float(M[0, 0]), float(M[0, 1]), float(M[1, 1]), sigma_a2, False)


def _short_memory_kw(model: ArimaSpec) -> dict:
    # exact to ~1e-15 once the predictor coefficients stop changing
    if model.short_memory:
        return {"steady_tol": 1e-15, "window": 2 * (model.q + 1) + 2}
    return {}


def exact_info(
    model: ArimaSpec, iv, design: StudyDesign, solver: str = "durbin"
) -> FisherInfo:
    """Exact expected information ``J' Gamma^{-1} J / sigma_a2``.

    ``J`` holds the ``n - d`` differenced rows; ``Gamma`` is built from the
    autocovariances of the stationary component.  ``solver`` selects the
    Toeplitz route: ``"durbin"`` (prediction-error whitening, default),
    ``"levinson"`` or ``"trench"``.
    """
    _require_valid(model)
    d = model.d
    if design.n - d < 1:
        raise ValueError(f"n={design.n} leaves no differenced observations for d={d}")
    J = regressor_matrix(iv, design, d, drop_presample=True)
    G = SymToeplitz(acvf(model, design.n - d - 1) / model.sigma_a2)
    if solver == "durbin":
        M = quad_form(G, J, **_short_memory_kw(model))
    elif solver == "levinson":
        M = J.T @ levinson_solve(G, J)
    elif solver == "trench":
        M = J.T @ trench_inverse(G) @ J
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return FisherInfo.from_matrix(np.atleast_2d(M) / model.sigma_a2, model.sigma_a2, design.mean_known)


def _pierce_parts(model: ArimaSpec, kind: Kind, onset: int, n: int):
    if not model.short_memory:
        raise ValueError("the Pierce approximation requires f = 0")
    _require_valid(model)
    d = model.d
    w = difference(series(kind, onset, n), d)[d:].astype(float)
    v = lfilter(-model.ar_poly, model.ma_poly, w)
    kappa = -model.ar_poly.sum() / model.ma_poly.sum()
    return kappa, v


def pierce_info(model: ArimaSpec, iv, design: StudyDesign) -> FisherInfo:
    """Large-sample approximation to the information (short memory only)."""
    kind, onset = _resolve(iv, design)
    if onset > design.n:
        raise ValueError(f"onset T+b={onset} exceeds series length n={design.n}")
    kappa, v = _pierce_parts(model, kind, onset, design.n)
    N = v.size
    s2 = model.sigma_a2
    return FisherInfo(
        N * kappa**2 / s2,
        kappa * v.sum() / s2,
        float(v @ v) / s2,
        s2,
        design.mean_known,
    )


def model_kind(model: ArimaSpec) -> Optional[tuple[str, float]]:
    """``("ar1", phi)`` or ``("ima1", theta)`` when a closed form exists."""
    if model.f:
        return None
    if model.d == 0 and model.q == 0 and model.p <= 1:
        return "ar1", (model.ar[0] if model.p else 0.0)
    if model.d == 1 and model.p == 0 and model.q <= 1:
        return "ima1", (model.ma[0] if model.q else 0.0)
    return None


def _ar1_entries(phi, kind, n, T, printed):
    N = n - T
    om = 1 - phi
    i11 = n * om**2
    if kind is Kind.STEP:
        i12 = N * om**2 + om
        i22 = N * om**2 + 1
    elif kind is Kind.PULSE:
        if printed:
            i12 = i22 = 1 - phi**2
        else:
            i12, i22 = om**2, 1 + phi**2
    else:
        i12 = (1 + N) * om * (2 + N - N * phi) / 2
        i22 = (1 + N) * (
            6 + 7 * n + 2 * n**2 - 7 * T - 4 * n * T + 2 * T**2
            - 8 * n * phi - 4 * n**2 * phi + 8 * T * phi + 8 * n * T * phi - 4 * T**2 * phi
            + n * phi**2 + 2 * n**2 * phi**2 - T * phi**2 - 4 * n * T * phi**2 + 2 * T**2 * phi**2
        ) / 6
    return i11, i12, i22


def _ima1_entries(th, kind, n, T, printed):
    N = n - T
    i11 = (n - 1) / (1 - th) ** 2
    if kind is Kind.STEP:
        i12 = (1 - th ** (N + 1)) / (1 - th) ** 2
        i22 = (1 - th ** (2 * (N + 1))) / (1 - th**2)
    elif kind is Kind.PULSE:
        i12 = th**N / (1 - th)
        if printed:
            i22 = 2 * (1 + th ** (2 * N + 1)) / (1 + th)
        else:
            i22 = (2 - th ** (2 * N) + th ** (2 * N + 1)) / (1 + th)
    else:
        i12 = (N + 1 + th ** (N + 2) - (N + 2) * th) / (1 - th) ** 3
        core = (N + 1) - 2 * th - (N + 2) * th**2
        if printed:
            i22 = (
                2 * th ** (2 + n + T) * (1 + th) - th ** (4 + 2 * n) + th ** (2 * T) * core
            ) / ((1 + th) * (1 - th) ** 3)
        else:
            i22 = (core + 2 * th ** (N + 2) * (1 + th) - th ** (2 * N + 4)) / (
                (1 + th) * (1 - th) ** 3
            )
    return i11, i12, i22


def closed_form(
    model_kind: str,
    param: float,
    kind,
    design: StudyDesign,
    sigma_a2: float = 1.0,
    printed: bool = False,
) -> FisherInfo:
    """Closed-form Pierce information for AR(1) or IMA(1) errors.

    Args:
        model_kind: ``"ar1"`` or ``"ima1"``.
        param: ``phi_1`` or ``theta_1``; powers ``0**0`` are taken as 1.
        kind: intervention kind.
        design: supplies ``n``, the onset ``T + b`` and ``mean_known``.
        sigma_a2: innovation variance dividing every entry.
        printed: use the historically published expressions for the AR(1)
            pulse and IMA(1) pulse/ramp rows, which disagree with the
            filter definition; the default uses forms that agree with it.

    Valid for onsets ``2 <= T+b <= n - 1`` (``T+b >= 3`` for IMA(1)).
    """
    if not -1 < param < 1:
        raise ValueError(f"parameter must lie in (-1, 1), got {param!r}")
    kind = Kind(kind)
    n, T = design.n, design.onset
    if model_kind == "ar1":
        e = _ar1_entries(param, kind, n, T, printed)
    elif model_kind == "ima1":
        e = _ima1_entries(param, kind, n, T, printed)
    else:
        raise ValueError(f"model_kind must be 'ar1' or 'ima1', got {model_kind!r}")
    return FisherInfo(*(float(x) / sigma_a2 for x in e), sigma_a2, design.mean_known)


def info(model: ArimaSpec, iv, design: StudyDesign, method: str = "exact") -> FisherInfo:
    """Dispatch to ``exact_info``, ``pierce_info`` or ``closed_form``."""
    if method == "exact":
        return exact_info(model, iv, design)
    if method == "pierce":
        return pierce_info(model, iv, design)
    if method == "closed":
        mk = model_kind(model)
        if mk is None:
            raise ValueError("closed forms exist only for AR(1) and IMA(1) errors")
        kind, _ = _resolve(iv, design)
        return closed_form(mk[0], mk[1], kind, design, model.sigma_a2)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def sigma_omega(fi: FisherInfo, mean_known: Optional[bool] = None) -> float:
    """Asymptotic standard error of omega-hat.

    ``sqrt(i11 / (i11 i22 - i12^2))``, or ``1/sqrt(i22)`` when the mean is
    known.  ``mean_known`` defaults to the flag stored in ``fi``.
    """
    known = fi.mean_known if mean_known is None else mean_known
    if known:
        if not fi.i22 > 0:
            raise SingularInformationError("i22 must be positive")
        return float(1.0 / np.sqrt(fi.i22))
    det = fi.det
    if not (fi.i11 > 0 and det > 1e-12 * fi.i11 * max(fi.i22, 1e-300)):
        raise SingularInformationError(
            f"information matrix is singular (det={det:.3g}); omega is not identifiable"
        )
    return float(np.sqrt(fi.i11 / det))


def limiting_sigma_omega(
    model: ArimaSpec, T: int, method: str = "exact", tol: float = 1e-14, max_n: int = 10**6
) -> float:
    """Limit of sigma_omega as post-onset data grow, step, mean estimated.

    As ``n -> inf`` the post-onset level is learned exactly, so the
    remaining uncertainty comes from the pre-onset level::

        sigma_inf^{-2} = || whitened pre-onset indicator ||^2 / sigma_a2

    ``method="pierce"`` uses the Pierce filter, for which this equals
    ``((T-1) kappa^2 + sum_{t>=T} (v_t - kappa)^2) / sigma_a2``.
    """
    _require_valid(model)
    if model.d or not model.short_memory:
        raise ValueError("the limit is defined for stationary short-memory models")
    if T < 2:
        raise ValueError("need at least one pre-onset observation (T >= 2)")
    s2 = model.sigma_a2
    if method == "pierce":
        kappa, _ = _pierce_parts(model, Kind.STEP, T, T)
        L = 256
        while True:
            _, v = _pierce_parts(model, Kind.STEP, T, T - 1 + L)
            post = v[T - 1 :] - kappa
            if abs(post[-1]) < tol or L >= max_n:
                break
            L *= 2
        return float(np.sqrt(s2 / ((T - 1) * kappa**2 + post @ post)))
    if method != "exact":
        raise ValueError(f"method must be 'exact' or 'pierce', got {method!r}")
    L = 256
    prev = None
    while True:
        n = T - 1 + L
        x = (np.arange(1, n + 1) < T).astype(float)
        G = SymToeplitz(acvf(model, n - 1) / s2)
        E, v = whiten(G, x, **_short_memory_kw(model))
        val = float(np.sum(E * E / v))
        if (prev is not None and abs(val - prev) <= tol * val) or n >= max_n:
            break
        prev = val
        L *= 2
    return float(np.sqrt(s2 / val))
