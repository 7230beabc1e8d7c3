"""Dynamic (rational transfer-function) interventions.

The response is ``omega(B) / delta(B) B^b I_t`` with
``omega(B) = omega_0 + omega_1 B + ... + omega_r B^r`` and
``delta(B) = 1 - delta_1 B - ... - delta_s B^s``.  The long-run effect of a
step is the steady-state gain ``g = sum(omega) / (1 - sum(delta))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .arima import ArimaSpec, _require_valid, _roots, acvf
from .information import SingularInformationError, _short_memory_kw
from .intervention import InterventionSpec, Kind, StudyDesign, difference, series
from .power import power_delta
from .toeplitz import SymToeplitz, quad_form

__all__ = [
    "DynamicInterventionSpec",
    "dynamic_regressors",
    "dynamic_info",
    "gain",
    "gain_gradient",
    "sigma_gain",
    "gain_test_power",
]


@dataclass(frozen=True)
class DynamicInterventionSpec:
    """Transfer-function intervention.

    Attributes:
        num: ``omega_0..omega_r``.
        den: ``delta_1..delta_s`` (``delta_0`` is fixed at 1).
        kind: shape of the input indicator.
        T, b: onset and delay; ``None`` takes them from the design.
    """

    num: tuple = (1.0,)
    den: tuple = ()
    kind: Kind = Kind.STEP
    T: Optional[int] = None
    b: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "num", tuple(float(x) for x in np.atleast_1d(self.num)))
        object.__setattr__(self, "den", tuple(float(x) for x in np.atleast_1d(self.den)))
        object.__setattr__(self, "kind", Kind(self.kind))
        if not self.num:
            raise ValueError("num needs at least omega_0")

    @property
    def r(self) -> int:
        return len(self.num) - 1

    @property
    def s(self) -> int:
        return len(self.den)

    @property
    def den_poly(self) -> np.ndarray:
        return np.r_[1.0, -np.asarray(self.den)]

    def is_stable(self, tol: float = 1e-8) -> bool:
        return bool(np.all(np.abs(_roots(self.den_poly)) - 1 > tol))

    def as_sia(self) -> InterventionSpec:
        return InterventionSpec(self.kind, self.T, self.b)


def _onset(spec: DynamicInterventionSpec, design: StudyDesign) -> int:
    T = design.T if spec.T is None else spec.T
    b = design.b if spec.b is None else spec.b
    return T + b


def _lag(x: np.ndarray, k: int) -> np.ndarray:
    return np.r_[np.zeros(k), x[: x.size - k]] if k else x


def dynamic_regressors(spec: DynamicInterventionSpec, design: StudyDesign, d: int = 0) -> np.ndarray:
    """Jacobian of the mean function at the given parameters.

    Columns: ones (unless the mean is known), ``u_{t-i} = (1/delta(B)) I_{t-i}``
    for ``i = 0..r`` and ``v_{t-j} = omega(B)/delta(B)^2 I_{t-j}`` for
    ``j = 1..s``, each differenced ``d`` times with zero initial conditions.
    ``n - d`` rows are returned.
    """
    if not spec.is_stable():
        raise ValueError("transfer function denominator has a root on or inside the unit circle")
    onset = _onset(spec, design)
    if onset > design.n:
        raise ValueError(f"onset T+b={onset} exceeds series length n={design.n}")
    I = series(spec.kind, onset, design.n).astype(float)
    u = lfilter([1.0], spec.den_poly, I)
    y = lfilter(spec.num, spec.den_poly, I)
    v = lfilter([1.0], spec.den_poly, y)
    cols = [] if design.mean_known else [np.ones(design.n)]
    cols += [difference(_lag(u, i), d) for i in range(spec.r + 1)]
    cols += [difference(_lag(v, j), d) for j in range(1, spec.s + 1)]
    return np.column_stack(cols)[d:]


def dynamic_info(spec: DynamicInterventionSpec, model: ArimaSpec, design: StudyDesign) -> np.ndarray:
    """Exact information ``J' Gamma^{-1} J / sigma_a2`` for (xi, omega, delta)."""
    _require_valid(model)
    J = dynamic_regressors(spec, design, model.d)
    G = SymToeplitz(acvf(model, J.shape[0] - 1) / model.sigma_a2)
    return np.atleast_2d(quad_form(G, J, **_short_memory_kw(model))) / model.sigma_a2


def gain(spec: DynamicInterventionSpec) -> float:
    """Steady-state gain ``sum(omega) / (1 - sum(delta))``."""
    den = 1.0 - sum(spec.den)
    if abs(den) < 1e-12:
        raise ZeroDivisionError("sum of delta coefficients equals 1; the gain is infinite")
    return sum(spec.num) / den


def gain_gradient(spec: DynamicInterventionSpec) -> np.ndarray:
    """Gradient of the gain with respect to (omega_0..omega_r, delta_1..delta_s)."""
    g = gain(spec)
    den = 1.0 - sum(spec.den)
    return np.r_[np.full(spec.r + 1, 1.0 / den), np.full(spec.s, g / den)]


def sigma_gain(spec: DynamicInterventionSpec, model: ArimaSpec, design: StudyDesign) -> float:
    """Delta-method standard error of the estimated gain."""
    M = dynamic_info(spec, model, design)
    try:
        V = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError("dynamic-model information is singular") from exc
    if not design.mean_known:
        V = V[1:, 1:]
    dz = gain_gradient(spec)
    var = float(dz @ V @ dz)
    if not var > 0:
        raise SingularInformationError("nonpositive delta-method variance")
    return float(np.sqrt(var))


def gain_test_power(
    spec: DynamicInterventionSpec,
    model: ArimaSpec,
    design: StudyDesign,
    g_value: Optional[float] = None,
) -> float:
    """Power of the Z test of ``g = 0`` at gain ``g_value`` (default: the gain implied by ``spec``)."""
    g = gain(spec) if g_value is None else g_value
    return power_delta(g, 1.0, sigma_gain(spec, model, design), design.alpha, design.sided)
