"""Intervention regressors, study designs and the information-limit check."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional, Union

import numpy as np

__all__ = [
    "Kind",
    "Sided",
    "InterventionSpec",
    "StudyDesign",
    "series",
    "difference",
    "regressor_matrix",
    "consistency_check",
    "Consistency",
]


class Kind(str, Enum):
    STEP = "step"
    PULSE = "pulse"
    RAMP = "ramp"


class Sided(str, Enum):
    TWO_SIDED = "two_sided"
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class InterventionSpec:
    """Intervention shape and timing.

    ``T`` and ``b`` may be left as ``None`` to take them from the
    :class:`StudyDesign` the intervention is paired with.  The magnitude is
    given either as ``omega`` (response units) or as ``delta = omega/sigma``.
    """

    kind: Kind = Kind.STEP
    T: Optional[int] = None
    b: Optional[int] = None
    omega: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.T is not None and int(self.T) < 1:
            raise ValueError(f"onset T must be >= 1, got {self.T}")
        if self.b is not None and int(self.b) < 0:
            raise ValueError(f"delay b must be >= 0, got {self.b}")
        if self.omega is not None and self.delta is not None:
            raise ValueError("give omega or delta, not both")


@dataclass(frozen=True)
class StudyDesign:
    """Series length, onset, delay and test settings."""

    n: int
    T: int
    b: int = 0
    mean_known: bool = False
    alpha: float = 0.05
    sided: Sided = Sided.TWO_SIDED

    def __post_init__(self):
        object.__setattr__(self, "sided", Sided(self.sided))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T!r}")
        if int(self.b) != self.b or self.b < 0:
            raise ValueError(f"b must be a nonnegative integer, got {self.b!r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    @property
    def onset(self) -> int:
        """Effective onset ``T + b``."""
        return self.T + self.b

    def with_(self, **changes) -> "StudyDesign":
        return replace(self, **changes)


IvLike = Union[InterventionSpec, Kind, str]


def _resolve(iv: IvLike, design: StudyDesign) -> tuple[Kind, int]:
    """Kind and effective onset for an (intervention, design) pair."""
    if not isinstance(iv, InterventionSpec):
        return Kind(iv), design.onset
    T = design.T if iv.T is None else iv.T
    b = design.b if iv.b is None else iv.b
    if iv.T is not None and iv.T != design.T:
        raise ValueError(f"intervention onset T={iv.T} disagrees with design T={design.T}")
    return iv.kind, T + b


def series(kind, T: int, n: int) -> np.ndarray:
    """Indicator series ``I_1..I_n`` for a step, pulse or ramp at onset ``T``."""
    kind = Kind(kind)
    if not 1 <= T <= n:
        raise ValueError(f"onset T={T} outside 1..{n}")
    t = np.arange(1, n + 1)
    if kind is Kind.STEP:
        return (t >= T).astype(int)
    if kind is Kind.PULSE:
        return (t == T).astype(int)
    return np.where(t >= T, t - T + 1, 0)


def difference(x, d: int) -> np.ndarray:
    """Apply (1 - B)^d with zero pre-sample values; the length is preserved."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    x = np.asarray(x)
    for _ in range(d):
        x = np.diff(x, prepend=0)
    return x


def regressor_matrix(
    iv: IvLike, design: StudyDesign, d: int = 0, drop_presample: bool = False
) -> np.ndarray:
    """Design matrix ``J``: a ones column (unless the mean is known) and
    the differenced, delayed intervention column.

    With ``drop_presample`` the first ``d`` rows, which involve pre-sample
    values, are removed so that ``J`` lines up with the differenced series.
    """
    kind, onset = _resolve(iv, design)
    if onset > design.n:
        raise ValueError(f"onset T+b={onset} exceeds series length n={design.n}")
    w = difference(series(kind, onset, design.n), d).astype(float)
    J = w[:, None] if design.mean_known else np.column_stack([np.ones(design.n), w])
    return J[d:] if drop_presample else J


class Consistency(NamedTuple):
    c: float
    satisfied: bool


def consistency_check(iv: IvLike, design: StudyDesign, d: int = 0) -> Consistency:
    """Limit of the mean of the differenced regressor as n grows.

    For a regressor that is eventually one (a step after differencing) the
    finite-n mean ``(n - T - b + 1) / n`` is reported; regressors that are
    eventually zero give 0 and growing ones give ``inf``.  With the mean
    estimated the condition is ``c > 0`` and ``c != 1`` (``c = 1`` makes the
    regressor collinear with the constant); with the mean known ``c > 0``
    suffices.
    """
    kind, onset = _resolve(iv, design)
    # net order: step = 0, pulse = -1, ramp = +1 after d differences
    order = {Kind.PULSE: -1, Kind.STEP: 0, Kind.RAMP: 1}[kind] - d
    if order < 0:
        c = 0.0
    elif order == 0:
        c = max(design.n - onset + 1, 0) / design.n
    else:
        c = float("inf")
    ok = c > 0 and (design.mean_known or c != 1)
    return Consistency(float(c), bool(ok))
