"""Monte Carlo estimation of the power of the intervention tests.

Replicate ``i`` at grid point ``k`` draws from its own generator seeded by
``SeedSequence(seed, spawn_key=(k, i, attempt))``, and results are
reduced in index order, so serial and parallel runs agree exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import chdtri

from .arima import ArimaSpec, simulate, stationary_sigma
from .estimation import FitError, Structure, fit_sia, lr_test, q_statistic, z_test
from .intervention import InterventionSpec, Kind, StudyDesign, series
from .power import power, qtest_power

__all__ = ["EmpiricalPower", "HarnessError", "empirical_power", "simulate_sia", "TESTS"]

TESTS = ("z", "lr", "q")
FAIL_BUDGET = 0.02


class HarnessError(RuntimeError):
    """Too many replicates failed to produce a test decision."""


def simulate_sia(
    model: ArimaSpec, kind, design: StudyDesign, omega: float, rng
) -> np.ndarray:
    """One series from the intervention model: errors plus ``omega * B^b I_t``."""
    z = simulate(model, design.n, rng)
    return z + omega * series(kind, design.onset, design.n)


def _decide(y, model, structure, kind, design, test) -> bool:
    iv = InterventionSpec(kind, design.T, design.b)
    if test == "z":
        fit = fit_sia(y, structure, iv, design.mean_known)
        return z_test(fit, design.alpha).reject
    if test == "lr":
        return lr_test(y, structure, iv, design.mean_known, design.alpha).reject
    q, df = q_statistic(y, model, design.onset)
    return bool(q > chdtri(df, design.alpha))


def _run_block(args) -> list:
    model, structure, kind, design, test, omega, seed, k, idx, max_attempts = args
    out = []
    for i in idx:
        failures = 0
        for attempt in range(max_attempts):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k, i, attempt)))
            y = simulate_sia(model, kind, design, omega, rng)
            try:
                out.append((_decide(y, model, structure, kind, design, test), failures))
                break
            except (FitError, np.linalg.LinAlgError, ValueError, FloatingPointError):
                failures += 1
        else:
            out.append((None, failures))
    return out


@dataclass
class EmpiricalPower:
    """Empirical rejection rates over a grid of scaled effects."""

    delta: np.ndarray
    power: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    theory: np.ndarray
    failures: np.ndarray
    N: int
    design: StudyDesign
    model: str
    test: str
    seed: int
    meta: dict = field(default_factory=dict)

    COLUMNS = ("delta", "empirical_power", "ci_low", "ci_high", "theory", "failures")

    @property
    def covered(self) -> np.ndarray:
        return (self.ci_low <= self.theory) & (self.theory <= self.ci_high)

    def rows(self) -> list[tuple]:
        return list(
            zip(
                self.delta.tolist(),
                self.power.tolist(),
                self.ci_low.tolist(),
                self.ci_high.tolist(),
                self.theory.tolist(),
                self.failures.tolist(),
            )
        )

    def to_csv(self, precision: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.rows():
            w.writerow([f"{x:.{precision}f}" for x in r[:5]] + [int(r[5])])
        return buf.getvalue()

    def to_json(self, precision: int = 6) -> str:
        d = self.design
        return json.dumps(
            {
                "design": {
                    "n": d.n, "T": d.T, "b": d.b, "mean_known": d.mean_known,
                    "alpha": d.alpha, "sided": d.sided.value,
                },
                "model": self.model,
                "test": self.test,
                "N": self.N,
                "seed": self.seed,
                "points": [
                    dict(zip(self.COLUMNS, [round(x, precision) for x in r[:5]] + [int(r[5])]))
                    for r in self.rows()
                ],
            },
            indent=2,
        )


def empirical_power(
    model: ArimaSpec,
    kind,
    design: StudyDesign,
    delta_grid: Sequence[float],
    N: int = 1000,
    seed: int = 0,
    structure=None,
    test: str = "z",
    workers: Optional[int] = None,
    method: str = "exact",
) -> EmpiricalPower:
    """Rejection rate of a level-``alpha`` test over ``N`` simulated series.

    Args:
        model: data-generating error model; ``omega = delta * sigma``.
        kind: intervention shape.
        design: series length, onset, mean flag and level (two-sided Z/LR).
        delta_grid: scaled effects.
        N: replicates per grid point (at least 100).
        seed: master seed.
        structure: model shape to fit; defaults to that of ``model``.
        test: ``"z"``, ``"lr"`` or ``"q"`` (Q uses the true model).
        workers: processes for parallel replicates; ``None`` runs serially.
        method: information method for the theory column.

    Replicates whose fit fails are redrawn from a fresh stream; if more
    than 2% of the replicates at a grid point fail, :class:`HarnessError`
    is raised.
    """
    if N < 100:
        raise ValueError("N must be at least 100")
    if test not in TESTS:
        raise ValueError(f"test must be one of {TESTS}")
    kind = Kind(kind)
    structure = Structure.of(model if structure is None else structure)
    sigma = stationary_sigma(model)
    budget = int(math.floor(FAIL_BUDGET * N))
    deltas = np.asarray(delta_grid, dtype=float)
    jobs = []
    nblocks = max(1, (workers or 1) * 4)
    for k, dl in enumerate(deltas):
        for idx in np.array_split(np.arange(N), nblocks):
            if idx.size:
                jobs.append((model, structure, kind, design, test, dl * sigma, seed, k, idx.tolist(), budget + 1))
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_block, jobs))
    else:
        results = [_run_block(j) for j in jobs]
    per_k: dict[int, list] = {}
    for job, res in zip(jobs, results):
        per_k.setdefault(job[7], []).extend(res)
    pw, lo, hi, th, fl = [], [], [], [], []
    for k, dl in enumerate(deltas):
        res = per_k[k]
        fails = sum(f for _, f in res)
        if fails > budget or any(r is None for r, _ in res):
            raise HarnessError(
                f"{fails} of {N} replicates failed at delta={dl:g} "
                f"(budget {budget}); model {model.describe()}, test {test}"
            )
        p = sum(bool(r) for r, _ in res) / N
        half = 1.96 * math.sqrt(p * (1 - p) / N)
        pw.append(p)
        lo.append(p - half)
        hi.append(p + half)
        fl.append(fails)
        if test == "q":
            th.append(qtest_power(model, dl * sigma, design))
        else:
            th.append(float(power(model, kind, design, dl, method)))
    return EmpiricalPower(
        deltas, np.array(pw), np.array(lo), np.array(hi), np.array(th), np.array(fl),
        N, design, model.describe(), test, seed,
    )
