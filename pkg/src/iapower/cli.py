"""Command-line interface: ``iapower {power,samplesize,reproduce,simulate}``.

Exit codes: 0 success, 1 computation error, 2 usage error, 3 no solution.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from typing import Optional, Sequence

import numpy as np

from .arima import ArimaSpec, InvalidModelError, stationary_sigma, validate
from .intervention import StudyDesign, consistency_check
from .power import NoSolutionError, power_curve, sample_size
from .reproduce import TABLES, reproduce
from .simulation import TESTS, HarnessError, empirical_power

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_NOSOLUTION = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()] if text.strip() else []


def _grid(values: Sequence[str]) -> list[float]:
    """Expand ``a:b:step`` ranges and plain numbers."""
    out: list[float] = []
    for v in values:
        if ":" in v:
            parts = [float(x) for x in v.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise UsageError(f"range {v!r} must be start:stop:step with step > 0")
            a, b, s = parts
            k = int(np.floor((b - a) / s + 1e-9))
            out.extend(np.round(a + s * np.arange(k + 1), 12).tolist())
        else:
            out.append(float(v))
    return out


def _model_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("error model")
    m = g.add_mutually_exclusive_group()
    m.add_argument("--ar1", type=float, metavar="PHI", help="AR(1) errors with parameter PHI")
    m.add_argument("--ima1", type=float, metavar="THETA", help="IMA(1) errors (d=1) with parameter THETA")
    m.add_argument(
        "--arma",
        metavar="AR:MA",
        help="ARMA coefficient lists, e.g. 0.9087:0.5758 or 0.5,0.2: (comma separated, colon between)",
    )
    g.add_argument("--frac", type=float, default=0.0, metavar="F", help="fractional differencing parameter")
    g.add_argument("--d", type=int, default=None, help="integer differencing order (overrides the model default)")
    s = g.add_mutually_exclusive_group()
    s.add_argument("--sigma-a", type=float, default=None, help="innovation standard deviation (default 1)")
    s.add_argument("--sigma-a2", type=float, default=None, help="innovation variance")
    g.add_argument("--method", choices=("exact", "pierce", "closed"), default="exact", help="information method")
    return p


def _design_parent(need_n: bool = True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("design")
    if need_n:
        g.add_argument("--n", type=int, required=True, help="series length")
    g.add_argument("--T", type=int, required=True, help="intervention onset (1-based)")
    g.add_argument("--b", type=int, default=0, help="delay")
    g.add_argument("--alpha", type=float, default=0.05, help="test level")
    side = g.add_mutually_exclusive_group()
    side.add_argument("--two-sided", dest="sided", action="store_const", const="two_sided")
    side.add_argument("--upper", dest="sided", action="store_const", const="upper")
    side.add_argument("--lower", dest="sided", action="store_const", const="lower")
    g.add_argument("--mean-known", action="store_true", help="the constant is known (not estimated)")
    kind = g.add_mutually_exclusive_group()
    kind.add_argument("--step", dest="kind", action="store_const", const="step")
    kind.add_argument("--pulse", dest="kind", action="store_const", const="pulse")
    kind.add_argument("--ramp", dest="kind", action="store_const", const="ramp")
    p.set_defaults(sided="two_sided", kind="step")
    return p


def _output_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("output")
    g.add_argument("--format", choices=("csv", "json", "table"), default="table")
    g.add_argument("--out", default=None, help="write to this file instead of standard output")
    g.add_argument("--precision", type=int, default=6, help="decimal places in csv/json output")
    g.add_argument("--seed", type=int, default=0, help="random seed (simulate only)")
    return p


def _effect_group(p: argparse.ArgumentParser, multi: bool = True) -> None:
    e = p.add_mutually_exclusive_group(required=True)
    nargs = "+" if multi else None
    e.add_argument("--delta", nargs=nargs, help="scaled effect(s) delta = omega/sigma; a:b:step ranges allowed")
    e.add_argument("--omega", nargs=nargs, help="effect(s) in response units")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="iapower",
        description="Power and sample size for intervention analysis with ARIMA/ARFIMA errors.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    mp, op = _model_parent(), _output_parent()

    p = sub.add_parser("power", parents=[mp, _design_parent(), op], help="power curve over effect sizes")
    _effect_group(p)

    s = sub.add_parser("samplesize", parents=[mp, _design_parent(need_n=False), op], help="post-onset observations needed")
    _effect_group(s, multi=False)
    s.add_argument("--target", type=float, default=0.9, help="target power")
    s.add_argument("--monthly", action="store_true", help="also report the result in years of monthly data")

    r = sub.add_parser("reproduce", parents=[op], help="regenerate a published table with differences")
    r.add_argument("table_id", choices=sorted(TABLES))

    m = sub.add_parser("simulate", parents=[mp, _design_parent(), op], help="Monte Carlo empirical power")
    m.add_argument("--delta", nargs="+", required=True, help="scaled effect grid; a:b:step ranges allowed")
    m.add_argument("--N", type=int, default=1000, help="replicates per grid point (>= 100)")
    m.add_argument("--test", choices=TESTS, default="z", help="test whose rejection rate is estimated")
    m.add_argument("--workers", type=int, default=None, help="worker processes")
    return ap


def model_from_args(a) -> ArimaSpec:
    ar: tuple = ()
    ma: tuple = ()
    d = 0
    if a.ar1 is not None:
        ar = (a.ar1,)
    elif a.ima1 is not None:
        ma, d = (a.ima1,), 1
    elif a.arma is not None:
        if ":" not in a.arma:
            raise UsageError("--arma needs the form AR:MA, e.g. 0.9:0.5, 0.5: or :0.3")
        left, right = a.arma.split(":", 1)
        try:
            ar, ma = tuple(_floats(left)), tuple(_floats(right))
        except ValueError as exc:
            raise UsageError(f"bad --arma coefficients: {exc}") from None
    if a.d is not None:
        d = a.d
    if a.sigma_a2 is not None:
        s2 = a.sigma_a2
    elif a.sigma_a is not None:
        s2 = a.sigma_a**2
    else:
        s2 = 1.0
    try:
        spec = ArimaSpec(ar, ma, d, a.frac, s2)
    except (ValueError, InvalidModelError) as exc:
        raise UsageError(str(exc)) from None
    res = validate(spec)
    if not res.ok:
        raise UsageError("invalid model: " + "; ".join(res.violations))
    return spec


def design_from_args(a, n: Optional[int] = None) -> StudyDesign:
    try:
        return StudyDesign(a.n if n is None else n, a.T, a.b, a.mean_known, a.alpha, a.sided)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _warn_consistency(kind, design: StudyDesign, d: int) -> None:
    c = consistency_check(kind, design, d)
    if not c.satisfied:
        print(
            f"warning: the regressor limit c={c.c:g} violates the information-limit condition; "
            "asymptotic power may be less reliable",
            file=sys.stderr,
        )


def _table(header: Sequence[str], rows: Sequence[Sequence], precision: int) -> str:
    def fmt(x):
        return f"{x:.{precision}f}" if isinstance(x, float) else str(x)

    cells = [[str(h) for h in header]] + [[fmt(x) for x in r] for r in rows]
    w = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w[i]) for i, c in enumerate(r)) for r in cells]
    lines.insert(1, "  ".join("-" * x for x in w))
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_power(a) -> int:
    model = model_from_args(a)
    design = design_from_args(a)
    vals = _grid(a.delta if a.delta is not None else a.omega)
    _warn_consistency(a.kind, design, model.d)
    curve = power_curve(
        model, a.kind, design,
        deltas=vals if a.delta is not None else None,
        omegas=vals if a.omega is not None else None,
        method=a.method,
    )
    if a.format == "csv":
        text = curve.to_csv(a.precision)
    elif a.format == "json":
        text = curve.to_json(a.precision) + "\n"
    else:
        head = (
            f"# {curve.model}; n={design.n} T={design.T} b={design.b} {a.kind} "
            f"alpha={design.alpha:g} {design.sided.value} mean_known={design.mean_known} "
            f"sigma={curve.extra['sigma']:.6g} sigma_omega={curve.extra['sigma_omega']:.6g}\n"
        )
        text = head + _table((curve.scale, "power"), curve.points, min(a.precision, 4))
    _emit(text, a.out)
    return EXIT_OK


def cmd_samplesize(a) -> int:
    model = model_from_args(a)
    design = design_from_args(a, n=2 * a.T)
    raw = a.delta if a.delta is not None else a.omega
    try:
        val = float(raw)
    except ValueError:
        raise UsageError(f"effect must be a single number, got {raw!r}") from None
    delta0 = val if a.delta is not None else val / stationary_sigma(model)
    if not 0 < a.target < 1:
        raise UsageError("--target must lie in (0, 1)")
    _warn_consistency(a.kind, design, model.d)
    try:
        m = sample_size(
            delta0, a.alpha, a.target, a.T, model, a.kind, a.mean_known, a.sided, a.method, a.b
        )
    except NoSolutionError as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        if a.format == "json":
            _emit(json.dumps({"solution": None, "limiting_power": exc.limiting_power}) + "\n", a.out)
        return EXIT_NOSOLUTION
    T_used = 1 if a.mean_known else a.T
    n_total = T_used + m - 1 + a.b
    rec = {"m": m, "n": n_total, "T": T_used, "delta0": delta0, "alpha": a.alpha, "target": a.target}
    if a.monthly:
        rec["years"] = m / 12.0
    if a.format == "json":
        text = json.dumps({"model": model.describe(), "solution": rec}, indent=2) + "\n"
    elif a.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rec))
        w.writerow([f"{v:.{a.precision}f}" if isinstance(v, float) else v for v in rec.values()])
        text = buf.getvalue()
    else:
        text = _table(list(rec), [list(rec.values())], min(a.precision, 4))
    _emit(text, a.out)
    return EXIT_OK


def cmd_reproduce(a) -> int:
    rep = reproduce(a.table_id)
    if a.format == "csv":
        text = rep.to_csv(a.precision)
    elif a.format == "json":
        text = rep.to_json(a.precision) + "\n"
    else:
        text = rep.to_text() + "\n"
    _emit(text, a.out)
    return EXIT_OK


def cmd_simulate(a) -> int:
    if a.N < 100:
        raise UsageError("--N must be at least 100")
    model = model_from_args(a)
    design = design_from_args(a)
    grid = _grid(a.delta)
    _warn_consistency(a.kind, design, model.d)
    res = empirical_power(
        model, a.kind, design, grid, N=a.N, seed=a.seed, test=a.test, workers=a.workers, method=a.method
    )
    if a.format == "csv":
        text = res.to_csv(a.precision)
    elif a.format == "json":
        text = res.to_json(a.precision) + "\n"
    else:
        text = _table(res.COLUMNS, res.rows(), min(a.precision, 4))
    _emit(text, a.out)
    return EXIT_OK


COMMANDS = {
    "power": cmd_power,
    "samplesize": cmd_samplesize,
    "reproduce": cmd_reproduce,
    "simulate": cmd_simulate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[a.command](a)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"iapower: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HarnessError, ArithmeticError, np.linalg.LinAlgError, ValueError, RuntimeError) as exc:
        print(f"iapower: computation failed: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
