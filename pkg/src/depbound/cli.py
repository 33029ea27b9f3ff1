"""``depbound`` command line.

Every command prints one JSON object carrying ``"schema": "depbound/1"``
(or writes CSV for ``curves`` and sampled structures). Exit status 2 marks
invalid input, 3 a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from typing import Optional, Sequence

import numpy as np

from . import __version__
from ._simplex import OptimizerOptions
from ._validation import check_levels
from .applications import crew_schedule_search, ks_critical_value
from .convolution import (
    lower_quantile_bound,
    lower_rvar_bound,
    reduced_upper_bound,
    upper_quantile_bound,
    upper_rvar_bound,
)
from .dual import dual_bound, reduced_dual_bound
from .exceptions import DepboundError, ModelSpecError, OutOfDomain
from .distributions import models_from_json
from .mixability import center_interval, jm_check_finite_mean
from .rearrangement import (
    ra_interval,
    ra_run,
    ra_rvar_interval,
    read_matrix_csv,
    write_matrix_csv,
)
from .structures import CANDIDATE, check_candidate_optimality, sample, structure_for

SCHEMA = "depbound/1"


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _emit(report: dict, out: Optional[str]):
    text = json.dumps(_clean({"schema": SCHEMA, **report}), indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_models(path):
    if path is None:
        raise OutOfDomain("--model is required")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise OutOfDomain(f"cannot read --model {path!r}: {exc.strerror}") from None
    return models_from_json(text)


def _opts(args) -> OptimizerOptions:
    return OptimizerOptions(grid_res=args.grid_res, max_evals=args.max_evals, tol=args.tol, seed=args.seed)


def _single_level(args, default):
    if args.level is None:
        return default
    return float(check_levels([args.level])[0])


def parse_grid(text: str) -> np.ndarray:
    """Grid from "a,b,c" or "start:stop:count"; strictly increasing inside (0, 1)."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            grid = np.linspace(float(start), float(stop), int(count))
        else:
            grid = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise OutOfDomain(f"--grid: cannot parse {text!r}") from None
    if grid.size == 0 or np.any(grid <= 0) or np.any(grid >= 1):
        raise OutOfDomain("--grid: levels must lie strictly inside (0, 1)")
    return check_levels(grid, strictly_increasing=True)


# commands -----------------------------------------------------------------------


def cmd_bound(args):
    models = _load_models(args.model)
    if args.direction == "upper":
        res = upper_quantile_bound(models, _single_level(args, 0.0), _opts(args))
    else:
        res = lower_quantile_bound(models, _single_level(args, 1.0), _opts(args))
    return res.to_dict()


def cmd_rvar_bound(args):
    models = _load_models(args.model)
    if args.window is None:
        raise OutOfDomain("--window is required")
    t = _single_level(args, 0.0)
    fn = upper_rvar_bound if args.direction == "upper" else lower_rvar_bound
    return fn(models, t, args.window, _opts(args)).to_dict()


def cmd_dual(args):
    models = _load_models(args.model)
    res = dual_bound(models, _single_level(args, 0.0), _opts(args))
    return res.to_dict()


def cmd_ra(args):
    if args.matrix:
        mat = read_matrix_csv(args.matrix)
        interval, final = ra_run(mat, args.objective, args.max_iters, args.seed, args.shuffle)
        if args.matrix_out:
            write_matrix_csv(final, args.matrix_out)
        return {"interval": interval.to_dict(), "rows": final.shape[0], "columns": final.shape[1]}
    models = _load_models(args.model)
    if args.n is not None:
        if len(models) != 1 and len(models) != args.n:
            raise OutOfDomain("--n must match the number of marginals or repeat a single one")
        models = models * args.n if len(models) == 1 else models
    t = _single_level(args, 0.0)
    interval = ra_interval(models, args.N, t, args.objective, args.max_iters, args.seed, args.shuffle)
    return {"interval": interval.to_dict(), "N": args.N, "level": t}


def cmd_structure(args):
    models = _load_models(args.model)
    t = _single_level(args, 0.0)
    st = structure_for(args.kind, models, t, _opts(args))
    report = {"structure": st.to_dict()}
    if st.kind == CANDIDATE:
        report["optimality_certified"] = check_candidate_optimality(st)
    if args.samples:
        draw = sample(st, args.samples, args.seed)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"X_{i + 1}" for i in range(st.n)] + ["branch", "body_flag"])
        for row, b, flag in zip(draw.values, draw.branch, draw.body):
            w.writerow([repr(float(v)) for v in row] + [int(b), int(flag)])
        if args.samples_out:
            with open(args.samples_out, "w", newline="") as fh:
                fh.write(buf.getvalue())
            report["samples_written"] = args.samples
        report["min_row_sum"] = float(np.nanmin(draw.row_sum))
    return report


def cmd_jm(args):
    models = _load_models(args.model)
    if all(m.mean_finite for m in models):
        report = jm_check_finite_mean(models, _opts(args))
        return report.to_dict()
    ci = center_interval(models, _opts(args))
    return {"verdict": "Inconclusive", "center_interval": ci.to_dict()}


def cmd_schedule(args):
    if not args.matrix:
        raise OutOfDomain("--matrix is required")
    mat = read_matrix_csv(args.matrix)
    res = crew_schedule_search(mat.cells, restarts=args.restarts, seed=args.seed, opts=_opts(args))
    return res.to_dict()


def cmd_ks(args):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value = ks_critical_value(args.K, args.M, args.gamma, _opts(args))
    report = {"critical_value": value, "K": args.K, "M": args.M, "gamma": args.gamma}
    if caught:
        report["warnings"] = [str(w.message) for w in caught]
    return report


CURVE_COLUMNS = ["level", "convolution", "reduced", "dual", "reduced_dual", "ra_lower", "ra_upper", "comonotone"]


def _homogeneous(models):
    return all(m == models[0] for m in models)


def curve_rows(models, grid, mode="quantile", total=None, N=2000, opts=None, seed=0):
    """Rows of the curves table. In rvar mode the grid holds window lengths s
    and the level is t = total - s."""
    opts = opts or OptimizerOptions()
    n = len(models)
    homog = _homogeneous(models)
    rows = []
    for x in grid:
        x = float(x)
        if mode == "quantile":
            conv = upper_quantile_bound(models, x, opts, certify=False).value
            red = reduced_upper_bound(models[0], n, x)[0] if homog else math.nan
            try:
                dual = dual_bound(models, x, opts).value
            except DepboundError:
                dual = math.nan
            try:
                rdual = reduced_dual_bound(models[0], n, x, opts) if homog else math.nan
            except DepboundError:
                rdual = math.nan
            ra = ra_interval(models, N, x, seed=seed)
            como = sum(m.qr(x) for m in models)
        else:
            s = x
            t = total - s
            if t < 0:
                raise OutOfDomain("--grid values must not exceed --total")
            conv = upper_rvar_bound(models, t, s, opts).value
            red = _reduced_rvar(models[0], n, t, s) if homog else math.nan
            dual = rdual = math.nan
            ra = ra_rvar_interval(models, t, s, N, seed=seed)
            como = sum(m.integral(1.0 - t - s, 1.0 - t) / s for m in models)
        rows.append([x, conv, red, dual, rdual, ra.lower, ra.upper, como])
    return rows


def _reduced_rvar(model, n, t, s):
    """Equal tail weights a with beta_0 = t + s - n a >= s."""
    from scipy.optimize import minimize_scalar

    def value(a):
        b0 = t + s - n * a
        return n * model.integral(1.0 - a - b0, 1.0 - a) / b0

    if t <= 0:
        return value(0.0)
    grid = np.linspace(0.0, t / n, 129)
    vals = np.array([value(a) for a in grid])
    k = int(np.nanargmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(value, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return float(min(vals[k], res.fun))


def cmd_curves(args):
    models = _load_models(args.model)
    if not args.grid:
        raise OutOfDomain("--grid is required")
    grid = parse_grid(args.grid)
    if args.mode == "rvar" and args.total is None:
        raise OutOfDomain("--total is required in rvar mode")
    rows = curve_rows(models, grid, args.mode, args.total, args.N, _opts(args), args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return None


COMMANDS = {
    "bound": cmd_bound,
    "rvar-bound": cmd_rvar_bound,
    "dual": cmd_dual,
    "ra": cmd_ra,
    "structure": cmd_structure,
    "jm": cmd_jm,
    "schedule": cmd_schedule,
    "ks": cmd_ks,
    "curves": cmd_curves,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="JSON file with the marginals")
    common.add_argument("--level", type=float, help="probability level t")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help="accepted for compatibility; runs are single-threaded")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--grid-res", type=int, default=12)
    common.add_argument("--max-evals", type=int, default=10_000)
    common.add_argument("--tol", type=float, default=1e-9)

    p = argparse.ArgumentParser(prog="depbound", description="Quantile and RVaR bounds under dependence uncertainty.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[common], help="convolution bound on a quantile of the sum")
    b.add_argument("--direction", choices=["upper", "lower"], default="upper")

    r = sub.add_parser("rvar-bound", parents=[common], help="convolution bound on an RVaR of the sum")
    r.add_argument("--window", type=float, help="window length s")
    r.add_argument("--direction", choices=["upper", "lower"], default="upper")

    sub.add_parser("dual", parents=[common], help="dual bound on the upper quantile")

    ra = sub.add_parser("ra", parents=[common], help="rearrangement algorithm")
    ra.add_argument("--matrix", help="CSV matrix; columns are marginals")
    ra.add_argument("--matrix-out", help="write the rearranged matrix here")
    ra.add_argument("--n", type=int, help="number of copies of a single marginal")
    ra.add_argument("--N", type=int, default=10_000, help="discretisation size")
    ra.add_argument("--objective", choices=["maxmin", "minmax"], default="maxmin")
    ra.add_argument("--max-iters", type=int, default=1000)
    ra.add_argument("--shuffle", action="store_true", help="start from a seeded shuffle")

    st = sub.add_parser("structure", parents=[common], help="extremal and suboptimal dependence structures")
    st.add_argument("--kind", choices=["candidate", "beta", "gamma"], default="beta")
    st.add_argument("--samples", type=int, default=0)
    st.add_argument("--samples-out", help="CSV file for sampled rows")

    sub.add_parser("jm", parents=[common], help="joint mixability diagnostics")

    sc = sub.add_parser("schedule", parents=[common], help="crew scheduling bound and search")
    sc.add_argument("--matrix", help="CSV matrix, rows are crews and columns operations")
    sc.add_argument("--restarts", type=int, default=8)

    ks = sub.add_parser("ks", parents=[common], help="critical value for a sum of KS statistics")
    ks.add_argument("--K", type=int, required=True)
    ks.add_argument("--M", type=int, required=True)
    ks.add_argument("--gamma", type=float, required=True)

    cu = sub.add_parser("curves", parents=[common], help="bound curves as CSV")
    cu.add_argument("--grid", help='"a,b,c" or "start:stop:count" inside (0, 1)')
    cu.add_argument("--mode", choices=["quantile", "rvar"], default="quantile")
    cu.add_argument("--total", type=float, help="t + s held fixed in rvar mode")
    cu.add_argument("--N", type=int, default=2000, help="RA discretisation size")
    return p


def _fail(exc, status):
    code = getattr(exc, "code", "invalid_input" if status == 2 else "numerical_failure")
    payload = {"schema": SCHEMA, "error": code, "message": str(exc)}
    sys.stderr.write(json.dumps(payload) + "\n")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        report = COMMANDS[args.command](args)
    except (ModelSpecError, OutOfDomain) as exc:
        return _fail(exc, 2)
    except DepboundError as exc:
        return _fail(exc, 2 if isinstance(exc, ValueError) else 3)
    except ValueError as exc:
        return _fail(exc, 2)
    except (ArithmeticError, RuntimeError) as exc:
        return _fail(exc, 3)
    if report is not None:
        _emit({"command": args.command, **report}, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
