"""Command-line front end.

Subcommands: eval, grid, set-transform, check, solve.  Data goes to
stdout (or the requested output file); diagnostics go to stderr.  The
RADIAL_TOL environment variable overrides the default bisection
tolerance; an explicit --tol flag overrides both.

Exit codes:
  0  success (check: sampled radial)
  1  runtime failure (check: not radial)
  2  parse/usage/schema error
  3  eval/grid: non-monotone perspective (retry with --global);
     solve: objective not ray-monotone
  4  check: inconclusive sample
  5  solve: iteration budget exhausted (partial result still printed)
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .calculus import SetOracle, ball_set, box_set, halfspace_set
from .core import ExtPos, LiftedPoint, gamma_point
from .errors import (
    InfiniteValueError,
    NonMonotonePerspectiveError,
    OriginNotInSetError,
    ParseError,
    RadialError,
    RadialityRequiredError,
    SchemaError,
)
from .grammar import parse_function
from .oracle import FunctionOracle
from .sets import SCHEMA_VERSION, set_from_json, set_to_json, transform_set
from .optimize import SolveParams, solve_via_dual
from .transform import DEFAULT_TOL, DualHandle, Sense, Verdict, check_radial, extpos_gap

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_NONMONOTONE = 3
EXIT_RADIALITY = 3
EXIT_INCONCLUSIVE = 4
EXIT_BUDGET = 5

_EMIT_TOKENS = ("primal", "dual", "lower", "bidual", "residual", "gamma")


def _fmt(x: float) -> str:
    """17 significant digits: round-trip safe for doubles."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _extpos_token(v: ExtPos) -> str:
    if v.is_zero:
        return "0"
    if v.is_infinite:
        return "inf"
    return _fmt(v.value)


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad vector {text!r}: {exc}") from exc


def _axis(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"axis spec must be lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 2:
        raise argparse.ArgumentTypeError("axis count must be >= 2")
    if not lo < hi:
        raise argparse.ArgumentTypeError("axis requires lo < hi")
    return lo, hi, count


def _parse_expression(args) -> FunctionOracle | None:
    try:
        return parse_function(args.f, args.dim)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _cmd_eval(args, tol: float) -> int:
    oracle = _parse_expression(args)
    if oracle is None:
        return EXIT_PARSE
    sense = Sense.UPPER if args.sense == "upper" else Sense.LOWER
    if args.at.shape[0] != args.dim:
        print(f"error: --at has {args.at.shape[0]} coordinates, expected {args.dim}", file=sys.stderr)
        return EXIT_PARSE
    handle = DualHandle(oracle, sense, tol=tol, global_scan=args.global_scan)
    try:
        value, cert = handle.value_with_certificate(args.at)
    except NonMonotonePerspectiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: retry with --global", file=sys.stderr)
        return EXIT_NONMONOTONE
    except RadialError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if value.is_finite:
        print(f"{value.value:.10f} ± {tol:g}")
    else:
        print(_extpos_token(value))
    print(
        f"bracket [{_fmt(cert.v_lo)}, {_fmt(cert.v_hi)}] "
        f"perspective [{_fmt(cert.p_lo)}, {_fmt(cert.p_hi)}] "
        f"evaluations {cert.evaluations} mode {cert.mode}"
    )
    return EXIT_OK


def _grid_points(axes):
    grids = [np.linspace(lo, hi, count) for lo, hi, count in axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _cmd_grid(args, tol: float) -> int:
    oracle = _parse_expression(args)
    if oracle is None:
        return EXIT_PARSE
    if args.dim > 2:
        print("error: grid emission supports dim 1 or 2", file=sys.stderr)
        return EXIT_PARSE
    if len(args.grid) != args.dim:
        print(f"error: --grid has {len(args.grid)} axes, expected {args.dim}", file=sys.stderr)
        return EXIT_PARSE
    emit = [t.strip() for t in args.emit.split(",") if t.strip()]
    for t in emit:
        if t not in _EMIT_TOKENS:
            print(f"error: unknown emit token {t!r} (choose from {', '.join(_EMIT_TOKENS)})", file=sys.stderr)
            return EXIT_PARSE

    upper = DualHandle(oracle, Sense.UPPER, tol=tol, global_scan=args.global_scan)
    lower = DualHandle(oracle, Sense.LOWER, tol=tol, global_scan=args.global_scan)
    bidual = DualHandle(upper, Sense.UPPER, tol=tol)

    columns = [f"x{i}" for i in range(args.dim)]
    if "primal" in emit:
        columns.append("f")
    if "dual" in emit:
        columns.append("upper")
    if "lower" in emit:
        columns.append("lower")
    if "bidual" in emit:
        columns.append("bidual")
    if "residual" in emit:
        columns.append("residual")
    if "gamma" in emit:
        columns.extend([f"gamma_y{i}" for i in range(args.dim)] + ["gamma_v"])

    rows = []
    try:
        for point in _grid_points(args.grid):
            row = [float(c) for c in point]
            fx = oracle.eval(point)
            if "primal" in emit:
                row.append(fx)
            if "dual" in emit:
                row.append(upper.value(point))
            if "lower" in emit:
                row.append(lower.value(point))
            if "bidual" in emit or "residual" in emit:
                bi = bidual.value(point)
            if "bidual" in emit:
                row.append(bi)
            if "residual" in emit:
                row.append(extpos_gap(fx, bi))
            if "gamma" in emit:
                if fx.is_finite:
                    image = gamma_point(LiftedPoint(point, fx.value))
                    row.extend([float(c) for c in image.x] + [image.u])
                else:
                    row.extend([math.nan] * (args.dim + 1))
            rows.append(row)
    except NonMonotonePerspectiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: retry with --global", file=sys.stderr)
        return EXIT_NONMONOTONE

    def cell(v) -> str:
        if isinstance(v, ExtPos):
            return _extpos_token(v)
        return _fmt(float(v))

    if args.format == "csv":
        lines = [",".join(columns)]
        lines.extend(",".join(cell(v) for v in row) for row in rows)
        payload = "\n".join(lines) + "\n"
    else:
        doc = {
            "schema": SCHEMA_VERSION,
            "columns": columns,
            "rows": [[v.to_json() if isinstance(v, ExtPos) else float(v) for v in row] for row in rows],
        }
        payload = json.dumps(doc, sort_keys=True) + "\n"
    try:
        with open(args.out, "w") as fh:
            fh.write(payload)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_set_transform(args) -> int:
    try:
        with open(args.infile) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {args.infile}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        transformed = transform_set(set_from_json(doc))
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    payload = json.dumps(set_to_json(transformed), indent=2, sort_keys=True) + "\n"
    try:
        with open(args.out, "w") as fh:
            fh.write(payload)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _cmd_check(args) -> int:
    oracle = _parse_expression(args)
    if oracle is None:
        return EXIT_PARSE
    lo, hi = args.box
    report = check_radial(oracle, args.rays, args.points, box=(lo, hi), seed=args.seed)
    if report.verdict is Verdict.RADIAL:
        print("strictly radial (sampled)" if report.strict else "radial (sampled; not strict)")
        code = EXIT_OK
    elif report.verdict is Verdict.NOT_RADIAL:
        print(f"not radial: {len(report.witnesses)} witness(es)")
        code = EXIT_FAILURE
    else:
        print("inconclusive: no informative samples")
        code = EXIT_INCONCLUSIVE
    for w in report.witnesses[:5]:
        ys = ",".join(_fmt(c) for c in w.y)
        print(
            f"witness: y=({ys}) v={_fmt(w.v_lo)} v'={_fmt(w.v_hi)} "
            f"perspective {_fmt(w.p_lo)} -> {_fmt(w.p_hi)}"
        )
    print(f"checked {report.checked_rays} rays x {report.checked_points_per_ray} points", file=sys.stderr)
    return code


def _constraint_from_json(doc) -> SetOracle:
    if not isinstance(doc, dict):
        raise SchemaError("constraint document must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f'missing or unsupported "schema" (expected "{SCHEMA_VERSION}")')
    kind = doc.get("type")
    try:
        if kind == "ball":
            return ball_set(int(doc.get("dim", 1)), float(doc["radius"]))
        if kind == "box":
            return box_set(np.asarray(doc["lo"], dtype=float), np.asarray(doc["hi"], dtype=float))
        if kind == "halfspace":
            return halfspace_set(np.asarray(doc["a"], dtype=float), float(doc["b"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad {kind} constraint: {exc}") from exc
    raise SchemaError(f"unknown constraint type {kind!r}")


def _cmd_solve(args, tol: float) -> int:
    oracle = _parse_expression(args)
    if oracle is None:
        return EXIT_PARSE
    if args.y0.shape[0] != args.dim:
        print(f"error: --y0 has {args.y0.shape[0]} coordinates, expected {args.dim}", file=sys.stderr)
        return EXIT_PARSE
    constraint = None
    if args.constraint:
        try:
            with open(args.constraint) as fh:
                constraint = _constraint_from_json(json.load(fh))
        except (OSError, json.JSONDecodeError, SchemaError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        if constraint.dim != args.dim:
            constraint = SetOracle(args.dim, constraint.member, constraint.contains_origin)
    params = SolveParams(budget=args.budget, tol_grad=args.tol_grad, tol=tol)
    try:
        dual_solution, primal_solution = solve_via_dual(oracle, args.y0, params, constraint)
    except RadialityRequiredError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RADIALITY
    except OriginNotInSetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfiniteValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    doc = {
        "schema": SCHEMA_VERSION,
        "y_star": [float(v) for v in dual_solution.y_star],
        "d_star": dual_solution.d_star.to_json(),
        "x_star": [float(v) for v in primal_solution.x_star],
        "p_star": primal_solution.p_star.to_json(),
        "iterations": dual_solution.iterations,
        "grad_norm": dual_solution.grad_norm,
        "status": dual_solution.status,
        "converged": dual_solution.converged,
    }
    print(json.dumps(doc, sort_keys=True))
    if dual_solution.status == "budget":
        print("warning: iteration budget exhausted; best iterate returned", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def _box_arg(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("box must be lo:hi")
    lo, hi = float(parts[0]), float(parts[1])
    if not lo < hi:
        raise argparse.ArgumentTypeError("box requires lo < hi")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radial",
        description="Evaluate projective transforms of functions and sets.",
    )
    parser.add_argument("--tol", type=float, default=None, help="bisection tolerance (default: RADIAL_TOL env or 1e-10)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate the upper/lower transform at a point")
    p_eval.add_argument("--f", required=True, help="expression, e.g. 'pos(sqrt(1 - x0^2))'")
    p_eval.add_argument("--dim", type=int, required=True)
    p_eval.add_argument("--sense", choices=("upper", "lower"), default="upper")
    p_eval.add_argument("--at", type=_vector, required=True, help="comma-separated coordinates")
    p_eval.add_argument("--global", dest="global_scan", action="store_true", help="scan a fixed height grid instead of assuming ray monotonicity")

    p_grid = sub.add_parser("grid", help="emit transform values over a grid")
    p_grid.add_argument("--f", required=True)
    p_grid.add_argument("--dim", type=int, required=True)
    p_grid.add_argument("--grid", type=lambda s: [_axis(a) for a in s.split(",")], required=True, help="lo:hi:count per axis, comma separated")
    p_grid.add_argument("--out", required=True)
    p_grid.add_argument("--emit", default="primal,dual,lower,bidual,residual", help=f"columns: {', '.join(_EMIT_TOKENS)}")
    p_grid.add_argument("--format", choices=("csv", "json"), default="csv")
    p_grid.add_argument("--global", dest="global_scan", action="store_true")

    p_set = sub.add_parser("set-transform", help="transform a halfspace/ellipsoid/polyhedron JSON document")
    p_set.add_argument("--in", dest="infile", required=True)
    p_set.add_argument("--out", required=True)

    p_check = sub.add_parser("check", help="sample-based radiality check")
    p_check.add_argument("--f", required=True)
    p_check.add_argument("--dim", type=int, required=True)
    p_check.add_argument("--rays", type=int, default=64)
    p_check.add_argument("--points", type=int, default=64)
    p_check.add_argument("--box", type=_box_arg, default=(-3.0, 3.0))
    p_check.add_argument("--seed", type=int, default=0)

    p_solve = sub.add_parser("solve", help="maximize f by minimizing its transform")
    p_solve.add_argument("--f", required=True)
    p_solve.add_argument("--dim", type=int, required=True)
    p_solve.add_argument("--y0", type=_vector, required=True)
    p_solve.add_argument("--constraint", default=None, help="JSON file: ball/box/halfspace in decision space")
    p_solve.add_argument("--budget", type=int, default=10_000)
    p_solve.add_argument("--tol-grad", dest="tol_grad", type=float, default=1e-8)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    tol = args.tol
    if tol is None:
        env = os.environ.get("RADIAL_TOL")
        try:
            tol = float(env) if env else DEFAULT_TOL
        except ValueError:
            print(f"error: bad RADIAL_TOL value {env!r}", file=sys.stderr)
            return EXIT_PARSE
    if not tol > 0:
        print("error: tolerance must be positive", file=sys.stderr)
        return EXIT_PARSE

    if args.command == "eval":
        return _cmd_eval(args, tol)
    if args.command == "grid":
        return _cmd_grid(args, tol)
    if args.command == "set-transform":
        return _cmd_set_transform(args)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "solve":
        return _cmd_solve(args, tol)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
