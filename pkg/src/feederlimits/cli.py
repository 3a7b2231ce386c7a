"""Command-line interface: limits, curves, sweep and equivalent subcommands.

All machine output is per-unit, deterministic (fixed field order, 12
significant digits) and either JSON or comma-delimited CSV with a header
row and '.' decimal separator.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .errors import DomainError, FeederFileError, FeederLimitsError, ThermalLimitError
from .feeder import load_feeder, single_branch_model, two_bus_equivalent
from .limits import (
    Limit,
    OperatingPoint,
    TwoBusCase,
    lambda_prime,
    marginal_limit,
    metrics,
    thermal_limit,
)
from .sweep import SweepConfig, frontier_curves, run_sweep
from .twobus import Impedance, RotatedPower, unrotate


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _round12(obj):
    if isinstance(obj, float):
        return float(format(obj, ".12g")) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii", newline="") as fh:
            fh.write(text)


def render_json(obj) -> str:
    return json.dumps(_round12(obj), indent=2) + "\n"


def render_csv(rows: list[dict], fieldnames: list[str]) -> str:
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(name)) for name in fieldnames))
    return "\n".join(lines) + "\n"


def point_dict(point: OperatingPoint) -> dict:
    return {
        "pg": point.sg.p,
        "qg": point.sg.q,
        "p0": point.s0.p,
        "q0": point.s0.q,
        "vg": point.vg,
        "current": point.current,
        "losses_p": point.losses.p,
        "losses_q": point.losses.q,
        "efficiency": point.efficiency,
        "pf_gen": point.pf_gen,
        "pf_sub": point.pf_sub,
        "branch": point.branch.value,
    }


def case_dict(case: TwoBusCase) -> dict:
    return {
        "v0": case.v0,
        "r": case.z.r,
        "x": case.z.x,
        "lambda": case.z.lam(),
        "z_mag": case.z.magnitude(),
        "v_plus": case.v_plus,
        "i_plus": case.i_plus,
        "p_plus": case.p_plus,
    }


def _resolve_case(args, parser) -> tuple[TwoBusCase, object | None]:
    """Build the two-bus case from a feeder file or inline parameters."""
    inline = args.v0 is not None or args.r is not None or args.x is not None
    if args.feeder and inline:
        parser.error("--feeder and inline --v0/--r/--x are mutually exclusive")
    if args.feeder:
        if not args.bus:
            parser.error("--bus is required with --feeder")
        model = load_feeder(args.feeder)
        case, sub = two_bus_equivalent(
            model,
            args.bus,
            v_plus=args.v_plus,
            i_plus=args.i_plus,
            p_plus=args.p_plus,
        )
        return case, sub
    if args.v0 is None or args.r is None or args.x is None:
        parser.error("either --feeder/--bus or all of --v0/--r/--x are required")
    if args.i_plus is None:
        parser.error("--i-plus is required in inline mode")
    case = TwoBusCase(
        v0=args.v0,
        z=Impedance(args.r, args.x),
        v_plus=args.v_plus,
        i_plus=args.i_plus,
        p_plus=args.p_plus,
    )
    return case, None


def cmd_limits(args, parser) -> int:
    case, sub = _resolve_case(args, parser)
    marginal = marginal_limit(case)
    thermal = None
    thermal_error = None
    try:
        thermal = thermal_limit(case)
    except ThermalLimitError as exc:
        thermal_error = str(exc)
    if thermal is None or marginal.sg.p < thermal.sg.p:
        binding = Limit.MARGINAL
    else:
        binding = Limit.THERMAL
    lam_prime = lambda_prime(case.v0, case.v_plus)
    if args.format == "json":
        report = {
            "case": case_dict(case),
            "lambda_prime": lam_prime,
            "binding": binding.value,
            "marginal": point_dict(marginal),
            "thermal": point_dict(thermal) if thermal is not None else None,
        }
        if thermal_error is not None:
            report["thermal_error"] = thermal_error
        if sub is not None:
            report["s_load"] = {"p": sub.s_load.p, "q": sub.s_load.q}
        text = render_json(report)
    else:
        fields = ["limit", "binding", "lambda_prime"] + list(point_dict(marginal))
        rows = [
            {"limit": "marginal", "binding": binding.value, "lambda_prime": lam_prime}
            | point_dict(marginal)
        ]
        if thermal is not None:
            rows.append(
                {"limit": "thermal", "binding": binding.value, "lambda_prime": lam_prime}
                | point_dict(thermal)
            )
        text = render_csv(rows, fields)
    _write(text, args.out)
    return 0


def _upf_limit_generation(v0: float, v_plus: float, r: float, z_sq: float) -> float:
    """Generated power where unity-power-factor operation first hits V+."""
    w = v_plus * v_plus
    disc = r * r * w * w + z_sq * w * (v0 * v0 - w)
    if disc < 0.0:
        return math.nan
    return (r * w - math.sqrt(disc)) / z_sq


def _boundary_generation(v0: float, v_plus: float, z: Impedance) -> float:
    """Generated power on the zero-discriminant boundary at |Vg| = V+."""
    arg = v_plus * v_plus - v0 * v0 / 4.0
    if arg < 0.0:
        return math.nan
    p_t = v_plus * v_plus - v0 * v0 / 2.0
    q_t = -v0 * math.sqrt(arg)
    return unrotate(RotatedPower(p_t, q_t), z).p


def cmd_curves(args, parser) -> int:
    if args.lambda_min <= 0.0 or args.lambda_max < args.lambda_min:
        parser.error("lambda range must satisfy 0 < min <= max")
    if args.lambda_points < 1:
        parser.error("--lambda-points must be >= 1")
    n = args.lambda_points
    if n == 1:
        lams = [args.lambda_min]
    else:
        lo, hi = math.log(args.lambda_min), math.log(args.lambda_max)
        lams = [math.exp(lo + k * (hi - lo) / (n - 1)) for k in range(n)]
    z_mag = args.z_mag
    rows = []
    for lam in lams:
        scale = math.sqrt(1.0 + lam * lam)
        z = Impedance(z_mag * lam / scale, z_mag / scale)
        case = TwoBusCase(v0=args.v0, z=z, v_plus=args.v_plus, i_plus=1.0)
        point = marginal_limit(case)
        efficiency, pf_gen, pf_sub = metrics(point.sg, point.s0)
        rows.append(
            {
                "lambda": lam,
                "pg_marginal": point.sg.p,
                "pg_upf": _upf_limit_generation(args.v0, args.v_plus, z.r, z_mag * z_mag),
                "pg_bdry": _boundary_generation(args.v0, args.v_plus, z),
                "p0_marginal": point.s0.p,
                "efficiency": efficiency,
                "pf_gen": pf_gen,
                "pf_sub": pf_sub,
            }
        )
    fields = list(rows[0])
    text = render_json(rows) if args.format == "json" else render_csv(rows, fields)
    _write(text, args.out)
    return 0


def _frontier_path(out: str) -> str:
    stem, dot, _ = out.rpartition(".")
    return (stem if dot else out) + ".frontier.csv"


def cmd_sweep(args, parser) -> int:
    if args.out is None:
        parser.error("--out is required for sweep (summary plus frontier file)")
    inline = args.v0 is not None or args.r is not None or args.x is not None
    if args.feeder and inline:
        parser.error("--feeder and inline --v0/--r/--x are mutually exclusive")
    if args.feeder:
        if not args.bus:
            parser.error("--bus is required with --feeder")
        model = load_feeder(args.feeder)
        bus = args.bus
    elif inline:
        if args.v0 is None or args.r is None or args.x is None:
            parser.error("inline mode needs all of --v0/--r/--x")
        ampacity = args.i_plus if args.i_plus is not None else math.inf
        model = single_branch_model(Impedance(args.r, args.x), args.v0, ampacity=ampacity)
        bus = "g"
    else:
        parser.error("either --feeder/--bus or inline --v0/--r/--x are required")
    config = SweepConfig(
        p_range=(args.p_min, args.p_max, args.p_step),
        q_range=(args.q_min, args.q_max, args.q_step),
        v_plus=args.v_plus,
        p_plus=args.p_plus,
    )
    report = run_sweep(model, bus, config, workers=args.workers)
    errors = {
        "eps_pg_marginal": report.errors.pg_marginal,
        "eps_pg_thermal": report.errors.pg_thermal,
        "eps_p0_marginal": report.errors.p0_marginal,
        "eps_p0_thermal": report.errors.p0_thermal,
    }
    measured = {
        "pg_marginal": report.measured_pg_marginal,
        "p0_marginal": report.measured_p0_marginal,
        "pg_thermal": report.measured_pg_thermal,
        "p0_thermal": report.measured_p0_thermal,
    }
    if args.format == "json":
        summary = {
            "case": case_dict(report.case),
            "s_load": {"p": report.substation.s_load.p, "q": report.substation.s_load.q},
            "measured": measured,
            "predicted_marginal": point_dict(report.predicted_marginal),
            "predicted_thermal": (
                point_dict(report.predicted_thermal)
                if report.predicted_thermal is not None
                else None
            ),
            "errors": errors,
        }
        text = render_json(summary)
    else:
        row = measured | errors
        text = render_csv([row], list(row))
    _write(text, args.out)
    curves = frontier_curves(report)
    _write(render_csv(curves, list(curves[0])), _frontier_path(args.out))
    return 0


def cmd_equivalent(args, parser) -> int:
    model = load_feeder(args.feeder)
    if args.bus == model.source:
        parser.error("the source bus has no two-bus equivalent")
    case, sub = two_bus_equivalent(
        model, args.bus, v_plus=args.v_plus, i_plus=args.i_plus, p_plus=args.p_plus
    )
    record = case_dict(case) | {"s_load_p": sub.s_load.p, "s_load_q": sub.s_load.q}
    if args.format == "json":
        text = render_json(record)
    else:
        text = render_csv([record], list(record))
    _write(text, args.out)
    return 0


def _add_common(sub, feeder=True, inline=True):
    if feeder:
        sub.add_argument("--feeder", help="feeder description file")
        sub.add_argument("--bus", help="generator bus id")
    if inline:
        sub.add_argument("--v0", type=float, help="source voltage, pu")
        sub.add_argument("--r", type=float, help="line resistance, pu")
        sub.add_argument("--x", type=float, help="line reactance, pu")
    sub.add_argument("--v-plus", type=float, default=1.06, help="upper voltage limit, pu")
    sub.add_argument("--i-plus", type=float, help="current limit, pu")
    sub.add_argument("--p-plus", type=float, help="substation real power limit, pu")
    sub.add_argument("--format", choices=("csv", "json"), default="json")
    sub.add_argument("--out", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feederlimits",
        description="Maximum power transfer limits of radial distribution feeders",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_limits = subparsers.add_parser(
        "limits", help="closed-form thermal and marginal transfer limits"
    )
    _add_common(p_limits)
    p_limits.set_defaults(func=cmd_limits)

    p_curves = subparsers.add_parser(
        "curves", help="limit and metric curves over an R/X ratio grid"
    )
    p_curves.add_argument("--v0", type=float, default=1.0)
    p_curves.add_argument("--v-plus", type=float, default=1.06)
    p_curves.add_argument("--z-mag", type=float, default=1.0)
    p_curves.add_argument("--lambda-min", type=float, default=0.01)
    p_curves.add_argument("--lambda-max", type=float, default=100.0)
    p_curves.add_argument("--lambda-points", type=int, default=101)
    p_curves.add_argument("--format", choices=("csv", "json"), default="csv")
    p_curves.add_argument("--out", help="output path (default: stdout)")
    p_curves.set_defaults(func=cmd_curves)

    p_sweep = subparsers.add_parser(
        "sweep", help="brute-force grid validation of the predicted limits"
    )
    _add_common(p_sweep)
    p_sweep.add_argument("--p-min", type=float, default=0.0)
    p_sweep.add_argument("--p-max", type=float, default=4.0)
    p_sweep.add_argument("--p-step", type=float, default=0.01)
    p_sweep.add_argument("--q-min", type=float, default=-4.0)
    p_sweep.add_argument("--q-max", type=float, default=4.0)
    p_sweep.add_argument("--q-step", type=float, default=0.01)
    p_sweep.add_argument("--workers", type=int, help="parallel worker processes")
    p_sweep.set_defaults(func=cmd_sweep)

    p_equiv = subparsers.add_parser(
        "equivalent", help="two-bus equivalent of a feeder bus"
    )
    p_equiv.add_argument("--feeder", required=True)
    p_equiv.add_argument("--bus", required=True)
    p_equiv.add_argument("--v-plus", type=float, default=1.06)
    p_equiv.add_argument("--i-plus", type=float)
    p_equiv.add_argument("--p-plus", type=float)
    p_equiv.add_argument("--format", choices=("csv", "json"), default="json")
    p_equiv.add_argument("--out")
    p_equiv.set_defaults(func=cmd_equivalent)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except FeederFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FeederLimitsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
