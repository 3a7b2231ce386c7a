"""Brute-force (P, Q) grid oracle for measuring transfer limits on a feeder.

For every real power on a grid, each reactive power is tried in turn; points
violating a voltage, ampacity or substation limit (or failing to converge)
are discarded, and the reactive power maximising the transferred real power
is kept.  The resulting frontier yields measured marginal and thermal limits
that the closed-form predictions are scored against.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import ConvergenceError, NoFeasiblePointError, ThermalLimitError
from .feeder import FeederModel, solve_feeder, two_bus_equivalent
from .limits import (
    OperatingPoint,
    SubstationModel,
    TwoBusCase,
    marginal_limit,
    thermal_limit,
)
from .twobus import ComplexPower

# feasibility slack so points sitting exactly on a limit survive rounding
_LIMIT_SLACK = 1e-9


@dataclass(frozen=True)
class SweepConfig:
    """Grid and constraints for one sweep.

    Ranges are (min, max, step) in per-unit.  Branch ampacities come from
    the feeder model itself.
    """

    p_range: tuple[float, float, float]
    q_range: tuple[float, float, float]
    v_plus: float
    p_plus: float | None = None

    def __post_init__(self):
        for lo, hi, step in (self.p_range, self.q_range):
            if step <= 0.0:
                raise ValueError("grid step must be positive")
            if hi < lo:
                raise ValueError("empty grid range")

    def p_values(self) -> list[float]:
        return _grid(*self.p_range)

    def q_values(self) -> list[float]:
        return _grid(*self.q_range)


def _grid(lo: float, hi: float, step: float) -> list[float]:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(count)]


@dataclass(frozen=True)
class FrontierPoint:
    p_gen: float
    q_gen: float
    p0_sub: float
    max_current: float
    vg: float


@dataclass(frozen=True)
class SweepErrors:
    """Prediction minus measurement, per-unit; negative = under-prediction."""

    pg_marginal: float
    p0_marginal: float
    pg_thermal: float | None
    p0_thermal: float | None


@dataclass(frozen=True)
class SweepReport:
    frontier: list[FrontierPoint]
    measured_pg_marginal: float
    measured_p0_marginal: float
    measured_pg_thermal: float
    measured_p0_thermal: float
    case: TwoBusCase
    substation: SubstationModel
    predicted_marginal: OperatingPoint
    predicted_thermal: OperatingPoint | None
    errors: SweepErrors


def improves(p0: float, q: float, best: FrontierPoint | None) -> bool:
    """Frontier preference: larger transfer wins, exact ties go to smaller |q|."""
    if best is None:
        return True
    if p0 != best.p0_sub:
        return p0 > best.p0_sub
    return abs(q) < abs(best.q_gen)


def best_reactive_point(model, bus, p, q_values, v_plus, p_plus):
    """Feasible point with maximum transferred power at fixed generation.

    Ties in transferred power break toward the reactive power of smallest
    magnitude.  Returns None when no grid point is feasible.
    """
    best = None
    for q in q_values:
        try:
            res = solve_feeder(model, {bus: ComplexPower(p, q)})
        except ConvergenceError:
            continue
        if any(abs(v) > v_plus + _LIMIT_SLACK for v in res.voltages.values()):
            continue
        violated = False
        for br in model.branches:
            if res.branch_currents[(br.from_bus, br.to_bus)] > br.ampacity + _LIMIT_SLACK:
                violated = True
                break
        if violated:
            continue
        p0 = res.s0_sub.p
        if p_plus is not None and p0 > p_plus + _LIMIT_SLACK:
            continue
        if improves(p0, q, best):
            max_current = max(res.branch_currents.values())
            vg = abs(res.voltages[bus])
            best = FrontierPoint(p, q, p0, max_current, vg)
    return best


def _column(args):
    model, bus, p, q_values, v_plus, p_plus = args
    return best_reactive_point(model, bus, p, q_values, v_plus, p_plus)


def run_sweep(
    model: FeederModel,
    bus: str,
    config: SweepConfig,
    workers: int | None = None,
) -> SweepReport:
    """Sweep the grid, extract measured limits and score the predictions.

    ``workers`` fans the independent grid columns out over processes; the
    result is merged by grid index and does not depend on the worker count.
    """
    p_values = config.p_values()
    q_values = config.q_values()
    tasks = [(model, bus, p, q_values, config.v_plus, config.p_plus) for p in p_values]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(_column, tasks, chunksize=8))
    else:
        columns = [_column(t) for t in tasks]
    frontier = [pt for pt in columns if pt is not None]
    if not frontier:
        raise NoFeasiblePointError("no grid point satisfies all constraints")

    marginal_pt = max(frontier, key=lambda pt: pt.p0_sub)
    thermal_pt = max(frontier, key=lambda pt: pt.p_gen)

    case, sub = two_bus_equivalent(model, bus, v_plus=config.v_plus, p_plus=config.p_plus)
    predicted_marginal = marginal_limit(case)
    try:
        predicted_thermal = thermal_limit(case)
    except ThermalLimitError:
        predicted_thermal = None

    p_load = sub.s_load.p
    errors = SweepErrors(
        pg_marginal=(predicted_marginal.sg.p + p_load) - marginal_pt.p_gen,
        p0_marginal=predicted_marginal.s0.p - marginal_pt.p0_sub,
        pg_thermal=(
            (predicted_thermal.sg.p + p_load) - thermal_pt.p_gen
            if predicted_thermal is not None
            else None
        ),
        p0_thermal=(
            predicted_thermal.s0.p - thermal_pt.p0_sub
            if predicted_thermal is not None
            else None
        ),
    )
    return SweepReport(
        frontier=frontier,
        measured_pg_marginal=marginal_pt.p_gen,
        measured_p0_marginal=marginal_pt.p0_sub,
        measured_pg_thermal=thermal_pt.p_gen,
        measured_p0_thermal=thermal_pt.p0_sub,
        case=case,
        substation=sub,
        predicted_marginal=predicted_marginal,
        predicted_thermal=predicted_thermal,
        errors=errors,
    )


def locus_estimate(case: TwoBusCase, pg_net: float) -> tuple[float, float, float] | None:
    """Closed-form (rotated P, rotated Q, current) on the |Vg| = V+ locus.

    Given the net real generation, solves for the reactive power that pins
    the generator voltage at the limit, choosing the lower-loss root.
    Returns None when the locus is unreachable at this generation.
    """
    z = case.z
    z_sq = z.r * z.r + z.x * z.x
    z_mag = math.sqrt(z_sq)
    w = case.v_plus**2
    v0_sq = case.v0**2
    if z.r == 0.0:
        q_t = -z_sq * pg_net / z.x
        arg = v0_sq * w - q_t * q_t
        if arg < 0.0:
            return None
        p_t = w - math.sqrt(arg)
    else:
        c = z_sq * pg_net
        disc = z_sq * v0_sq * w - (c - z.r * w) ** 2
        if disc < 0.0:
            return None
        q_t = (-z.x * (c - z.r * w) - z.r * math.sqrt(disc)) / z_sq
        p_t = (c + z.x * q_t) / z.r
    losses_t = v0_sq + 2.0 * p_t - w
    if losses_t < 0.0:
        losses_t = 0.0
    return p_t, q_t, math.sqrt(losses_t) / z_mag


def frontier_curves(report: SweepReport) -> list[dict]:
    """Measured frontier with the closed-form overlays, one record per point.

    Estimated current and reactive power assume operation on the voltage
    limit, so they diverge from measurements at low generation where the
    limit is not yet active.
    """
    if not report.frontier:
        raise NoFeasiblePointError("empty frontier")
    case = report.case
    s_load = report.substation.s_load
    z = case.z
    z_sq = z.r * z.r + z.x * z.x
    records = []
    for pt in report.frontier:
        est = locus_estimate(case, pt.p_gen - s_load.p)
        if est is None:
            i_est = math.nan
            q_est = math.nan
        else:
            p_t, q_t, i_est = est
            q_est = (q_t * z.r + p_t * z.x) / z_sq + s_load.q
        records.append(
            {
                "p_gen": pt.p_gen,
                "p0_sub": pt.p0_sub,
                "max_current": pt.max_current,
                "current_est": i_est,
                "q_gen": pt.q_gen,
                "q_gen_est": q_est,
                "vg": pt.vg,
            }
        )
    return records
