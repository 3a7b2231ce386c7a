"""Maximum power transfer limits of the constrained two-bus circuit.

Two limits exist, both expressed through losses.  The thermal limit is the
largest generation for which the line current stays at its ampacity while the
voltage rides its upper bound.  The marginal limit is the point past which
incremental losses outgrow incremental generation, so the net transferred
power falls even though more is being generated.  The binding limit is the
smaller of the two generated powers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, ThermalLimitError
from .twobus import (
    Branch,
    ComplexPower,
    Impedance,
    RotatedPower,
    solve,
    unrotate,
)


@dataclass(frozen=True)
class TwoBusCase:
    """One instance of the constrained transfer problem.

    v0: source (reference) bus voltage, per-unit.
    z: series line impedance.
    v_plus: upper voltage limit at the generator bus.
    i_plus: line current limit (ampacity).
    p_plus: optional substation real-power limit; enforced only by the
        sweep/feeder validation path, not by the closed-form limits.
    """

    v0: float
    z: Impedance
    v_plus: float
    i_plus: float
    p_plus: float | None = None

    def __post_init__(self):
        if self.v0 <= 0.0 or self.v_plus <= 0.0 or self.i_plus < 0.0:
            raise ValueError(f"invalid case parameters: {self}")


@dataclass(frozen=True)
class OperatingPoint:
    """A fully-resolved steady state of the two-bus circuit."""

    sg: ComplexPower
    s0: ComplexPower
    vg: float
    current: float
    losses: ComplexPower
    efficiency: float
    pf_gen: float
    pf_sub: float
    branch: Branch


class Limit(enum.Enum):
    THERMAL = "thermal"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class LimitReport:
    """Both limit points; thermal is None when the ampacity is so large that
    the thermal point falls off the voltage-limit locus entirely."""

    thermal: OperatingPoint | None
    marginal: OperatingPoint
    binding: Limit
    lambda_prime: float


@dataclass(frozen=True)
class SubstationModel:
    """Aggregated feeder load plus substation reactive compensation."""

    s_load: ComplexPower
    q_comp: float = 0.0


def metrics(sg: ComplexPower, s0: ComplexPower) -> tuple[float, float, float]:
    """(thermal efficiency, generator power factor, substation power factor).

    Efficiency is clamped to zero when no positive real power reaches the
    substation; power factors are unsigned.
    """
    if sg.p > 0.0:
        efficiency = max(0.0, s0.p) / sg.p
    else:
        efficiency = 0.0
    return efficiency, sg.power_factor(), s0.power_factor()


def operating_point(sg_t: RotatedPower, case: TwoBusCase) -> OperatingPoint:
    """Resolve a rotated injection into a full operating point.

    The solution branch is chosen as the one whose voltage lands on (or
    nearest to) the case's voltage limit, since limit points live on the
    |Vg| = V+ locus on either branch.
    """
    z = case.z
    z_mag = z.magnitude()
    target = case.v_plus**2
    best = None
    for branch in (Branch.HIGH_VOLTAGE, Branch.LOW_VOLTAGE):
        sol = solve(sg_t, case.v0, branch)
        if best is None or abs(sol.vg_sq - target) < abs(best.vg_sq - target):
            best = sol
    losses_t = max(best.losses_t, 0.0)
    sg = unrotate(sg_t, z)
    losses = ComplexPower(
        losses_t * z.r / z_mag**2, losses_t * z.x / z_mag**2
    )
    s0 = sg - losses
    efficiency, pf_gen, pf_sub = metrics(sg, s0)
    return OperatingPoint(
        sg=sg,
        s0=s0,
        vg=math.sqrt(max(best.vg_sq, 0.0)),
        current=math.sqrt(losses_t) / z_mag,
        losses=losses,
        efficiency=efficiency,
        pf_gen=pf_gen,
        pf_sub=pf_sub,
        branch=best.branch,
    )


def thermal_rotated_roots(case: TwoBusCase) -> tuple[float, float, float]:
    """Rotated real power of the thermal limit and both reactive roots.

    Returns (p_t, q_t_negative, q_t_positive).  The limit itself always uses
    the negative root; the positive one exists for inspection only.
    """
    if not math.isfinite(case.i_plus):
        raise ThermalLimitError("ampacity is unbounded, no thermal limit point exists")
    z_mag = case.z.magnitude()
    p_t = 0.5 * (case.v_plus**2 - case.v0**2 + z_mag**2 * case.i_plus**2)
    arg = (case.v_plus * case.i_plus * z_mag) ** 2 - p_t * p_t
    if arg < 0.0:
        raise ThermalLimitError(
            "thermal limit does not intersect the voltage-limit locus "
            f"(root argument {arg:.3e} < 0)"
        )
    root = math.sqrt(arg)
    return p_t, -root, root


def thermal_limit(case: TwoBusCase) -> OperatingPoint:
    """Operating point at ampacity current on the voltage-limit locus."""
    p_t, q_t, _ = thermal_rotated_roots(case)
    return operating_point(RotatedPower(p_t, q_t), case)


def marginal_limit(case: TwoBusCase) -> OperatingPoint:
    """Operating point where marginal losses equal marginal generation.

    The rotated coordinates depend only on the R/X ratio through r/|Z| and
    x/|Z|, which stay well-defined for purely resistive or purely reactive
    lines.
    """
    z = case.z
    z_mag = z.magnitude()
    cos_term = z.r / z_mag  # lambda / sqrt(1 + lambda^2)
    sin_term = z.x / z_mag  # 1 / sqrt(1 + lambda^2)
    p_t = case.v_plus * (case.v_plus - case.v0 * cos_term)
    q_t = -case.v0 * case.v_plus * sin_term
    return operating_point(RotatedPower(p_t, q_t), case)


def marginal_transfer(case: TwoBusCase) -> float:
    """Closed-form net transferred power at the marginal limit."""
    z_mag = case.z.magnitude()
    return (case.v0**2 / z_mag) * (
        case.v_plus / case.v0 - case.z.r / z_mag
    )


def lambda_prime(v0: float, v_plus: float) -> float:
    """R/X ratio below which the marginal point crosses to the low-voltage branch."""
    denom = 4.0 * v_plus * v_plus - v0 * v0
    if denom <= 0.0:
        raise DomainError("lambda_prime undefined: 4*v_plus^2 <= v0^2")
    return v0 / math.sqrt(denom)


def branch_of_marginal_point(case: TwoBusCase) -> Branch:
    """Solution branch on which the marginal limit point lies.

    Ties at the crossover ratio classify as high-voltage.
    """
    if case.z.lam() < lambda_prime(case.v0, case.v_plus):
        return Branch.LOW_VOLTAGE
    return Branch.HIGH_VOLTAGE


def binding_limit(case: TwoBusCase) -> LimitReport:
    """Both limit points and which of the two binds (smaller generated power).

    A current limit too generous to intersect the voltage-limit locus leaves
    no thermal point; the marginal limit then binds by default.
    """
    try:
        thermal = thermal_limit(case)
    except ThermalLimitError:
        thermal = None
    marginal = marginal_limit(case)
    if thermal is None or marginal.sg.p < thermal.sg.p:
        binding = Limit.MARGINAL
    else:
        binding = Limit.THERMAL
    return LimitReport(
        thermal=thermal,
        marginal=marginal,
        binding=binding,
        lambda_prime=lambda_prime(case.v0, case.v_plus),
    )


def aggregate(gen: ComplexPower, sub: SubstationModel) -> ComplexPower:
    """Net injection seen by the two-bus model: generation minus feeder load."""
    return gen - sub.s_load


def substation_power(s0: ComplexPower, sub: SubstationModel) -> ComplexPower:
    """Power through the substation after reactive compensation."""
    return ComplexPower(s0.p, s0.q - sub.q_comp)
