"""Balanced single-phase-equivalent radial feeder model and solver.

The model is a tree of series impedances rooted at a fixed-voltage source
bus, with constant-power loads and generator injections at buses.  The solver
is a backward/forward sweep; a nodal-admittance current injection provides
the Thevenin impedance used to collapse the feeder into a two-bus case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DomainError,
    FeederFileError,
    IllConditionedNetworkError,
    TopologyError,
)
from .limits import SubstationModel, TwoBusCase
from .twobus import ComplexPower, Impedance

# Voltage magnitudes outside this window mark a diverging sweep early.
_V_BLOWUP = 1.0e3
_V_COLLAPSE = 1.0e-9


@dataclass(frozen=True)
class BranchSpec:
    from_bus: str
    to_bus: str
    z: Impedance
    ampacity: float


@dataclass(frozen=True)
class FeederModel:
    """Radial feeder: buses, series branches, constant-power loads, one source.

    All electrical quantities are per-unit; s_base/v_base exist only so user
    interfaces can annotate results in SI units.
    """

    buses: tuple[str, ...]
    branches: tuple[BranchSpec, ...]
    loads: dict[str, ComplexPower]
    source: str
    v0: float
    s_base: float | None = None
    v_base: float | None = None

    # BFS ordering caches, filled in __post_init__.
    _order: tuple[str, ...] = field(default=(), repr=False, compare=False)
    _parent: tuple[int, ...] = field(default=(), repr=False, compare=False)
    _order_branch: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.v0 <= 0.0:
            raise ValueError("source voltage must be positive")
        if self.source not in self.buses:
            raise TopologyError(f"source bus {self.source!r} is not a bus")
        if len(set(self.buses)) != len(self.buses):
            raise TopologyError("duplicate bus ids")
        for br in self.branches:
            if br.from_bus not in self.buses or br.to_bus not in self.buses:
                raise TopologyError(f"branch {br.from_bus}-{br.to_bus} references unknown bus")
        for bus in self.loads:
            if bus not in self.buses:
                raise TopologyError(f"load at unknown bus {bus!r}")
        order, parent, order_branch = self._bfs()
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_parent", parent)
        object.__setattr__(self, "_order_branch", order_branch)

    def _bfs(self):
        adjacency: dict[str, list[tuple[str, int]]] = {b: [] for b in self.buses}
        for idx, br in enumerate(self.branches):
            adjacency[br.from_bus].append((br.to_bus, idx))
            adjacency[br.to_bus].append((br.from_bus, idx))
        order = [self.source]
        parent = [-1]
        order_branch = [-1]
        seen = {self.source}
        head = 0
        while head < len(order):
            bus = order[head]
            for nbr, idx in adjacency[bus]:
                if nbr in seen:
                    continue
                seen.add(nbr)
                order.append(nbr)
                parent.append(head)
                order_branch.append(idx)
            head += 1
        if len(order) != len(self.buses):
            missing = set(self.buses) - seen
            raise TopologyError(f"buses not connected to source: {sorted(missing)}")
        if len(self.branches) != len(self.buses) - 1:
            raise TopologyError(
                "feeder is not radial: "
                f"{len(self.branches)} branches for {len(self.buses)} buses"
            )
        return tuple(order), tuple(parent), tuple(order_branch)

    def path_to(self, bus: str) -> list[BranchSpec]:
        """Branches on the unique source → bus path, source end first."""
        if bus not in self.buses:
            raise DomainError(f"unknown bus {bus!r}")
        pos = {b: k for k, b in enumerate(self._order)}
        path = []
        k = pos[bus]
        while k > 0:
            path.append(self.branches[self._order_branch[k]])
            k = self._parent[k]
        path.reverse()
        return path

    def total_load(self) -> ComplexPower:
        p = sum(s.p for s in self.loads.values())
        q = sum(s.q for s in self.loads.values())
        return ComplexPower(p, q)


@dataclass(frozen=True)
class PowerFlowResult:
    voltages: dict[str, complex]
    branch_currents: dict[tuple[str, str], float]
    total_losses: ComplexPower
    s0_sub: ComplexPower
    converged: bool
    iterations: int
    max_mismatch: float


def solve_feeder(
    model: FeederModel,
    injections: dict[str, ComplexPower] | None = None,
    max_iter: int = 512,
    tol: float = 1e-10,
) -> PowerFlowResult:
    """Backward/forward sweep power flow.

    ``injections`` are generator powers (positive into the network); loads
    come from the model.  Iterates until the largest complex voltage change
    drops below ``tol``, raising :class:`ConvergenceError` otherwise.  Heavy
    loading slows the sweep's linear convergence, so the iteration cap is
    generous; a stalling voltage change is detected early and reported as
    divergence instead of burning the full budget.
    """
    injections = injections or {}
    for bus in injections:
        if bus not in model.buses:
            raise DomainError(f"injection at unknown bus {bus!r}")

    order = model._order
    parent = model._parent
    n = len(order)
    zc = [0j] * n
    for k in range(1, n):
        br = model.branches[model._order_branch[k]]
        zc[k] = complex(br.z.r, br.z.x)
    # consumption = load - generation, per bus in BFS order
    cons = [0j] * n
    for k, bus in enumerate(order):
        s = 0j
        if bus in model.loads:
            s += model.loads[bus].as_complex()
        if bus in injections:
            s -= injections[bus].as_complex()
        cons[k] = s

    v0 = complex(model.v0, 0.0)
    volt = [v0] * n
    currents = [0j] * n
    iterations = 0
    converged = False
    delta = math.inf
    checkpoint = math.inf
    while iterations < max_iter:
        iterations += 1
        flow = [0j] * n
        for k in range(n - 1, 0, -1):
            i_k = (cons[k] / volt[k]).conjugate() + flow[k]
            flow[k] = i_k
            flow[parent[k]] += i_k
        delta = 0.0
        bad = False
        for k in range(1, n):
            v = volt[parent[k]] - zc[k] * flow[k]
            d = abs(v - volt[k])
            if d > delta:
                delta = d
            volt[k] = v
            mag = abs(v)
            if not (mag == mag) or mag > _V_BLOWUP or mag < _V_COLLAPSE:
                bad = True
        currents = flow
        if bad:
            raise ConvergenceError(
                f"power flow diverged after {iterations} iterations", mismatch=delta
            )
        if delta < tol:
            converged = True
            break
        # a contraction rate needing >32 iterations per error quarter would
        # blow the iteration budget anyway; call it divergence now
        if iterations % 32 == 0:
            if delta > 0.25 * checkpoint:
                raise ConvergenceError(
                    f"power flow stalled after {iterations} iterations "
                    f"(voltage change {delta:.3e})",
                    mismatch=delta,
                )
            checkpoint = delta
    if not converged:
        raise ConvergenceError(
            f"power flow did not converge in {max_iter} iterations "
            f"(last voltage change {delta:.3e})",
            mismatch=delta,
        )

    branch_currents: dict[tuple[str, str], float] = {}
    losses = 0j
    for k in range(1, n):
        br = model.branches[model._order_branch[k]]
        mag = abs(currents[k])
        branch_currents[(br.from_bus, br.to_bus)] = mag
        losses += zc[k] * mag * mag
    source_out = sum(currents[k] for k in range(1, n) if parent[k] == 0)
    s0 = v0 * (-source_out).conjugate()

    # nodal power mismatch check at non-source buses
    child_flow = [0j] * n
    for k in range(n - 1, 0, -1):
        child_flow[parent[k]] += currents[k]
    max_mismatch = 0.0
    for k in range(1, n):
        s_absorbed = volt[k] * (currents[k] - child_flow[k]).conjugate()
        m = abs(s_absorbed - cons[k])
        if m > max_mismatch:
            max_mismatch = m

    return PowerFlowResult(
        voltages={bus: volt[k] for k, bus in enumerate(order)},
        branch_currents=branch_currents,
        total_losses=ComplexPower(losses.real, losses.imag),
        s0_sub=ComplexPower(s0.real, s0.imag),
        converged=True,
        iterations=iterations,
        max_mismatch=max_mismatch,
    )


def thevenin_impedance(model: FeederModel, bus: str) -> Impedance:
    """Thevenin impedance between the source and a bus by current injection.

    Holds the source at fixed voltage, injects a unit current at the bus and
    reads the voltage deviation there off the reduced nodal admittance
    system.
    """
    if bus == model.source:
        raise DomainError("thevenin impedance at the source bus is degenerate")
    if bus not in model.buses:
        raise DomainError(f"unknown bus {bus!r}")
    index = {b: k for k, b in enumerate(model.buses)}
    n = len(model.buses)
    y = np.zeros((n, n), dtype=complex)
    for br in model.branches:
        z = complex(br.z.r, br.z.x)
        if z == 0:
            raise IllConditionedNetworkError(
                f"zero-impedance branch {br.from_bus}-{br.to_bus}"
            )
        adm = 1.0 / z
        i, j = index[br.from_bus], index[br.to_bus]
        y[i, i] += adm
        y[j, j] += adm
        y[i, j] -= adm
        y[j, i] -= adm
    keep = [k for k in range(n) if k != index[model.source]]
    y_red = y[np.ix_(keep, keep)]
    rhs = np.zeros(len(keep), dtype=complex)
    rhs[keep.index(index[bus])] = 1.0
    try:
        dv = np.linalg.solve(y_red, rhs)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedNetworkError(str(exc)) from exc
    z_th = dv[keep.index(index[bus])]
    # rounding can leave tiny negative components on an R,X >= 0 network
    return Impedance(float(max(z_th.real, 0.0)), float(max(z_th.imag, 0.0)))


def two_bus_equivalent(
    model: FeederModel,
    bus: str,
    v_plus: float,
    i_plus: float | None = None,
    p_plus: float | None = None,
    q_comp: float = 0.0,
) -> tuple[TwoBusCase, SubstationModel]:
    """Collapse the feeder into a two-bus case for a generator at ``bus``.

    The current limit defaults to the smallest ampacity along the
    source → bus path; the feeder load aggregates into the substation model.
    """
    z = thevenin_impedance(model, bus)
    if i_plus is None:
        i_plus = min(br.ampacity for br in model.path_to(bus))
    case = TwoBusCase(v0=model.v0, z=z, v_plus=v_plus, i_plus=i_plus, p_plus=p_plus)
    sub = SubstationModel(s_load=model.total_load(), q_comp=q_comp)
    return case, sub


def parse_feeder(text: str, name: str = "<string>") -> FeederModel:
    """Parse the line-oriented feeder file format.

    Sections: [base], [bus], [source], [branch], [load]; '#' starts a
    comment.  Voltage regulators are not modelled; a [regulator] section is
    rejected outright.
    """
    section = None
    buses: list[str] = []
    branches: list[BranchSpec] = []
    loads: dict[str, ComplexPower] = {}
    source = None
    v0 = None
    s_base = None
    v_base = None
    known = {"base", "bus", "source", "branch", "load"}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section == "regulator":
                raise FeederFileError(
                    f"{name}:{lineno}: voltage regulators are not supported; "
                    "fix the taps and model the device as a plain branch"
                )
            if section not in known:
                raise FeederFileError(f"{name}:{lineno}: unknown section [{section}]")
            continue
        if section is None:
            raise FeederFileError(f"{name}:{lineno}: data before any section header")
        tokens = line.split()
        try:
            if section == "base":
                if len(tokens) != 2:
                    raise ValueError("expected: <s_base|v_base> <value>")
                key, value = tokens[0].lower(), float(tokens[1])
                if key == "s_base":
                    s_base = value
                elif key == "v_base":
                    v_base = value
                else:
                    raise ValueError(f"unknown base quantity {tokens[0]!r}")
            elif section == "bus":
                if len(tokens) != 1:
                    raise ValueError("expected: <bus id>")
                buses.append(tokens[0])
            elif section == "source":
                if len(tokens) != 2:
                    raise ValueError("expected: <bus id> <v0 pu>")
                if source is not None:
                    raise ValueError("more than one source bus")
                source, v0 = tokens[0], float(tokens[1])
            elif section == "branch":
                if len(tokens) != 5:
                    raise ValueError("expected: <from> <to> <r pu> <x pu> <ampacity pu>")
                branches.append(
                    BranchSpec(
                        from_bus=tokens[0],
                        to_bus=tokens[1],
                        z=Impedance(float(tokens[2]), float(tokens[3])),
                        ampacity=float(tokens[4]),
                    )
                )
            elif section == "load":
                if len(tokens) != 3:
                    raise ValueError("expected: <bus> <p pu> <q pu>")
                bus, p, q = tokens[0], float(tokens[1]), float(tokens[2])
                if bus in loads:
                    raise ValueError(f"duplicate load at bus {bus!r}")
                loads[bus] = ComplexPower(p, q)
        except ValueError as exc:
            raise FeederFileError(f"{name}:{lineno}: {exc}") from exc
    if source is None or v0 is None:
        raise FeederFileError(f"{name}: missing [source] section")
    return FeederModel(
        buses=tuple(buses),
        branches=tuple(branches),
        loads=loads,
        source=source,
        v0=v0,
        s_base=s_base,
        v_base=v_base,
    )


def load_feeder(path) -> FeederModel:
    """Read and parse a feeder file from disk."""
    with open(path, "r", encoding="ascii") as fh:
        return parse_feeder(fh.read(), name=str(path))


def single_branch_model(
    z: Impedance,
    v0: float,
    ampacity: float = math.inf,
    load: ComplexPower | None = None,
    s_base: float | None = None,
    v_base: float | None = None,
) -> FeederModel:
    """Two-bus feeder (source "0", generator bus "g") for desk-scale studies."""
    loads = {"g": load} if load is not None else {}
    return FeederModel(
        buses=("0", "g"),
        branches=(BranchSpec("0", "g", z, ampacity),),
        loads=loads,
        source="0",
        v0=v0,
        s_base=s_base,
        v_base=v_base,
    )
