"""N-1 contingency application, voltage-violation classification and ranking."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .network import NetworkError, NetworkModel, connected_islands
from .powerflow import NetworkSolution, SolverSettings, solve_model

logger = logging.getLogger("nca.contingency")

CONTINGENCY_KINDS = (
    "transformer-winding-outage",
    "load-overlay",
    "source-impedance-change",
    "line-capacity-reduction",
    "breaker-stuck-closed",
    "breaker-fail-open",
)

VIOLATION_CLASSES = ("none", "undervoltage", "overvoltage", "de-energized")


@dataclass(frozen=True)
class Contingency:
    """One N-1 failure. ``kind`` selects which optional fields apply."""

    id: str
    kind: str
    description: str = ""
    transformer: str | None = None
    winding: str | None = None
    group: str | None = None
    scale: float | None = None
    branch: str | None = None
    new_impedance: complex | None = None
    new_capacity_mw: float | None = None
    critical_floor_mw: float | None = None
    breaker: str | None = None


@dataclass(frozen=True)
class VoltageLimits:
    """Violation band as percent of nominal; boundary values are compliant."""

    under_pct: float = 90.0
    over_pct: float = 110.0

    def __post_init__(self) -> None:
        if not self.under_pct < 100.0 < self.over_pct:
            raise ValueError("limits must satisfy under < 100 < over")

    def classify(self, voltage_pct: float | None, energized: bool = True) -> str:
        if not energized or voltage_pct is None:
            return "de-energized"
        if voltage_pct < self.under_pct:
            return "undervoltage"
        if voltage_pct > self.over_pct:
            return "overvoltage"
        return "none"


@dataclass(frozen=True)
class ViolationRow:
    bus_id: str
    nominal_kv: float
    voltage_pct: float
    violation_class: str

    @property
    def deviation(self) -> float:
        """Absolute per-unit deviation from nominal (1.0 for a dead bus)."""
        return abs(self.voltage_pct / 100.0 - 1.0)


@dataclass(frozen=True)
class ViolationReport:
    """All buses with classified voltages, sorted ascending by percent then id."""

    rows: tuple[ViolationRow, ...]

    def counts(self) -> dict[str, int]:
        out = {c: 0 for c in VIOLATION_CLASSES}
        for row in self.rows:
            out[row.violation_class] += 1
        return out

    def violating_rows(self) -> tuple[ViolationRow, ...]:
        return tuple(r for r in self.rows if r.violation_class != "none")

    @property
    def clean(self) -> bool:
        return all(r.violation_class == "none" for r in self.rows)


@dataclass(frozen=True)
class CapacityScreenResult:
    """Transfer-capability screen for failures outside the electrical model."""

    plant_output_mw: float
    line_capacity_mw: float
    critical_floor_mw: float
    overload_mw: float
    required_curtailment_mw: float
    external_redispatch_mw: float
    critical_infrastructure_at_risk: bool
    advisory: str | None


@dataclass(frozen=True)
class ContingencyResult:
    contingency_id: str
    kind: str
    status: str  # converged | diverged | not-applicable
    report: ViolationReport
    severity_index: float
    worst_deviation: float
    capacity_screen: CapacityScreenResult | None = None


# ---------------------------------------------------------------------------
# Applying contingencies

def apply_contingency(model: NetworkModel, c: Contingency) -> NetworkModel:
    """Return a new model with the failure imposed; the input is unchanged."""
    if c.kind == "transformer-winding-outage":
        if c.transformer is None or c.winding is None:
            raise NetworkError(f"contingency {c.id!r}: transformer and winding required")
        xf = next((t for t in model.transformers if t.id == c.transformer), None)
        if xf is None:
            raise NetworkError(f"unknown transformer {c.transformer!r}")
        xf.winding(c.winding)  # validates the winding name
        if len(xf.windings) == 2:
            leg_id = f"{xf.id}-{''.join(w.name for w in xf.windings)}"
        else:
            leg_id = f"{xf.id}-{c.winding}"
        branches = tuple(br for br in model.branches if br.id != leg_id)
        if len(branches) == len(model.branches):
            raise NetworkError(f"transformer leg {leg_id!r} not present in model")
        return replace(model, branches=branches)

    if c.kind == "load-overlay":
        if c.group is None or c.scale is None:
            raise NetworkError(f"contingency {c.id!r}: group and scale required")
        if not any(l.group == c.group for l in model.loads):
            raise NetworkError(f"no loads in group {c.group!r}")
        loads = tuple(
            replace(l, p_mw=l.p_mw * c.scale, q_mvar=l.q_mvar * c.scale)
            if l.group == c.group
            else l
            for l in model.loads
        )
        return replace(model, loads=loads)

    if c.kind == "source-impedance-change":
        if c.branch is None or c.new_impedance is None:
            raise NetworkError(f"contingency {c.id!r}: branch and new impedance required")
        target = model.branch(c.branch)
        if target.kind != "source-thevenin":
            raise NetworkError(
                f"contingency {c.id!r}: branch {c.branch!r} is not a source-thevenin branch"
            )
        branches = tuple(
            replace(br, series_impedance=c.new_impedance) if br.id == c.branch else br
            for br in model.branches
        )
        return replace(model, branches=branches)

    if c.kind == "line-capacity-reduction":
        if c.branch is None or c.new_capacity_mw is None:
            raise NetworkError(f"contingency {c.id!r}: branch and new capacity required")
        model.branch(c.branch)
        branches = tuple(
            replace(br, rating_mva=c.new_capacity_mw) if br.id == c.branch else br
            for br in model.branches
        )
        return replace(model, branches=branches)

    if c.kind == "breaker-stuck-closed":
        if c.breaker is None:
            raise NetworkError(f"contingency {c.id!r}: breaker required")
        bk = model.breaker(c.breaker)
        if bk.current_state == "closed" and bk.normal_state == "closed":
            logger.warning(
                "contingency %s: breaker %s already closed and normal; no-op", c.id, c.breaker
            )
            return model
        breakers = tuple(
            replace(b, current_state="closed") if b.id == c.breaker else b
            for b in model.breakers
        )
        return replace(model, breakers=breakers)

    if c.kind == "breaker-fail-open":
        if c.breaker is None:
            raise NetworkError(f"contingency {c.id!r}: breaker required")
        model.breaker(c.breaker)
        breakers = tuple(
            replace(b, current_state="open") if b.id == c.breaker else b
            for b in model.breakers
        )
        return replace(model, breakers=breakers)

    raise NetworkError(f"unknown contingency kind {c.kind!r}")


# ---------------------------------------------------------------------------
# Violation checking and severity

def check_violations(
    solution: NetworkSolution, model: NetworkModel, limits: VoltageLimits | None = None
) -> ViolationReport:
    """Classify every bus voltage against the limits.

    voltage_pct = 100 * |V| pu * (V_base / nominal_kv); the solve base per
    level is the bus nominal voltage, so a compliant bus reads near 100.
    De-energized buses read exactly 0. Buses inside a diverged island carry
    no voltage and contribute no row.
    """
    limits = limits or VoltageLimits()
    rows = []
    dead = set(solution.de_energized_buses)
    for bus in model.buses:
        if bus.id in dead:
            rows.append(ViolationRow(bus.id, bus.nominal_kv, 0.0, "de-energized"))
            continue
        pct = solution.voltage_pct(bus.id)
        if pct is None:
            continue
        rows.append(ViolationRow(bus.id, bus.nominal_kv, pct, limits.classify(pct)))
    rows.sort(key=lambda r: (r.voltage_pct, r.bus_id))
    return ViolationReport(rows=tuple(rows))


def severity_index(report: ViolationReport) -> float:
    """Sum over buses of voltage deviation beyond the 10% band, in band units.

    SI = sum_b max(0, dev_b - 0.10) / 0.10 with dev_b = | |V_b|/V_nom - 1 |;
    a de-energized bus (dev 1.0) contributes 9.0. Zero iff fully compliant.
    """
    return sum(max(0.0, row.deviation - 0.10) / 0.10 for row in report.rows)


def worst_deviation(report: ViolationReport) -> float:
    return max((row.deviation for row in report.rows), default=0.0)


def screen_capacity(
    plant_output_mw: float, line_capacity_mw: float, critical_floor_mw: float
) -> CapacityScreenResult:
    """Compare plant output against a reduced transfer capacity.

    Overload must be curtailed at the plant; an equal amount of external
    redispatch is recommended to keep served load whole. Capacity below the
    critical-infrastructure floor raises a grid-operator advisory.
    """
    if min(plant_output_mw, line_capacity_mw, critical_floor_mw) < 0:
        raise ValueError("capacity screen arguments must be nonnegative")
    overload = max(0.0, plant_output_mw - line_capacity_mw)
    at_risk = line_capacity_mw < critical_floor_mw
    advisory = None
    if at_risk:
        advisory = (
            f"critical-infrastructure at risk: capacity {line_capacity_mw:g} MW is below "
            f"the {critical_floor_mw:g} MW floor; contact grid operators to increase "
            "production elsewhere"
        )
    elif overload > 0:
        advisory = (
            f"curtail {overload:g} MW to match line capacity; request external "
            f"redispatch of {overload:g} MW"
        )
    return CapacityScreenResult(
        plant_output_mw=plant_output_mw,
        line_capacity_mw=line_capacity_mw,
        critical_floor_mw=critical_floor_mw,
        overload_mw=overload,
        required_curtailment_mw=overload,
        external_redispatch_mw=overload,
        critical_infrastructure_at_risk=at_risk,
        advisory=advisory,
    )


def run_contingency(
    model: NetworkModel,
    c: Contingency,
    settings: SolverSettings | None = None,
    limits: VoltageLimits | None = None,
) -> ContingencyResult:
    """Impose the failure, re-solve each energized island, classify and score.

    The base model value is never touched. Solver divergence is reported in
    the result status rather than raised. A line-capacity reduction leaves the
    electrical model unchanged, so it reports status not-applicable alongside
    its capacity screen.
    """
    changed = apply_contingency(model, c)
    solution = solve_model(changed, settings)
    report = check_violations(solution, changed, limits)

    screen = None
    status = "converged" if solution.converged else "diverged"
    if c.kind == "line-capacity-reduction":
        # Only generation electrically connected to the rated line can load it.
        line = changed.branch(c.branch)
        island = next(
            i for i in connected_islands(changed) if line.from_bus in i.buses
        )
        plant_output = sum(
            g.p_set_mw for g in changed.generators if g.bus in island.buses
        )
        screen = screen_capacity(
            plant_output,
            c.new_capacity_mw or 0.0,
            c.critical_floor_mw if c.critical_floor_mw is not None else 0.0,
        )
        status = "not-applicable"

    return ContingencyResult(
        contingency_id=c.id,
        kind=c.kind,
        status=status,
        report=report,
        severity_index=severity_index(report),
        worst_deviation=worst_deviation(report),
        capacity_screen=screen,
    )


def rank_contingencies(results: list[ContingencyResult]) -> list[ContingencyResult]:
    """Order results most severe first.

    Diverged results outrank everything (no operating point is worse than any
    violation); the rest sort by severity index descending, then worst single
    deviation, then contingency id for a stable, deterministic order.
    """
    return sorted(
        results,
        key=lambda r: (
            0 if r.status == "diverged" else 1,
            -r.severity_index,
            -r.worst_deviation,
            r.contingency_id,
        ),
    )
