"""Remedial action schemes: apply a plan after a contingency and quantify the fix."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .contingency import (
    Contingency,
    ContingencyResult,
    ViolationReport,
    VoltageLimits,
    apply_contingency,
    check_violations,
    severity_index,
)
from .network import NetworkError, NetworkModel, apply_switching
from .powerflow import SolverSettings, solve_model

ACTION_KINDS = (
    "open-breaker",
    "close-breaker",
    "fast-bus-transfer",
    "shed-load-group",
    "redispatch",
    "temporary-feed",
)


@dataclass(frozen=True)
class RasAction:
    """One corrective step; ``kind`` selects which optional fields apply.

    fast-bus-transfer is atomic: both breakers are validated before either
    switches. temporary-feed may omit the open side when the temporary source
    is paralleled rather than swapped in.
    """

    kind: str
    breaker: str | None = None
    open_breaker: str | None = None
    close_breaker: str | None = None
    group: str | None = None
    generator: str | None = None
    p_mw: float | None = None
    note: str | None = None

    @staticmethod
    def open_(breaker: str) -> "RasAction":
        return RasAction(kind="open-breaker", breaker=breaker)

    @staticmethod
    def close(breaker: str) -> "RasAction":
        return RasAction(kind="close-breaker", breaker=breaker)

    @staticmethod
    def fast_bus_transfer(open_breaker: str, close_breaker: str) -> "RasAction":
        return RasAction(
            kind="fast-bus-transfer", open_breaker=open_breaker, close_breaker=close_breaker
        )

    @staticmethod
    def shed_group(group: str) -> "RasAction":
        return RasAction(kind="shed-load-group", group=group)

    @staticmethod
    def redispatch(generator: str, p_mw: float) -> "RasAction":
        return RasAction(kind="redispatch", generator=generator, p_mw=p_mw)

    @staticmethod
    def temporary_feed(close_breaker: str, open_breaker: str | None = None,
                       note: str | None = None) -> "RasAction":
        return RasAction(
            kind="temporary-feed",
            open_breaker=open_breaker,
            close_breaker=close_breaker,
            note=note,
        )


@dataclass(frozen=True)
class RasPlan:
    """Ordered corrective actions tied to a contingency (or "any")."""

    id: str
    actions: tuple[RasAction, ...]
    intended_contingency: str = "any"
    description: str = ""
    applicable_kinds: tuple[str, ...] = ()

    def applies_to(self, contingency_id: str, kind: str) -> bool:
        if self.intended_contingency in ("any", contingency_id):
            return True
        return kind in self.applicable_kinds


@dataclass(frozen=True)
class RasEvaluation:
    """Before/after violation picture for one plan applied after a contingency."""

    contingency_id: str | None
    plan_id: str | None
    violations_before: ViolationReport
    violations_after: ViolationReport
    cleared: bool
    max_drop_vs_steady_state_pct: float
    steady_state_status: str
    contingency_status: str
    post_ras_status: str

    @property
    def post_severity_index(self) -> float:
        return severity_index(self.violations_after)


NULL_PLAN = RasPlan(id="null", actions=(), description="no action")


def _apply_action(model: NetworkModel, action: RasAction) -> NetworkModel:
    if action.kind == "open-breaker":
        if action.breaker is None:
            raise NetworkError("open-breaker action requires a breaker")
        return apply_switching(model, [("open", action.breaker)])

    if action.kind == "close-breaker":
        if action.breaker is None:
            raise NetworkError("close-breaker action requires a breaker")
        return apply_switching(model, [("close", action.breaker)])

    if action.kind == "fast-bus-transfer":
        if action.open_breaker is None or action.close_breaker is None:
            raise NetworkError("fast-bus-transfer requires both breakers")
        # Validate both before switching either, so the transfer is atomic.
        model.breaker(action.open_breaker)
        model.breaker(action.close_breaker)
        return apply_switching(
            model, [("open", action.open_breaker), ("close", action.close_breaker)]
        )

    if action.kind == "shed-load-group":
        if action.group is None:
            raise NetworkError("shed-load-group requires a group")
        if not any(l.group == action.group for l in model.loads):
            raise NetworkError(f"no loads in group {action.group!r}")
        return replace(
            model, loads=tuple(l for l in model.loads if l.group != action.group)
        )

    if action.kind == "redispatch":
        if action.generator is None or action.p_mw is None:
            raise NetworkError("redispatch requires generator and p_mw")
        if not any(g.id == action.generator for g in model.generators):
            raise NetworkError(f"unknown generator {action.generator!r}")
        return replace(
            model,
            generators=tuple(
                replace(g, p_set_mw=action.p_mw) if g.id == action.generator else g
                for g in model.generators
            ),
        )

    if action.kind == "temporary-feed":
        if action.close_breaker is None:
            raise NetworkError("temporary-feed requires a breaker to close")
        model.breaker(action.close_breaker)
        steps: list[tuple[str, str]] = []
        if action.open_breaker is not None:
            model.breaker(action.open_breaker)
            steps.append(("open", action.open_breaker))
        steps.append(("close", action.close_breaker))
        return apply_switching(model, steps)

    raise NetworkError(f"unknown action kind {action.kind!r}")


def apply_ras(model: NetworkModel, plan: RasPlan) -> NetworkModel:
    """Apply the plan's actions in order, returning a new model value."""
    out = model
    for action in plan.actions:
        out = _apply_action(out, action)
    return out


def _status(solution) -> str:
    return "converged" if solution.converged else "diverged"


def evaluate_ras(
    base_model: NetworkModel,
    contingency: Contingency | None,
    plan: RasPlan | None,
    settings: SolverSettings | None = None,
    limits: VoltageLimits | None = None,
) -> RasEvaluation:
    """Solve steady state, the contingency state, and the post-plan state.

    ``cleared`` means no violating rows remain after the plan. The drop metric
    is the worst (steady-state percent minus post-plan percent) over buses,
    positive when the plan leaves a bus lower than it started.
    """
    limits = limits or VoltageLimits()
    steady = solve_model(base_model, settings)
    steady_report = check_violations(steady, base_model, limits)

    model_c = apply_contingency(base_model, contingency) if contingency else base_model
    sol_c = solve_model(model_c, settings)
    before = check_violations(sol_c, model_c, limits)

    if plan is not None and plan.actions:
        model_r = apply_ras(model_c, plan)
        sol_r = solve_model(model_r, settings)
        after = check_violations(sol_r, model_r, limits)
        post_status = _status(sol_r)
    else:
        after = before
        post_status = _status(sol_c)

    steady_pct = {r.bus_id: r.voltage_pct for r in steady_report.rows}
    max_drop = 0.0
    for row in after.rows:
        if row.bus_id in steady_pct:
            max_drop = max(max_drop, steady_pct[row.bus_id] - row.voltage_pct)

    return RasEvaluation(
        contingency_id=contingency.id if contingency else None,
        plan_id=plan.id if plan else None,
        violations_before=before,
        violations_after=after,
        cleared=after.clean,
        max_drop_vs_steady_state_pct=max_drop,
        steady_state_status=_status(steady),
        contingency_status=_status(sol_c),
        post_ras_status=post_status,
    )


def _sheds_safety_related(model: NetworkModel, plan: RasPlan) -> bool:
    for action in plan.actions:
        if action.kind == "shed-load-group":
            if any(
                l.safety_related and l.group == action.group for l in model.loads
            ):
                return True
    return False


def suggest_ras(
    base_model: NetworkModel,
    contingency: Contingency,
    result: ContingencyResult,
    catalog: list[RasPlan],
    settings: SolverSettings | None = None,
    limits: VoltageLimits | None = None,
) -> list[tuple[RasPlan, RasEvaluation]]:
    """Evaluate applicable catalog plans and order them best first.

    Ordering is ascending post-plan severity index; plans that shed
    safety-related load rank after non-safety alternatives of equal severity,
    with plan id as the final tie-break.
    """
    candidates = [
        p for p in catalog if p.applies_to(result.contingency_id, result.kind)
    ]
    evaluated = [
        (plan, evaluate_ras(base_model, contingency, plan, settings, limits))
        for plan in candidates
    ]
    evaluated.sort(
        key=lambda pe: (
            pe[1].post_severity_index,
            _sheds_safety_related(base_model, pe[0]),
            pe[0].id,
        )
    )
    return evaluated
