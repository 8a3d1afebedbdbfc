"""File formats: network documents, study documents, and violation reports.

Network files (``.nca-net.json``) and study files (``.nca-study.json``) are
strict JSON: unknown fields are rejected so typos surface immediately, and
every error names the offending path. Reports render as CSV with the fixed
column set ``bus_id,nominal_kv,voltage_pct,class`` or as an equivalent JSON
document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .contingency import Contingency, ContingencyResult, VoltageLimits
from .network import (
    Branch,
    Breaker,
    Bus,
    Generator,
    Load,
    NetworkSpec,
    Transformer,
    Winding,
)
from .powerflow import SolverSettings
from .ras import RasAction, RasPlan


class DocumentError(ValueError):
    """Malformed or schema-violating document; message carries the field path."""


@dataclass(frozen=True)
class StudySpec:
    """Contingency list plus RAS catalog with optional solver/limit overrides."""

    contingencies: tuple[Contingency, ...]
    ras_catalog: tuple[RasPlan, ...]
    limits: VoltageLimits
    solver: SolverSettings


# ---------------------------------------------------------------------------
# Validation helpers

def _check_fields(obj: dict, allowed: dict[str, type | tuple], required: set[str], path: str) -> None:
    if not isinstance(obj, dict):
        raise DocumentError(f"{path}: expected an object")
    for key in obj:
        if key not in allowed:
            raise DocumentError(f"{path}.{key}: unknown field")
    for key in required:
        if key not in obj:
            raise DocumentError(f"{path}.{key}: missing required field")
    for key, value in obj.items():
        expect = allowed[key]
        if expect is float:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DocumentError(f"{path}.{key}: expected a number")
        elif expect is not None and not isinstance(value, expect):
            name = expect.__name__ if isinstance(expect, type) else "value"
            raise DocumentError(f"{path}.{key}: expected {name}")


def _num(obj: dict, key: str, default: float | None = None) -> float | None:
    if key in obj:
        return float(obj[key])
    return default


def _load_json(data: bytes, what: str) -> dict:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DocumentError(f"malformed {what} document: {exc}") from exc
    if not isinstance(doc, dict):
        raise DocumentError(f"{what} document must be a JSON object")
    return doc


# ---------------------------------------------------------------------------
# Network documents

_BUS_FIELDS = {
    "id": str, "nominal_kv": float, "kind": str, "category": str, "safety_related": bool,
}
_BRANCH_FIELDS = {
    "id": str, "from_bus": str, "to_bus": str, "r_pu": float, "x_pu": float,
    "b_pu": float, "tap_ratio": float, "rating_mva": None, "kind": str,
}
_WINDING_FIELDS = {"name": str, "bus": str, "nominal_kv": float}
_TRANSFORMER_FIELDS = {
    "id": str, "own_mva_base": float, "windings": list, "impedance_pct": dict, "taps": dict,
}
_BREAKER_FIELDS = {
    "id": str, "from_bus": str, "to_bus": str, "normal_state": str, "current_state": str,
}
_LOAD_FIELDS = {
    "id": str, "bus": str, "p_mw": float, "q_mvar": float, "group": (str, type(None)),
    "safety_related": bool,
}
_GENERATOR_FIELDS = {
    "id": str, "bus": str, "p_set_mw": float, "v_set_pu": float, "q_limits": list,
}
_NETWORK_FIELDS = {
    "name": str, "base_mva": float, "buses": list, "branches": list,
    "transformers": list, "breakers": list, "loads": list, "generators": list,
}


def _parse_rating(value, path: str) -> float | None:
    if value is None or value == "unlimited":
        return None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise DocumentError(f'{path}.rating_mva: expected a number or "unlimited"')


def parse_network_spec(doc: dict) -> NetworkSpec:
    """Validate a parsed network document and fill defaults."""
    _check_fields(doc, _NETWORK_FIELDS, {"buses"}, "network")

    buses = []
    for i, b in enumerate(doc.get("buses", [])):
        path = f"buses[{i}]"
        if isinstance(b, dict) and isinstance(b.get("id"), str):
            path = f"buses[{i}] ({b['id']})"
        _check_fields(b, _BUS_FIELDS, {"id", "nominal_kv"}, path)
        buses.append(
            Bus(
                id=b["id"],
                nominal_kv=float(b["nominal_kv"]),
                kind=b.get("kind", "pq"),
                category=b.get("category", "switchgear"),
                safety_related=b.get("safety_related", False),
            )
        )

    branches = []
    for i, br in enumerate(doc.get("branches", [])):
        path = f"branches[{i}]"
        _check_fields(br, _BRANCH_FIELDS, {"id", "from_bus", "to_bus"}, path)
        branches.append(
            Branch(
                id=br["id"],
                from_bus=br["from_bus"],
                to_bus=br["to_bus"],
                series_impedance=complex(_num(br, "r_pu", 0.0), _num(br, "x_pu", 0.0)),
                shunt_admittance=complex(0.0, _num(br, "b_pu", 0.0)),
                tap_ratio=_num(br, "tap_ratio", 1.0),
                rating_mva=_parse_rating(br.get("rating_mva"), path),
                kind=br.get("kind", "line"),
            )
        )

    transformers = []
    for i, t in enumerate(doc.get("transformers", [])):
        path = f"transformers[{i}]"
        _check_fields(t, _TRANSFORMER_FIELDS, {"id", "own_mva_base", "windings", "impedance_pct"}, path)
        windings = []
        for j, w in enumerate(t["windings"]):
            wpath = f"{path}.windings[{j}]"
            _check_fields(w, _WINDING_FIELDS, {"name", "bus", "nominal_kv"}, wpath)
            windings.append(Winding(name=w["name"], bus=w["bus"], nominal_kv=float(w["nominal_kv"])))
        impedances = []
        for pair, z in sorted(t["impedance_pct"].items()):
            if not (isinstance(z, list) and len(z) == 2):
                raise DocumentError(f"{path}.impedance_pct.{pair}: expected [r_pct, x_pct]")
            impedances.append((pair, complex(float(z[0]), float(z[1]))))
        taps = tuple(sorted((k, float(v)) for k, v in t.get("taps", {}).items()))
        transformers.append(
            Transformer(
                id=t["id"],
                own_mva_base=float(t["own_mva_base"]),
                windings=tuple(windings),
                impedance_pct=tuple(impedances),
                taps=taps,
            )
        )

    breakers = []
    for i, bk in enumerate(doc.get("breakers", [])):
        path = f"breakers[{i}]"
        _check_fields(bk, _BREAKER_FIELDS, {"id", "from_bus", "to_bus"}, path)
        normal = bk.get("normal_state", "closed")
        breakers.append(
            Breaker(
                id=bk["id"],
                from_bus=bk["from_bus"],
                to_bus=bk["to_bus"],
                normal_state=normal,
                current_state=bk.get("current_state", normal),
            )
        )

    loads = []
    for i, l in enumerate(doc.get("loads", [])):
        path = f"loads[{i}]"
        _check_fields(l, _LOAD_FIELDS, {"id", "bus", "p_mw"}, path)
        loads.append(
            Load(
                id=l["id"],
                bus=l["bus"],
                p_mw=float(l["p_mw"]),
                q_mvar=_num(l, "q_mvar", 0.0),
                group=l.get("group"),
                safety_related=l.get("safety_related", False),
            )
        )

    generators = []
    for i, g in enumerate(doc.get("generators", [])):
        path = f"generators[{i}]"
        _check_fields(g, _GENERATOR_FIELDS, {"id", "bus", "p_set_mw"}, path)
        q_limits = None
        if "q_limits" in g:
            ql = g["q_limits"]
            if not (isinstance(ql, list) and len(ql) == 2):
                raise DocumentError(f"{path}.q_limits: expected [q_min, q_max]")
            q_limits = (float(ql[0]), float(ql[1]))
        generators.append(
            Generator(
                id=g["id"],
                bus=g["bus"],
                p_set_mw=float(g["p_set_mw"]),
                v_set_pu=_num(g, "v_set_pu", 1.0),
                q_limits=q_limits,
            )
        )

    return NetworkSpec(
        name=doc.get("name", "network"),
        base_mva=_num(doc, "base_mva", 100.0),
        buses=tuple(buses),
        branches=tuple(branches),
        transformers=tuple(transformers),
        breakers=tuple(breakers),
        loads=tuple(loads),
        generators=tuple(generators),
    )


def parse_network_file(data: bytes) -> NetworkSpec:
    return parse_network_spec(_load_json(data, "network"))


def network_to_document(spec: NetworkSpec) -> dict:
    return {
        "name": spec.name,
        "base_mva": spec.base_mva,
        "buses": [
            {
                "id": b.id, "nominal_kv": b.nominal_kv, "kind": b.kind,
                "category": b.category, "safety_related": b.safety_related,
            }
            for b in spec.buses
        ],
        "branches": [
            {
                "id": br.id, "from_bus": br.from_bus, "to_bus": br.to_bus,
                "r_pu": br.series_impedance.real, "x_pu": br.series_impedance.imag,
                "b_pu": br.shunt_admittance.imag, "tap_ratio": br.tap_ratio,
                "rating_mva": "unlimited" if br.rating_mva is None else br.rating_mva,
                "kind": br.kind,
            }
            for br in spec.branches
        ],
        "transformers": [
            {
                "id": t.id, "own_mva_base": t.own_mva_base,
                "windings": [
                    {"name": w.name, "bus": w.bus, "nominal_kv": w.nominal_kv}
                    for w in t.windings
                ],
                "impedance_pct": {pair: [z.real, z.imag] for pair, z in t.impedance_pct},
                "taps": dict(t.taps),
            }
            for t in spec.transformers
        ],
        "breakers": [
            {
                "id": bk.id, "from_bus": bk.from_bus, "to_bus": bk.to_bus,
                "normal_state": bk.normal_state, "current_state": bk.current_state,
            }
            for bk in spec.breakers
        ],
        "loads": [
            {
                "id": l.id, "bus": l.bus, "p_mw": l.p_mw, "q_mvar": l.q_mvar,
                "group": l.group, "safety_related": l.safety_related,
            }
            for l in spec.loads
        ],
        "generators": [
            {
                "id": g.id, "bus": g.bus, "p_set_mw": g.p_set_mw, "v_set_pu": g.v_set_pu,
                **({"q_limits": list(g.q_limits)} if g.q_limits else {}),
            }
            for g in spec.generators
        ],
    }


def serialize_network(spec: NetworkSpec) -> bytes:
    return json.dumps(network_to_document(spec), indent=2, sort_keys=True).encode() + b"\n"


# ---------------------------------------------------------------------------
# Study documents

_CONTINGENCY_FIELDS = {
    "id": str, "kind": str, "description": str, "transformer": str, "winding": str,
    "group": str, "scale": float, "branch": str, "r_pu": float, "x_pu": float,
    "new_capacity_mw": float, "critical_floor_mw": float, "breaker": str,
}
_ACTION_FIELDS = {
    "kind": str, "breaker": str, "open": (str, type(None)), "close": str,
    "group": str, "generator": str, "p_mw": float, "note": str,
}
_PLAN_FIELDS = {
    "id": str, "intended_contingency": str, "description": str,
    "applicable_kinds": list, "actions": list,
}
_LIMIT_FIELDS = {"under_pct": float, "over_pct": float}
_SOLVER_FIELDS = {
    "tolerance": float, "max_iterations": int, "flat_start": bool,
    "enforce_q_limits": bool,
}
_STUDY_FIELDS = {"contingencies": list, "ras_catalog": list, "limits": dict, "solver": dict}


def _parse_contingency(c: dict, path: str) -> Contingency:
    _check_fields(c, _CONTINGENCY_FIELDS, {"id", "kind"}, path)
    new_impedance = None
    if "r_pu" in c or "x_pu" in c:
        new_impedance = complex(_num(c, "r_pu", 0.0), _num(c, "x_pu", 0.0))
    return Contingency(
        id=c["id"],
        kind=c["kind"],
        description=c.get("description", ""),
        transformer=c.get("transformer"),
        winding=c.get("winding"),
        group=c.get("group"),
        scale=_num(c, "scale"),
        branch=c.get("branch"),
        new_impedance=new_impedance,
        new_capacity_mw=_num(c, "new_capacity_mw"),
        critical_floor_mw=_num(c, "critical_floor_mw"),
        breaker=c.get("breaker"),
    )


def _parse_action(a: dict, path: str) -> RasAction:
    _check_fields(a, _ACTION_FIELDS, {"kind"}, path)
    return RasAction(
        kind=a["kind"],
        breaker=a.get("breaker"),
        open_breaker=a.get("open"),
        close_breaker=a.get("close"),
        group=a.get("group"),
        generator=a.get("generator"),
        p_mw=_num(a, "p_mw"),
        note=a.get("note"),
    )


def parse_study_spec(doc: dict) -> StudySpec:
    _check_fields(doc, _STUDY_FIELDS, set(), "study")

    contingencies = tuple(
        _parse_contingency(c, f"contingencies[{i}]")
        for i, c in enumerate(doc.get("contingencies", []))
    )
    known_ids = {c.id for c in contingencies}

    plans = []
    for i, p in enumerate(doc.get("ras_catalog", [])):
        path = f"ras_catalog[{i}]"
        _check_fields(p, _PLAN_FIELDS, {"id", "actions"}, path)
        intended = p.get("intended_contingency", "any")
        if intended != "any" and intended not in known_ids:
            raise DocumentError(
                f"{path}.intended_contingency: unknown contingency {intended!r}"
            )
        actions = tuple(
            _parse_action(a, f"{path}.actions[{j}]") for j, a in enumerate(p["actions"])
        )
        plans.append(
            RasPlan(
                id=p["id"],
                actions=actions,
                intended_contingency=intended,
                description=p.get("description", ""),
                applicable_kinds=tuple(p.get("applicable_kinds", [])),
            )
        )

    limits_doc = doc.get("limits", {})
    _check_fields(limits_doc, _LIMIT_FIELDS, set(), "limits")
    limits = VoltageLimits(
        under_pct=_num(limits_doc, "under_pct", 90.0),
        over_pct=_num(limits_doc, "over_pct", 110.0),
    )

    solver_doc = doc.get("solver", {})
    _check_fields(solver_doc, _SOLVER_FIELDS, set(), "solver")
    solver = SolverSettings(
        tolerance=_num(solver_doc, "tolerance", 1e-6),
        max_iterations=int(solver_doc.get("max_iterations", 50)),
        flat_start=solver_doc.get("flat_start", True),
        enforce_q_limits=solver_doc.get("enforce_q_limits", False),
    )

    return StudySpec(
        contingencies=contingencies,
        ras_catalog=tuple(plans),
        limits=limits,
        solver=solver,
    )


def parse_study_file(data: bytes) -> StudySpec:
    return parse_study_spec(_load_json(data, "study"))


def study_to_document(study: StudySpec) -> dict:
    contingencies = []
    for c in study.contingencies:
        entry: dict = {"id": c.id, "kind": c.kind}
        if c.description:
            entry["description"] = c.description
        for key, value in (
            ("transformer", c.transformer), ("winding", c.winding), ("group", c.group),
            ("scale", c.scale), ("branch", c.branch),
            ("new_capacity_mw", c.new_capacity_mw),
            ("critical_floor_mw", c.critical_floor_mw), ("breaker", c.breaker),
        ):
            if value is not None:
                entry[key] = value
        if c.new_impedance is not None:
            entry["r_pu"] = c.new_impedance.real
            entry["x_pu"] = c.new_impedance.imag
        contingencies.append(entry)

    plans = []
    for p in study.ras_catalog:
        actions = []
        for a in p.actions:
            act: dict = {"kind": a.kind}
            for key, value in (
                ("breaker", a.breaker), ("open", a.open_breaker), ("close", a.close_breaker),
                ("group", a.group), ("generator", a.generator), ("p_mw", a.p_mw),
                ("note", a.note),
            ):
                if value is not None:
                    act[key] = value
            actions.append(act)
        plans.append(
            {
                "id": p.id,
                "intended_contingency": p.intended_contingency,
                "description": p.description,
                "applicable_kinds": list(p.applicable_kinds),
                "actions": actions,
            }
        )

    return {
        "contingencies": contingencies,
        "ras_catalog": plans,
        "limits": {"under_pct": study.limits.under_pct, "over_pct": study.limits.over_pct},
        "solver": {
            "tolerance": study.solver.tolerance,
            "max_iterations": study.solver.max_iterations,
            "flat_start": study.solver.flat_start,
            "enforce_q_limits": study.solver.enforce_q_limits,
        },
    }


def serialize_study(study: StudySpec) -> bytes:
    return json.dumps(study_to_document(study), indent=2, sort_keys=True).encode() + b"\n"


# ---------------------------------------------------------------------------
# Reports

REPORT_HEADER = "bus_id,nominal_kv,voltage_pct,class"


@dataclass(frozen=True)
class ReportEntry:
    """One contingency's outcome plus its optional RAS evaluation summary."""

    result: ContingencyResult
    rank: int
    ras_plan_id: str | None = None
    ras_cleared: bool | None = None
    ras_post_severity_index: float | None = None
    ras_max_drop_pct: float | None = None


def format_number(value: float) -> str:
    """Fixed formatting with trailing zeros trimmed, so 88.6 stays 88.6."""
    text = f"{value:.4f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-0") else "0"


def _csv_report(entries: list[ReportEntry]) -> bytes:
    lines = [REPORT_HEADER]
    for entry in entries:
        r = entry.result
        meta = (
            f"# contingency: {r.contingency_id} status={r.status} "
            f"si={format_number(r.severity_index)} rank={entry.rank}"
        )
        if entry.ras_plan_id is not None:
            meta += (
                f" ras={entry.ras_plan_id}"
                f" cleared={'true' if entry.ras_cleared else 'false'}"
            )
        lines.append(meta)
        if r.capacity_screen is not None and r.capacity_screen.advisory:
            lines.append(f"# advisory: {r.capacity_screen.advisory}")
        for row in r.report.rows:
            lines.append(
                f"{row.bus_id},{format_number(row.nominal_kv)},"
                f"{format_number(row.voltage_pct)},{row.violation_class}"
            )
    return ("\n".join(lines) + "\n").encode()


def ranking_payload(results: list[ContingencyResult]) -> list[dict]:
    """Ranking as plain data, shared by the batch report and the live API."""
    return [
        {
            "rank": i + 1,
            "contingency": r.contingency_id,
            "kind": r.kind,
            "status": r.status,
            "severity_index": round(r.severity_index, 6),
            "worst_deviation": round(r.worst_deviation, 6),
            "violations": sum(
                n for c, n in r.report.counts().items() if c != "none"
            ),
        }
        for i, r in enumerate(results)
    ]


def report_document(entries: list[ReportEntry]) -> dict:
    ranked = sorted(entries, key=lambda e: e.rank)
    return {
        "ranking": ranking_payload([e.result for e in ranked]),
        "contingencies": [
            {
                "id": e.result.contingency_id,
                "kind": e.result.kind,
                "status": e.result.status,
                "severity_index": round(e.result.severity_index, 6),
                "rank": e.rank,
                "counts": e.result.report.counts(),
                **(
                    {
                        "capacity_screen": {
                            "plant_output_mw": e.result.capacity_screen.plant_output_mw,
                            "line_capacity_mw": e.result.capacity_screen.line_capacity_mw,
                            "critical_floor_mw": e.result.capacity_screen.critical_floor_mw,
                            "overload_mw": e.result.capacity_screen.overload_mw,
                            "required_curtailment_mw": e.result.capacity_screen.required_curtailment_mw,
                            "external_redispatch_mw": e.result.capacity_screen.external_redispatch_mw,
                            "critical_infrastructure_at_risk": e.result.capacity_screen.critical_infrastructure_at_risk,
                            "advisory": e.result.capacity_screen.advisory,
                        }
                    }
                    if e.result.capacity_screen is not None
                    else {}
                ),
                **(
                    {
                        "ras": {
                            "plan": e.ras_plan_id,
                            "cleared": e.ras_cleared,
                            "post_severity_index": e.ras_post_severity_index,
                            "max_drop_vs_steady_state_pct": e.ras_max_drop_pct,
                        }
                    }
                    if e.ras_plan_id is not None
                    else {}
                ),
                "rows": [
                    {
                        "bus_id": row.bus_id,
                        "nominal_kv": row.nominal_kv,
                        "voltage_pct": round(row.voltage_pct, 4),
                        "class": row.violation_class,
                    }
                    for row in e.result.report.rows
                ],
            }
            for e in entries
        ],
    }


def write_report(entries: list[ReportEntry], format: str = "csv") -> bytes:
    """Render contingency outcomes; byte-deterministic for a given input."""
    if format == "csv":
        return _csv_report(entries)
    if format == "json":
        return json.dumps(report_document(entries), indent=2, sort_keys=True).encode() + b"\n"
    raise DocumentError(f"unknown report format {format!r}")


def reference_network() -> tuple[NetworkSpec, StudySpec]:
    """The shipped self-contained study fixture (see nca.fixture)."""
    from .fixture import reference_network as _ref

    return _ref()
