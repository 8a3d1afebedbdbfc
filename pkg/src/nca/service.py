"""HTTP + SSE front end over the realtime engine.

All endpoints speak the JSON mirrors of the domain types; timestamps are
integer milliseconds. The ranking endpoint returns the exact bytes the batch
report writer produces for the same results, so batch and live output can be
compared byte for byte.
"""

from __future__ import annotations

import json
import queue as queue_mod
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Iterator

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import Response, StreamingResponse
from pydantic import BaseModel, Field

from .contingency import ContingencyResult
from .network import NetworkError
from .ras import RasAction, RasEvaluation, RasPlan
from .realtime import CycleWorker, MeasurementSample, RealtimeEngine, WhatIfRequest
from .studyio import ranking_payload


# ---------------------------------------------------------------------------
# Wire models

class SampleIn(BaseModel):
    element: str
    quantity: str
    value: float
    timestamp: int
    quality: str = "good"


class MeasurementBatch(BaseModel):
    samples: list[SampleIn]


class SampleStatus(BaseModel):
    element: str
    quantity: str
    accepted: bool
    reason: str | None = None


class MeasurementResponse(BaseModel):
    results: list[SampleStatus]


class SnapshotSummary(BaseModel):
    sequence: int
    as_of: int
    total_load_mw: float
    measured_loads: list[str]
    measured_keys: int
    suspect_samples: int


class ViolationRowOut(BaseModel):
    bus_id: str
    nominal_kv: float
    voltage_pct: float
    violation_class: str = Field(alias="class")

    model_config = {"populate_by_name": True}


class ContingencyReportOut(BaseModel):
    contingency: str
    kind: str
    status: str
    severity_index: float
    counts: dict[str, int]
    rows: list[ViolationRowOut]


class ViolationsResponse(BaseModel):
    sequence: int
    as_of: int
    contingencies: list[ContingencyReportOut]


class ActionIn(BaseModel):
    kind: str
    breaker: str | None = None
    open: str | None = None
    close: str | None = None
    group: str | None = None
    generator: str | None = None
    p_mw: float | None = None
    note: str | None = None


class LoadDeltaIn(BaseModel):
    bus: str
    delta_p_mw: float = 0.0
    delta_q_mvar: float = 0.0


class WhatIfIn(BaseModel):
    contingency: str | None = None
    ras_plan: str | None = None
    actions: list[ActionIn] | None = None
    load_delta: list[LoadDeltaIn] = Field(default_factory=list)


class RasEvaluationOut(BaseModel):
    contingency: str | None
    plan: str | None
    cleared: bool
    max_drop_vs_steady_state_pct: float
    statuses: dict[str, str]
    post_severity_index: float
    violations_before: list[ViolationRowOut]
    violations_after: list[ViolationRowOut]
    counts_before: dict[str, int]
    counts_after: dict[str, int]


class HistoryRecordOut(BaseModel):
    timestamp: int
    sequence: int
    total_load_mw: float
    worst_bus: str | None
    worst_voltage_pct: float | None
    top_contingency: str | None
    top_severity_index: float
    violation_counts: dict[str, int]


class ModelInfo(BaseModel):
    name: str
    buses: list[str]
    breakers: list[str]
    generators: list[str]
    load_groups: list[str]
    loads: list[str]
    contingencies: list[dict]
    plans: list[dict]


# ---------------------------------------------------------------------------
# Serialization helpers

def _rows_out(report) -> list[ViolationRowOut]:
    return [
        ViolationRowOut(
            bus_id=r.bus_id,
            nominal_kv=r.nominal_kv,
            voltage_pct=round(r.voltage_pct, 4),
            violation_class=r.violation_class,
        )
        for r in report.rows
    ]


def _contingency_out(result: ContingencyResult) -> ContingencyReportOut:
    return ContingencyReportOut(
        contingency=result.contingency_id,
        kind=result.kind,
        status=result.status,
        severity_index=round(result.severity_index, 6),
        counts=result.report.counts(),
        rows=_rows_out(result.report),
    )


def _evaluation_out(ev: RasEvaluation) -> RasEvaluationOut:
    return RasEvaluationOut(
        contingency=ev.contingency_id,
        plan=ev.plan_id,
        cleared=ev.cleared,
        max_drop_vs_steady_state_pct=round(ev.max_drop_vs_steady_state_pct, 4),
        statuses={
            "steady_state": ev.steady_state_status,
            "contingency": ev.contingency_status,
            "post_ras": ev.post_ras_status,
        },
        post_severity_index=round(ev.post_severity_index, 6),
        violations_before=_rows_out(ev.violations_before),
        violations_after=_rows_out(ev.violations_after),
        counts_before=ev.violations_before.counts(),
        counts_after=ev.violations_after.counts(),
    )


def ranking_bytes(results) -> bytes:
    """Canonical ranking JSON; identical bytes for batch and live paths."""
    return json.dumps(ranking_payload(list(results)), sort_keys=True).encode()


def _parse_inline_actions(actions: list[ActionIn]) -> RasPlan:
    return RasPlan(
        id="whatif-inline",
        actions=tuple(
            RasAction(
                kind=a.kind,
                breaker=a.breaker,
                open_breaker=a.open,
                close_breaker=a.close,
                group=a.group,
                generator=a.generator,
                p_mw=a.p_mw,
                note=a.note,
            )
            for a in actions
        ),
        description="inline what-if plan",
    )


# ---------------------------------------------------------------------------
# Application

def create_app(
    engine: RealtimeEngine,
    cycle_ms: int | None = None,
    console_dir: str | Path | None = None,
) -> FastAPI:
    """Wire the engine behind the HTTP interface.

    When ``cycle_ms`` is given, a background worker runs analysis cycles for
    the app's lifetime; otherwise cycles are driven by the caller (tests, or
    one-shot tools). ``console_dir`` optionally serves a built operator
    console at /console.
    """
    worker = CycleWorker(engine, cycle_ms) if cycle_ms else None

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        if worker is not None:
            worker.start()
        yield
        if worker is not None:
            worker.stop()

    app = FastAPI(title="nca", version="0.1.0", lifespan=lifespan)
    app.state.engine = engine
    app.state.worker = worker

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "model": engine.model.name}

    @app.post("/api/measurements", response_model=MeasurementResponse)
    def post_measurements(batch: MeasurementBatch) -> MeasurementResponse:
        samples = [
            MeasurementSample(
                element=s.element,
                quantity=s.quantity,
                value=s.value,
                timestamp=s.timestamp,
                quality=s.quality,
            )
            for s in batch.samples
        ]
        results = engine.ingest(samples)
        return MeasurementResponse(
            results=[
                SampleStatus(
                    element=r.element, quantity=r.quantity,
                    accepted=r.accepted, reason=r.reason,
                )
                for r in results
            ]
        )

    @app.get("/api/snapshot", response_model=SnapshotSummary)
    def get_snapshot() -> SnapshotSummary:
        snap = engine.build_snapshot_readonly()
        diag = engine.diagnostics()
        return SnapshotSummary(
            sequence=snap.sequence,
            as_of=snap.as_of,
            total_load_mw=round(sum(l.p_mw for l in snap.model.loads), 6),
            measured_loads=list(snap.measured_loads),
            measured_keys=diag["measured_keys"],
            suspect_samples=diag["suspect_samples"],
        )

    @app.get("/api/violations", response_model=ViolationsResponse)
    def get_violations() -> ViolationsResponse:
        cycle = engine.latest_cycle()
        if cycle is None:
            raise HTTPException(status_code=503, detail="no completed cycle yet")
        return ViolationsResponse(
            sequence=cycle.sequence,
            as_of=cycle.as_of,
            contingencies=[_contingency_out(r) for r in cycle.results],
        )

    @app.get("/api/ranking")
    def get_ranking() -> Response:
        cycle = engine.latest_cycle()
        if cycle is None:
            raise HTTPException(status_code=503, detail="no completed cycle yet")
        return Response(content=ranking_bytes(cycle.ranking), media_type="application/json")

    @app.post("/api/whatif", response_model=RasEvaluationOut)
    def post_whatif(body: WhatIfIn) -> RasEvaluationOut:
        plan = _parse_inline_actions(body.actions) if body.actions else None
        request = WhatIfRequest(
            contingency_id=body.contingency,
            plan_id=body.ras_plan if plan is None else None,
            plan=plan,
            load_delta=tuple(
                (d.bus, d.delta_p_mw, d.delta_q_mvar) for d in body.load_delta
            ),
        )
        try:
            evaluation = engine.whatif(request)
        except NetworkError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return _evaluation_out(evaluation)

    @app.get("/api/history", response_model=list[HistoryRecordOut])
    def get_history(
        from_: int = Query(default=0, alias="from"),
        to: int = Query(default=2**62),
    ) -> list[HistoryRecordOut]:
        if from_ > to:
            raise HTTPException(status_code=422, detail="from must be <= to")
        return [
            HistoryRecordOut(**r.to_json()) for r in engine.query_history(from_, to)
        ]

    @app.get("/api/model", response_model=ModelInfo)
    def get_model() -> ModelInfo:
        model = engine.model
        return ModelInfo(
            name=model.name,
            buses=[b.id for b in model.buses],
            breakers=[b.id for b in model.breakers],
            generators=[g.id for g in model.generators],
            load_groups=sorted({l.group for l in model.loads if l.group}),
            loads=[l.id for l in model.loads],
            contingencies=[
                {"id": c.id, "kind": c.kind, "description": c.description}
                for c in engine.study.contingencies
            ],
            plans=[
                {
                    "id": p.id,
                    "intended_contingency": p.intended_contingency,
                    "description": p.description,
                }
                for p in engine.study.ras_catalog
            ],
        )

    @app.get("/api/stream")
    def stream(request: Request) -> StreamingResponse:
        q = engine.subscribe()

        def events() -> Iterator[str]:
            try:
                last = engine.latest_cycle()
                if last is not None:
                    yield _sse_event(last)
                while True:
                    try:
                        cycle = q.get(timeout=15.0)
                    except queue_mod.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield _sse_event(cycle)
            finally:
                engine.unsubscribe(q)

        return StreamingResponse(
            events(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    if console_dir is not None and Path(console_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=str(console_dir), html=True), name="console")

    return app


def _sse_event(cycle) -> str:
    top = cycle.ranking[0] if cycle.ranking else None
    payload = {
        "sequence": cycle.sequence,
        "as_of": cycle.as_of,
        "duration_ms": round(cycle.duration_ms, 3),
        "base_violations": cycle.base_violations,
        "top_contingency": top.contingency_id if top else None,
        "top_severity_index": round(top.severity_index, 6) if top else 0.0,
    }
    return f"event: cycle\ndata: {json.dumps(payload, sort_keys=True)}\n\n"
