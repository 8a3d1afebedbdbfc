"""Continuous analysis: measurement ingestion, snapshots, cyclic sweeps, history.

A single latest-value table receives measurements (newest timestamp wins per
element/quantity key). Snapshots freeze the table into an adjusted model;
cycles sweep the study's contingencies over a sealed snapshot and publish the
result atomically, so readers always see the last completed cycle and
ingestion during a cycle never changes that cycle's output. Completed cycles
append one history record, persisted as line-delimited JSON and replayed on
startup.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .contingency import (
    Contingency,
    ContingencyResult,
    VoltageLimits,
    check_violations,
    rank_contingencies,
    run_contingency,
    severity_index,
)
from .network import Load, NetworkError, NetworkModel
from .powerflow import SolverSettings, solve_model
from .ras import RasEvaluation, RasPlan, evaluate_ras
from .studyio import StudySpec

logger = logging.getLogger("nca.realtime")

QUANTITIES = ("voltage_pct", "p_mw", "q_mvar", "i_amps")
DEFAULT_RETENTION_MS = 2 * 365 * 24 * 3600 * 1000  # two years of records


@dataclass(frozen=True)
class MeasurementSample:
    element: str
    quantity: str
    value: float
    timestamp: int  # milliseconds
    quality: str = "good"


@dataclass(frozen=True)
class IngestResult:
    element: str
    quantity: str
    accepted: bool
    reason: str | None = None


@dataclass(frozen=True)
class SystemSnapshot:
    """Immutable operating point: base model with measured loads substituted."""

    model: NetworkModel
    sequence: int
    as_of: int
    measured_loads: tuple[str, ...]


@dataclass(frozen=True)
class CycleResult:
    sequence: int
    as_of: int
    results: tuple[ContingencyResult, ...]
    ranking: tuple[ContingencyResult, ...]
    base_report_rows: int
    base_violations: int
    duration_ms: float


@dataclass(frozen=True)
class HistoryRecord:
    timestamp: int
    sequence: int
    total_load_mw: float
    worst_bus: str | None
    worst_voltage_pct: float | None
    top_contingency: str | None
    top_severity_index: float
    violation_counts: dict

    def to_json(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "sequence": self.sequence,
            "total_load_mw": self.total_load_mw,
            "worst_bus": self.worst_bus,
            "worst_voltage_pct": self.worst_voltage_pct,
            "top_contingency": self.top_contingency,
            "top_severity_index": self.top_severity_index,
            "violation_counts": self.violation_counts,
        }

    @staticmethod
    def from_json(doc: dict) -> "HistoryRecord":
        return HistoryRecord(
            timestamp=int(doc["timestamp"]),
            sequence=int(doc["sequence"]),
            total_load_mw=float(doc["total_load_mw"]),
            worst_bus=doc.get("worst_bus"),
            worst_voltage_pct=doc.get("worst_voltage_pct"),
            top_contingency=doc.get("top_contingency"),
            top_severity_index=float(doc.get("top_severity_index", 0.0)),
            violation_counts=dict(doc.get("violation_counts", {})),
        )


@dataclass(frozen=True)
class WhatIfRequest:
    """Operator exploration: optional contingency, optional plan, load deltas.

    ``contingency_id`` and ``plan_id`` refer to the loaded study; an inline
    ``plan`` (composed actions) may replace ``plan_id``. ``load_delta`` is a
    list of (bus, delta p MW, delta q MVAr) applied before evaluation.
    """

    contingency_id: str | None = None
    plan_id: str | None = None
    plan: RasPlan | None = None
    load_delta: tuple[tuple[str, float, float], ...] = ()


class RealtimeEngine:
    """Single-writer measurement store plus one analysis worker.

    The API surface (ingest / snapshot / cycle / what-if / history) is thread
    safe; analysis itself runs over immutable snapshot values, so only the
    latest-value table, the published cycle and the history list are guarded.
    """

    def __init__(
        self,
        model: NetworkModel,
        study: StudySpec,
        history_path: str | Path | None = None,
        retention_ms: int = DEFAULT_RETENTION_MS,
        clock=None,
    ) -> None:
        self.model = model
        self.study = study
        self.settings: SolverSettings = study.solver
        self.limits: VoltageLimits = study.limits
        self.retention_ms = retention_ms
        self._clock = clock or (lambda: int(time.time() * 1000))
        self._lock = threading.Lock()
        self._latest: dict[tuple[str, str], MeasurementSample] = {}
        self._suspect_count = 0
        self._sequence = 0
        self._latest_cycle: CycleResult | None = None
        self._history: list[HistoryRecord] = []
        self._subscribers: list = []
        self._history_path = Path(history_path) if history_path else None
        self._load_ids = {l.id for l in model.loads}
        self._bus_ids = {b.id for b in model.buses}
        if self._history_path is not None and self._history_path.exists():
            self._replay_history()

    # -- measurements -------------------------------------------------------

    def ingest(self, samples: list[MeasurementSample]) -> list[IngestResult]:
        """Accept or reject each sample; newest timestamp wins per key."""
        out = []
        with self._lock:
            for s in samples:
                if s.quantity not in QUANTITIES:
                    out.append(IngestResult(s.element, s.quantity, False, "unknown-quantity"))
                    continue
                if s.element not in self._load_ids and s.element not in self._bus_ids:
                    out.append(IngestResult(s.element, s.quantity, False, "unknown-element"))
                    continue
                value = float(s.value)
                if value != value or value in (float("inf"), float("-inf")):
                    out.append(IngestResult(s.element, s.quantity, False, "non-finite-value"))
                    continue
                if s.quality not in ("good", "suspect"):
                    out.append(IngestResult(s.element, s.quantity, False, "unknown-quality"))
                    continue
                if s.quality == "suspect":
                    self._suspect_count += 1
                key = (s.element, s.quantity)
                current = self._latest.get(key)
                if current is None or s.timestamp >= current.timestamp:
                    self._latest[key] = s
                out.append(IngestResult(s.element, s.quantity, True))
        return out

    def latest_values(self) -> dict[tuple[str, str], MeasurementSample]:
        with self._lock:
            return dict(self._latest)

    def diagnostics(self) -> dict:
        with self._lock:
            return {
                "measured_keys": len(self._latest),
                "suspect_samples": self._suspect_count,
                "sequence": self._sequence,
                "history_records": len(self._history),
            }

    # -- snapshots and cycles -----------------------------------------------

    def build_snapshot(self) -> SystemSnapshot:
        """Freeze the latest good measurements into an adjusted model.

        Loads with a good-quality measured p_mw/q_mvar take the measured
        value; everything else keeps its nominal data. Suspect samples are
        ignored here (they still count in diagnostics).
        """
        with self._lock:
            latest = dict(self._latest)
            self._sequence += 1
            sequence = self._sequence
        measured = []
        loads = []
        for load in self.model.loads:
            p = latest.get((load.id, "p_mw"))
            q = latest.get((load.id, "q_mvar"))
            new = load
            if p is not None and p.quality == "good":
                new = replace(new, p_mw=float(p.value))
            if q is not None and q.quality == "good":
                new = replace(new, q_mvar=float(q.value))
            if new is not load:
                measured.append(load.id)
            loads.append(new)
        model = replace(self.model, loads=tuple(loads))
        return SystemSnapshot(
            model=model,
            sequence=sequence,
            as_of=self._clock(),
            measured_loads=tuple(measured),
        )

    def run_cycle(self, snapshot: SystemSnapshot | None = None) -> CycleResult:
        """Sweep the study over a sealed snapshot and publish atomically."""
        if snapshot is None:
            snapshot = self.build_snapshot()
        started = time.perf_counter()
        base_solution = solve_model(snapshot.model, self.settings)
        base_report = check_violations(base_solution, snapshot.model, self.limits)
        results = tuple(
            run_contingency(snapshot.model, c, self.settings, self.limits)
            for c in self.study.contingencies
        )
        ranking = tuple(rank_contingencies(list(results)))
        cycle = CycleResult(
            sequence=snapshot.sequence,
            as_of=snapshot.as_of,
            results=results,
            ranking=ranking,
            base_report_rows=len(base_report.rows),
            base_violations=sum(
                n for c, n in base_report.counts().items() if c != "none"
            ),
            duration_ms=(time.perf_counter() - started) * 1000.0,
        )
        record = HistoryRecord(
            timestamp=snapshot.as_of,
            sequence=snapshot.sequence,
            total_load_mw=sum(l.p_mw for l in snapshot.model.loads),
            worst_bus=base_report.rows[0].bus_id if base_report.rows else None,
            worst_voltage_pct=base_report.rows[0].voltage_pct if base_report.rows else None,
            top_contingency=ranking[0].contingency_id if ranking else None,
            top_severity_index=ranking[0].severity_index if ranking else 0.0,
            violation_counts=base_report.counts(),
        )
        with self._lock:
            self._latest_cycle = cycle
            self._history.append(record)
            self._trim_history_locked()
            subscribers = list(self._subscribers)
        self._persist(record)
        for queue in subscribers:
            queue.put(cycle)
        return cycle

    def latest_cycle(self) -> CycleResult | None:
        with self._lock:
            return self._latest_cycle

    def subscribe(self):
        """Register a Queue that receives each completed CycleResult."""
        import queue as queue_mod

        q = queue_mod.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    # -- what-if --------------------------------------------------------------

    def whatif(self, request: WhatIfRequest, snapshot: SystemSnapshot | None = None) -> RasEvaluation:
        """Evaluate a hypothetical on a copy of the snapshot; never mutates live state."""
        if snapshot is None:
            snapshot = self.build_snapshot_readonly()
        model = snapshot.model
        if request.load_delta:
            loads = list(model.loads)
            for n, (bus, dp, dq) in enumerate(request.load_delta):
                if bus not in self._bus_ids:
                    raise NetworkError(f"unknown bus {bus!r}")
                loads.append(
                    Load(
                        id=f"whatif-delta-{n}",
                        bus=bus,
                        p_mw=dp,
                        q_mvar=dq,
                        group="whatif-delta",
                    )
                )
            model = replace(model, loads=tuple(loads))

        contingency = None
        if request.contingency_id is not None:
            contingency = next(
                (c for c in self.study.contingencies if c.id == request.contingency_id),
                None,
            )
            if contingency is None:
                raise NetworkError(f"unknown contingency {request.contingency_id!r}")

        plan = request.plan
        if plan is None and request.plan_id is not None:
            plan = next(
                (p for p in self.study.ras_catalog if p.id == request.plan_id), None
            )
            if plan is None:
                raise NetworkError(f"unknown plan {request.plan_id!r}")

        return evaluate_ras(model, contingency, plan, self.settings, self.limits)

    def build_snapshot_readonly(self) -> SystemSnapshot:
        """Snapshot of current values without consuming a sequence number."""
        with self._lock:
            latest = dict(self._latest)
            sequence = self._sequence
        loads = []
        measured = []
        for load in self.model.loads:
            p = latest.get((load.id, "p_mw"))
            q = latest.get((load.id, "q_mvar"))
            new = load
            if p is not None and p.quality == "good":
                new = replace(new, p_mw=float(p.value))
            if q is not None and q.quality == "good":
                new = replace(new, q_mvar=float(q.value))
            if new is not load:
                measured.append(load.id)
            loads.append(new)
        return SystemSnapshot(
            model=replace(self.model, loads=tuple(loads)),
            sequence=sequence,
            as_of=self._clock(),
            measured_loads=tuple(measured),
        )

    # -- history --------------------------------------------------------------

    def query_history(self, from_ms: int, to_ms: int) -> list[HistoryRecord]:
        if from_ms > to_ms:
            raise ValueError("history query requires from <= to")
        with self._lock:
            return [r for r in self._history if from_ms <= r.timestamp <= to_ms]

    def _trim_history_locked(self) -> None:
        cutoff = self._clock() - self.retention_ms
        while self._history and self._history[0].timestamp < cutoff:
            self._history.pop(0)

    def _persist(self, record: HistoryRecord) -> None:
        if self._history_path is None:
            return
        try:
            with self._history_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")
                fh.flush()
        except OSError as exc:
            logger.error("history append failed: %s", exc)

    def _replay_history(self) -> None:
        try:
            lines = self._history_path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            logger.error("history replay failed: %s", exc)
            return
        for line in lines:
            line = line.strip()
            if not line:
                continue
            try:
                record = HistoryRecord.from_json(json.loads(line))
            except (ValueError, KeyError) as exc:
                logger.warning("skipping bad history line: %s", exc)
                continue
            self._history.append(record)
            self._sequence = max(self._sequence, record.sequence)
        self._trim_history_locked()
        logger.info("replayed %d history records", len(self._history))


class CycleWorker:
    """Fixed-cadence analysis loop; an overrunning cycle delays the next."""

    def __init__(self, engine: RealtimeEngine, cycle_ms: int = 1000) -> None:
        self.engine = engine
        self.cycle_ms = cycle_ms
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._run, name="nca-cycle", daemon=True)
        self._thread.start()

    def stop(self, timeout: float = 10.0) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=timeout)
            self._thread = None

    def _run(self) -> None:
        while not self._stop.is_set():
            started = time.monotonic()
            try:
                self.engine.run_cycle()
            except Exception:
                logger.exception("analysis cycle failed")
            elapsed = time.monotonic() - started
            wait = max(0.0, self.cycle_ms / 1000.0 - elapsed)
            self._stop.wait(wait)
