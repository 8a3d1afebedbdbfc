"""Command-line front door: batch studies, input verification, and the live service.

Exit codes: 0 success with no violations, 1 violations found, 2 solver
non-convergence, 3 input error. The highest-severity applicable code wins.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .contingency import rank_contingencies, run_contingency
from .network import NetworkError, build_network
from .powerflow import PowerFlowError, solve_model
from .ras import evaluate_ras
from .realtime import RealtimeEngine
from .service import create_app, ranking_bytes
from .studyio import (
    DocumentError,
    ReportEntry,
    parse_network_file,
    parse_study_file,
    reference_network,
    write_report,
)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_NO_CONVERGENCE = 2
EXIT_INPUT_ERROR = 3


def _configure_logging() -> None:
    level = os.environ.get("NCA_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _load_inputs(network_path: str | None, study_path: str | None, fixture: bool):
    if fixture:
        spec, study = reference_network()
        if network_path:
            spec = parse_network_file(Path(network_path).read_bytes())
        if study_path:
            study = parse_study_file(Path(study_path).read_bytes())
        return spec, study
    if not network_path or not study_path:
        raise DocumentError("--network and --study are required unless --fixture is set")
    return (
        parse_network_file(Path(network_path).read_bytes()),
        parse_study_file(Path(study_path).read_bytes()),
    )


def _sweep(model, study, workers: int):
    """Contingency sweep; results merged in study order regardless of workers."""
    if workers <= 1:
        return [
            run_contingency(model, c, study.solver, study.limits)
            for c in study.contingencies
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(run_contingency, model, c, study.solver, study.limits)
            for c in study.contingencies
        ]
        return [f.result() for f in futures]


@click.group()
def main() -> None:
    """Contingency analysis for plant auxiliary power networks."""
    _configure_logging()


@main.command()
@click.option("--network", "network_path", type=click.Path(), help="Network file (.nca-net.json)")
@click.option("--study", "study_path", type=click.Path(), help="Study file (.nca-study.json)")
@click.option("--out", "out_path", type=click.Path(), required=True, help="Report output path")
@click.option("--format", "format_", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--fixture", is_flag=True, help="Use the built-in reference network and study")
@click.option("--workers", type=int, default=1, show_default=True, help="Sweep worker threads")
def run(network_path, study_path, out_path, format_, fixture, workers) -> None:
    """Run the full study: sweep, RAS evaluations, ranked report."""
    try:
        spec, study = _load_inputs(network_path, study_path, fixture)
        model = build_network(spec)
    except (DocumentError, NetworkError, OSError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)

    try:
        base = solve_model(model, study.solver)
    except PowerFlowError as exc:
        click.echo(f"solver error: {exc}", err=True)
        sys.exit(EXIT_NO_CONVERGENCE)
    if not base.converged:
        click.echo("base case did not converge", err=True)
        sys.exit(EXIT_NO_CONVERGENCE)

    results = _sweep(model, study, workers)
    ranked = rank_contingencies(results)
    rank_of = {r.contingency_id: i + 1 for i, r in enumerate(ranked)}

    entries = []
    evaluations = {}
    for c in study.contingencies:
        result = next(r for r in results if r.contingency_id == c.id)
        plan = next(
            (p for p in study.ras_catalog if p.intended_contingency == c.id), None
        ) or next(
            (p for p in study.ras_catalog if p.intended_contingency == "any"), None
        )
        entry_kwargs = {}
        if plan is not None:
            evaluation = evaluate_ras(model, c, plan, study.solver, study.limits)
            evaluations[c.id] = (plan.id, evaluation)
            entry_kwargs = {
                "ras_plan_id": plan.id,
                "ras_cleared": evaluation.cleared,
                "ras_post_severity_index": round(evaluation.post_severity_index, 6),
                "ras_max_drop_pct": round(evaluation.max_drop_vs_steady_state_pct, 4),
            }
        entries.append(ReportEntry(result=result, rank=rank_of[c.id], **entry_kwargs))

    Path(out_path).write_bytes(write_report(entries, format_))

    click.echo(f"ranking ({len(ranked)} contingencies):")
    for i, r in enumerate(ranked, start=1):
        ras_note = ""
        if r.contingency_id in evaluations:
            plan_id, evaluation = evaluations[r.contingency_id]
            ras_note = f"  ras={plan_id} cleared={'yes' if evaluation.cleared else 'no'}"
        click.echo(
            f"  {i}. {r.contingency_id}  si={r.severity_index:.3f} "
            f"status={r.status}{ras_note}"
        )
    click.echo(f"ranking-json: {ranking_bytes(ranked).decode()}")

    if any(r.status == "diverged" for r in results):
        sys.exit(EXIT_NO_CONVERGENCE)
    if any(r.severity_index > 0 for r in results):
        sys.exit(EXIT_VIOLATIONS)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--network", "network_path", type=click.Path(), help="Network file")
@click.option("--study", "study_path", type=click.Path(), help="Study file")
@click.option("--fixture", is_flag=True, help="Verify the built-in fixture")
def verify(network_path, study_path, fixture) -> None:
    """Parse and validate inputs without solving."""
    try:
        spec, study = _load_inputs(network_path, study_path, fixture)
        model = build_network(spec)
    except (DocumentError, NetworkError, OSError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    click.echo(
        f"ok: {model.name}: {len(model.buses)} buses, {len(model.branches)} branches, "
        f"{len(model.breakers)} breakers, {len(study.contingencies)} contingencies, "
        f"{len(study.ras_catalog)} plans"
    )
    sys.exit(EXIT_OK)


@main.command()
@click.option("--network", "network_path", type=click.Path(), help="Network file")
@click.option("--study", "study_path", type=click.Path(), help="Study file")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--cycle-ms", type=int, default=1000, show_default=True)
@click.option("--history", "history_path", type=click.Path(), default=None,
              help="Append-only history file, replayed on startup")
@click.option("--fixture", is_flag=True, help="Serve the built-in reference network")
@click.option("--console", "console_dir", type=click.Path(), default=None,
              help="Directory with the built operator console (served at /console)")
def serve(network_path, study_path, port, host, cycle_ms, history_path, fixture,
          console_dir) -> None:
    """Run the realtime analysis service until interrupted."""
    import uvicorn

    try:
        spec, study = _load_inputs(network_path, study_path, fixture)
        model = build_network(spec)
    except (DocumentError, NetworkError, OSError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)

    engine = RealtimeEngine(model, study, history_path=history_path)
    app = create_app(engine, cycle_ms=cycle_ms, console_dir=console_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        if isinstance(exc, SystemExit) and not exc.code:
            return
        click.echo(f"bind error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)


@main.command("export-fixture")
@click.option("--dir", "out_dir", type=click.Path(), default=".", show_default=True)
def export_fixture(out_dir) -> None:
    """Write the built-in fixture to <dir>/reference.nca-net.json and .nca-study.json."""
    from .studyio import serialize_network, serialize_study

    spec, study = reference_network()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    net_path = out / "reference.nca-net.json"
    study_path = out / "reference.nca-study.json"
    net_path.write_bytes(serialize_network(spec))
    study_path.write_bytes(serialize_study(study))
    click.echo(f"wrote {net_path} and {study_path}")


if __name__ == "__main__":
    main()
