"""Contingency analysis for nuclear-plant-style electrical distribution networks."""

from .contingency import (
    Contingency,
    ContingencyResult,
    VoltageLimits,
    apply_contingency,
    check_violations,
    rank_contingencies,
    run_contingency,
    screen_capacity,
    severity_index,
)
from .network import (
    Branch,
    Breaker,
    Bus,
    Generator,
    Island,
    Load,
    NetworkError,
    NetworkModel,
    NetworkSpec,
    Transformer,
    Winding,
    apply_switching,
    build_network,
    connected_islands,
)
from .powerflow import (
    NetworkSolution,
    PowerFlowSolution,
    SolverSettings,
    build_ybus,
    solve_gauss_seidel,
    solve_model,
    solve_newton_raphson,
)
from .ras import RasAction, RasPlan, apply_ras, evaluate_ras, suggest_ras
from .realtime import (
    MeasurementSample,
    RealtimeEngine,
    SystemSnapshot,
    WhatIfRequest,
)
from .studyio import (
    StudySpec,
    parse_network_file,
    parse_study_file,
    reference_network,
    serialize_network,
    serialize_study,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "Branch", "Breaker", "Bus", "Contingency", "ContingencyResult", "Generator",
    "Island", "Load", "NetworkError", "NetworkModel", "NetworkSolution",
    "NetworkSpec", "PowerFlowSolution", "RasAction", "RasPlan", "SolverSettings",
    "StudySpec", "Transformer", "VoltageLimits", "Winding", "apply_contingency",
    "apply_ras", "apply_switching", "build_network", "build_ybus",
    "check_violations", "connected_islands", "evaluate_ras", "MeasurementSample",
    "parse_network_file", "parse_study_file", "rank_contingencies",
    "RealtimeEngine", "reference_network", "run_contingency", "screen_capacity",
    "serialize_network", "serialize_study", "severity_index", "solve_gauss_seidel",
    "solve_model", "solve_newton_raphson", "suggest_ras", "SystemSnapshot",
    "WhatIfRequest", "write_report",
]
