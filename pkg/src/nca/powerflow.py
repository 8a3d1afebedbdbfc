"""AC load flow on energized islands: Newton-Raphson, with Gauss-Seidel as a cross-check.

Both solvers work on the island reduced to electrical nodes (closed breakers
merged), using the standard polar-form injection equations

    P_i =  sum_j |V_i||V_j||Y_ij| cos(theta_ij - delta_i + delta_j)
    Q_i = -sum_j |V_i||V_j||Y_ij| sin(theta_ij - delta_i + delta_j)

and iterate until the worst real/reactive power mismatch is within tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .network import Island, NetworkModel, connected_islands, merged_nodes

GS_DEFAULT_MAX_ITERATIONS = 500


class PowerFlowError(ValueError):
    """Raised for inputs the solver cannot accept (not for divergence)."""


@dataclass(frozen=True)
class SolverSettings:
    """Convergence controls. Tolerance is worst per-unit power mismatch.

    ``enforce_q_limits`` allows one round of pv-to-pq switching after the
    first converged solve when generator reactive output leaves its band;
    disabled by default.
    """

    tolerance: float = 1e-6
    max_iterations: int = 50
    flat_start: bool = True
    enforce_q_limits: bool = False

    def __post_init__(self) -> None:
        if self.tolerance <= 0:
            raise PowerFlowError("tolerance must be positive")
        if self.max_iterations < 1:
            raise PowerFlowError("max_iterations must be at least 1")


@dataclass(frozen=True, eq=False)
class AdmittanceMatrix:
    """Complex nodal admittance matrix over an island's merged electrical nodes."""

    nodes: tuple[str, ...]
    matrix: sp.csr_matrix

    @property
    def n(self) -> int:
        return len(self.nodes)

    def index(self, node: str) -> int:
        return self.nodes.index(node)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True, eq=False)
class PowerFlowState:
    """Voltage magnitudes (pu) and angles (rad) per node at iteration k."""

    vm: np.ndarray
    va: np.ndarray
    iteration: int = 0

    def voltages(self) -> np.ndarray:
        return self.vm * np.exp(1j * self.va)


@dataclass(frozen=True, eq=False)
class Jacobian:
    """Blocks j1 = dP/ddelta, j2 = dP/d|V|, j3 = dQ/ddelta, j4 = dQ/d|V|.

    Rows cover P at non-slack nodes then Q at pq nodes; columns cover delta at
    non-slack nodes then |V| at pq nodes, so the full matrix is square with
    dimension (n - 1) + n_pq.
    """

    j1: np.ndarray
    j2: np.ndarray
    j3: np.ndarray
    j4: np.ndarray

    def full(self) -> np.ndarray:
        return np.block([[self.j1, self.j2], [self.j3, self.j4]])


@dataclass(frozen=True, eq=False)
class IslandSystem:
    """An energized island reduced to electrical nodes ready to solve.

    Per node: specified injections (generation minus load, pu), node kind,
    and voltage setpoints for slack/pv nodes. ``node_of_bus`` maps the
    island's buses onto rows of the admittance matrix.
    """

    ybus: AdmittanceMatrix
    node_of_bus: dict[str, str]
    kinds: tuple[str, ...]
    p_spec: np.ndarray
    q_spec: np.ndarray
    v_set: np.ndarray
    slack: int
    pv: tuple[int, ...]
    pq: tuple[int, ...]

    @property
    def pvpq(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.ybus.n) if i != self.slack)


@dataclass(frozen=True)
class PowerFlowSolution:
    """Converged (or diverged) island solution.

    Voltages and injections are keyed by bus id; merged buses share their
    node's voltage. ``trace`` is the worst mismatch per iteration, index 0
    being the initial state.
    """

    bus_vm_pu: dict[str, float]
    bus_va_rad: dict[str, float]
    bus_p_pu: dict[str, float]
    bus_q_pu: dict[str, float]
    slack_bus: str
    slack_injection: complex
    losses: complex
    converged: bool
    iterations: int
    worst_mismatch: float
    trace: tuple[float, ...]
    method: str
    failure: str | None = None

    def voltage_pct(self, bus_id: str) -> float:
        return 100.0 * self.bus_vm_pu[bus_id]


@dataclass(frozen=True)
class NetworkSolution:
    """Whole-model view: one PowerFlowSolution per energized island.

    De-energized buses are reported at zero voltage. ``converged`` is true
    only when every energized island converged.
    """

    island_solutions: tuple[PowerFlowSolution, ...]
    de_energized_buses: tuple[str, ...]
    converged: bool

    def solution_for(self, bus_id: str) -> PowerFlowSolution | None:
        for sol in self.island_solutions:
            if bus_id in sol.bus_vm_pu:
                return sol
        return None

    def vm_pu(self, bus_id: str) -> float | None:
        """Per-unit magnitude; 0.0 for de-energized, None if island diverged."""
        if bus_id in self.de_energized_buses:
            return 0.0
        sol = self.solution_for(bus_id)
        if sol is None or not sol.converged:
            return None
        return sol.bus_vm_pu[bus_id]

    def voltage_pct(self, bus_id: str) -> float | None:
        vm = self.vm_pu(bus_id)
        return None if vm is None else 100.0 * vm


# ---------------------------------------------------------------------------
# Admittance matrix

def build_ybus(model: NetworkModel, island: Island) -> AdmittanceMatrix:
    """Stamp the island's branches into a nodal admittance matrix.

    Standard pi-model stamping with off-nominal taps on the from side:
    series admittance y = 1/Z appears as y/t^2 (from) and y (to) on the
    diagonal plus half-shunt terms; off-diagonals get -y/t. Zero-impedance
    source-thevenin branches were already merged into supernodes and are
    skipped here.
    """
    node_of = merged_nodes(model)
    members = set(island.buses)
    nodes = tuple(sorted({node_of[b] for b in island.buses}))
    idx = {n: i for i, n in enumerate(nodes)}

    y = sp.lil_matrix((len(nodes), len(nodes)), dtype=complex)
    for br in model.branches:
        if br.from_bus not in members and br.to_bus not in members:
            continue
        if abs(br.series_impedance) == 0:
            if br.kind == "source-thevenin":
                continue  # merged into a supernode upstream
            raise PowerFlowError(f"branch {br.id!r}: zero series impedance")
        if br.from_bus not in members or br.to_bus not in members:
            raise PowerFlowError(f"branch {br.id!r} crosses the island boundary")
        i = idx[node_of[br.from_bus]]
        j = idx[node_of[br.to_bus]]
        ys = 1.0 / br.series_impedance
        ysh = br.shunt_admittance / 2.0
        t = br.tap_ratio
        if i == j:
            # Both ends merged onto one node: series term cancels, shunts stay.
            y[i, i] += 2 * ysh
            continue
        y[i, i] += (ys + ysh) / t**2
        y[j, j] += ys + ysh
        y[i, j] += -ys / t
        y[j, i] += -ys / t
    return AdmittanceMatrix(nodes=nodes, matrix=y.tocsr())


def reduce_island(
    model: NetworkModel, island: Island, ybus: AdmittanceMatrix | None = None
) -> IslandSystem:
    """Aggregate buses onto electrical nodes and classify node kinds.

    Node kind is slack if any merged bus is slack, else pv if any is pv, else
    pq. An energized island without a slack promotes the pv node holding the
    largest generator (ties broken by bus id) so the island stays solvable.
    """
    if not island.energized:
        raise PowerFlowError("cannot reduce a de-energized island")
    if ybus is None:
        ybus = build_ybus(model, island)
    node_of = merged_nodes(model)
    idx = {n: i for i, n in enumerate(ybus.nodes)}
    node_of_bus = {b: node_of[b] for b in island.buses}

    n = ybus.n
    kinds = ["pq"] * n
    p = np.zeros(n)
    q = np.zeros(n)
    v_set = np.ones(n)
    s_base = model.s_base_mva

    for bus_id in island.buses:
        bus = model.bus(bus_id)
        i = idx[node_of[bus_id]]
        if bus.kind == "slack":
            kinds[i] = "slack"
        elif bus.kind == "pv" and kinds[i] != "slack":
            kinds[i] = "pv"

    for load in model.loads:
        if load.bus in node_of_bus:
            i = idx[node_of[load.bus]]
            p[i] -= load.p_mw / s_base
            q[i] -= load.q_mvar / s_base

    for gen in model.generators:
        if gen.bus in node_of_bus:
            i = idx[node_of[gen.bus]]
            p[i] += gen.p_set_mw / s_base
            v_set[i] = gen.v_set_pu

    slack_nodes = [i for i, k in enumerate(kinds) if k == "slack"]
    if len(slack_nodes) > 1:
        raise PowerFlowError("island has more than one slack node")
    if not slack_nodes:
        # Promote the strongest pv node to island slack.
        candidates = []
        for gen in model.generators:
            if gen.bus in node_of_bus:
                candidates.append((-gen.p_set_mw, gen.bus, idx[node_of[gen.bus]]))
        pv_only = [
            (0.0, b, idx[node_of[b]])
            for b in island.buses
            if model.bus(b).kind == "pv"
        ]
        pool = sorted(candidates) or sorted(pv_only)
        if not pool:
            raise PowerFlowError("energized island has no slack or pv node")
        kinds[pool[0][2]] = "slack"
    slack = next(i for i, k in enumerate(kinds) if k == "slack")

    return IslandSystem(
        ybus=ybus,
        node_of_bus=node_of_bus,
        kinds=tuple(kinds),
        p_spec=p,
        q_spec=q,
        v_set=v_set,
        slack=slack,
        pv=tuple(i for i, k in enumerate(kinds) if k == "pv"),
        pq=tuple(i for i, k in enumerate(kinds) if k == "pq"),
    )


# ---------------------------------------------------------------------------
# Injections, mismatch, Jacobian

def injected_power(state: PowerFlowState, ybus: AdmittanceMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-node injections (P_i, Q_i) from the polar-form equations."""
    v = state.voltages()
    s = v * np.conj(ybus.matrix @ v)
    return s.real, s.imag


def mismatch(state: PowerFlowState, system: IslandSystem) -> np.ndarray:
    """Specified minus calculated power: dP at non-slack nodes, dQ at pq nodes."""
    p, q = injected_power(state, system.ybus)
    pvpq = list(system.pvpq)
    pq = list(system.pq)
    return np.concatenate(
        [system.p_spec[pvpq] - p[pvpq], system.q_spec[pq] - q[pq]]
    )


def assemble_jacobian(state: PowerFlowState, system: IslandSystem) -> Jacobian:
    """Analytic partial derivatives of the injection equations in block layout.

    Derived through the complex sensitivities dS/ddelta and dS/d|V| of
    S = V conj(Y V), then split into real/imaginary blocks and restricted to
    non-slack rows/columns (angles) and pq rows/columns (magnitudes).
    """
    y = system.ybus.matrix
    v = state.voltages()
    i_node = y @ v
    diag_v = sp.diags(v)
    diag_i = sp.diags(i_node)
    diag_vnorm = sp.diags(v / np.abs(v))

    ds_dvm = (diag_v @ (y @ diag_vnorm).conj() + sp.diags(np.conj(i_node)) @ diag_vnorm).toarray()
    ds_dva = (1j * diag_v @ (diag_i - y @ diag_v).conj()).toarray()

    pvpq = list(system.pvpq)
    pq = list(system.pq)
    return Jacobian(
        j1=ds_dva[np.ix_(pvpq, pvpq)].real,
        j2=ds_dvm[np.ix_(pvpq, pq)].real,
        j3=ds_dva[np.ix_(pq, pvpq)].imag,
        j4=ds_dvm[np.ix_(pq, pq)].imag,
    )


def _initial_state(system: IslandSystem, settings: SolverSettings) -> PowerFlowState:
    # Flat start: 1.0 at 0 rad, slack and pv magnitudes at their setpoints.
    n = system.ybus.n
    vm = np.ones(n)
    va = np.zeros(n)
    for i in (system.slack, *system.pv):
        vm[i] = system.v_set[i]
    return PowerFlowState(vm=vm, va=va, iteration=0)


def _finish(
    model: NetworkModel,
    system: IslandSystem,
    state: PowerFlowState,
    converged: bool,
    iterations: int,
    trace: list[float],
    method: str,
    failure: str | None = None,
    report_pv: tuple[int, ...] | None = None,
) -> PowerFlowSolution:
    """Map node results back onto buses and account injections.

    Non-source buses report their specified net injection. The bus holding
    the slack (and pv generators their solved reactive share) absorbs the
    node-level residuals so that bus injections sum to the node solution.
    """
    p_node, q_node = injected_power(state, system.ybus)
    idx = {n: i for i, n in enumerate(system.ybus.nodes)}
    s_base = model.s_base_mva

    bus_vm: dict[str, float] = {}
    bus_va: dict[str, float] = {}
    bus_p: dict[str, float] = {}
    bus_q: dict[str, float] = {}

    # Specified contributions per bus.
    for bus_id in system.node_of_bus:
        i = idx[system.node_of_bus[bus_id]]
        bus_vm[bus_id] = float(state.vm[i])
        bus_va[bus_id] = float(state.va[i])
        p = sum(g.p_set_mw for g in model.generators_at(bus_id)) - sum(
            l.p_mw for l in model.loads_at(bus_id)
        )
        q = -sum(l.q_mvar for l in model.loads_at(bus_id))
        bus_p[bus_id] = p / s_base
        bus_q[bus_id] = q / s_base

    # Assign solved residuals to generator buses: reactive support at pv and
    # slack nodes, plus the slack real-power balance.
    def gen_bus_on_node(node_index: int) -> str | None:
        gens = [
            g.bus
            for g in model.generators
            if g.bus in system.node_of_bus
            and idx[system.node_of_bus[g.bus]] == node_index
        ]
        if gens:
            return sorted(gens)[0]
        members = sorted(
            b for b, n in system.node_of_bus.items() if idx[n] == node_index
        )
        for b in members:
            if model.bus(b).kind in ("slack", "pv"):
                return b
        return members[0] if members else None

    for i in (*(report_pv if report_pv is not None else system.pv), system.slack):
        owner = gen_bus_on_node(i)
        if owner is None:
            continue
        others_q = sum(q for b, q in bus_q.items() if idx[system.node_of_bus[b]] == i) - bus_q[owner]
        bus_q[owner] = float(q_node[i]) - others_q
        if i == system.slack:
            others_p = (
                sum(p for b, p in bus_p.items() if idx[system.node_of_bus[b]] == i)
                - bus_p[owner]
            )
            bus_p[owner] = float(p_node[i]) - others_p

    slack_bus = gen_bus_on_node(system.slack) or system.ybus.nodes[system.slack]
    return PowerFlowSolution(
        bus_vm_pu=bus_vm,
        bus_va_rad=bus_va,
        bus_p_pu=bus_p,
        bus_q_pu=bus_q,
        slack_bus=slack_bus,
        slack_injection=complex(p_node[system.slack], q_node[system.slack]),
        losses=complex(p_node.sum(), q_node.sum()),
        converged=converged,
        iterations=iterations,
        worst_mismatch=trace[-1] if trace else float("nan"),
        trace=tuple(trace),
        method=method,
        failure=failure,
    )


def _newton_iterate(
    system: IslandSystem, settings: SolverSettings, state: PowerFlowState,
    trace: list[float],
) -> tuple[PowerFlowState, bool, int, str | None]:
    """Run the Newton loop from ``state``; returns (state, converged, iters, failure)."""
    n_ang = len(system.pvpq)
    for k in range(settings.max_iterations + 1):
        f = mismatch(state, system)
        worst = float(np.max(np.abs(f))) if f.size else 0.0
        trace.append(worst)
        if not np.isfinite(worst):
            return state, False, k, "non-finite mismatch"
        if worst <= settings.tolerance:
            return state, True, k, None
        if k == settings.max_iterations:
            break
        jac = assemble_jacobian(state, system).full()
        try:
            dx = spla.spsolve(sp.csr_matrix(jac), f)
        except RuntimeError:
            return state, False, k, "singular jacobian"
        if not np.all(np.isfinite(dx)):
            return state, False, k, "singular jacobian"
        va = state.va.copy()
        vm = state.vm.copy()
        va[list(system.pvpq)] += dx[:n_ang]
        vm[list(system.pq)] += dx[n_ang:]
        if np.any(vm <= 0):
            trace.append(float("inf"))
            return (
                PowerFlowState(vm=np.abs(vm) + 1e-12, va=va),
                False, k + 1, "voltage collapsed",
            )
        state = PowerFlowState(vm=vm, va=va, iteration=k + 1)
    return state, False, settings.max_iterations, "max iterations exceeded"


def _q_limit_switches(
    model: NetworkModel, system: IslandSystem, state: PowerFlowState,
    tolerance: float,
) -> dict[int, float]:
    """pv nodes whose generator reactive output violates its band, with the bound.

    A node participates only when every generator merged onto it declares a
    limit; the bound is the summed band edge in per-unit.
    """
    idx = {n: i for i, n in enumerate(system.ybus.nodes)}
    gens_on_node: dict[int, list] = {}
    for g in model.generators:
        if g.bus in system.node_of_bus:
            gens_on_node.setdefault(idx[system.node_of_bus[g.bus]], []).append(g)

    _, q_node = injected_power(state, system.ybus)
    switches: dict[int, float] = {}
    for i in system.pv:
        gens = gens_on_node.get(i, [])
        if not gens or any(g.q_limits is None for g in gens):
            continue
        q_min = sum(g.q_limits[0] for g in gens) / model.s_base_mva
        q_max = sum(g.q_limits[1] for g in gens) / model.s_base_mva
        # Generator output = node injection plus the load it covers locally.
        q_gen = q_node[i] - system.q_spec[i]
        if q_gen > q_max + tolerance:
            switches[i] = q_max
        elif q_gen < q_min - tolerance:
            switches[i] = q_min
    return switches


def solve_newton_raphson(
    model: NetworkModel, island: Island, settings: SolverSettings | None = None
) -> PowerFlowSolution:
    """Full Newton-Raphson: mismatch, Jacobian, linear solve, update, repeat.

    Convergence is checked before each update, so an already-balanced network
    reports zero iterations. Non-convergence within max_iterations, a singular
    Jacobian, or a non-physical state (non-finite or nonpositive magnitudes)
    all yield a diverged solution carrying the iteration trace. With
    ``enforce_q_limits`` set, one pv-to-pq switch round runs after the first
    converged solve, pinning offending generators at their violated bound.
    """
    settings = settings or SolverSettings()
    system = reduce_island(model, island)
    state = _initial_state(system, settings)
    trace: list[float] = []
    state, converged, iterations, failure = _newton_iterate(system, settings, state, trace)

    if converged and settings.enforce_q_limits and system.pv:
        switches = _q_limit_switches(model, system, state, settings.tolerance)
        if switches:
            kinds = tuple(
                "pq" if i in switches else k for i, k in enumerate(system.kinds)
            )
            q_spec = system.q_spec.copy()
            for i, bound in switches.items():
                q_spec[i] = bound + system.q_spec[i]
            limited = IslandSystem(
                ybus=system.ybus,
                node_of_bus=system.node_of_bus,
                kinds=kinds,
                p_spec=system.p_spec,
                q_spec=q_spec,
                v_set=system.v_set,
                slack=system.slack,
                pv=tuple(i for i in system.pv if i not in switches),
                pq=tuple(sorted((*system.pq, *switches))),
            )
            state, converged, extra, failure = _newton_iterate(
                limited, settings, state, trace
            )
            return _finish(model, limited, state, converged, iterations + extra,
                           trace, "newton-raphson", failure, report_pv=system.pv)

    return _finish(model, system, state, converged, iterations, trace,
                   "newton-raphson", failure)


def solve_gauss_seidel(
    model: NetworkModel, island: Island, settings: SolverSettings | None = None
) -> PowerFlowSolution:
    """Classical per-node Gauss-Seidel sweep with the same convergence criterion.

    Kept as an independent cross-check for the Newton solver; slower but
    simple. Default iteration cap is higher (500) to match its linear
    convergence rate.
    """
    settings = settings or SolverSettings(max_iterations=GS_DEFAULT_MAX_ITERATIONS)
    system = reduce_island(model, island)
    state = _initial_state(system, settings)
    n = system.ybus.n

    # Sparse neighbor lists in plain Python complex: the sequential sweep
    # dominates runtime, and attribute-free arithmetic keeps it quick.
    ymat = system.ybus.matrix
    rows: list[list[tuple[int, complex]]] = [[] for _ in range(n)]
    diag: list[complex] = [0j] * n
    coo = ymat.tocoo()
    for i, j, yij in zip(coo.row, coo.col, coo.data):
        if i == j:
            diag[i] = complex(yij)
        else:
            rows[i].append((int(j), complex(yij)))

    v: list[complex] = [complex(x) for x in state.voltages()]
    s_spec = [complex(system.p_spec[i], system.q_spec[i]) for i in range(n)]
    pq = set(system.pq)
    pv = set(system.pv)
    trace: list[float] = []

    def worst_mismatch() -> float:
        st = PowerFlowState(vm=np.abs(v), va=np.angle(np.array(v)))
        f = mismatch(st, system)
        return float(np.max(np.abs(f))) if f.size else 0.0

    iterations = 0
    for k in range(settings.max_iterations + 1):
        worst = worst_mismatch()
        trace.append(worst)
        if not np.isfinite(worst):
            break
        if worst <= settings.tolerance:
            st = PowerFlowState(vm=np.abs(v), va=np.angle(np.array(v)), iteration=k)
            return _finish(model, system, st, True, k, trace, "gauss-seidel")
        if k == settings.max_iterations:
            break
        iterations = k + 1
        for i in range(n):
            if i in pq:
                acc = 0j
                for j, yij in rows[i]:
                    acc += yij * v[j]
                v[i] = ((s_spec[i] / v[i]).conjugate() - acc) / diag[i]
            elif i in pv:
                acc = diag[i] * v[i]
                for j, yij in rows[i]:
                    acc += yij * v[j]
                q_calc = (v[i] * acc.conjugate()).imag
                s = complex(s_spec[i].real, q_calc)
                acc -= diag[i] * v[i]
                vnew = ((s / v[i]).conjugate() - acc) / diag[i]
                # Hold the setpoint magnitude, keep the updated angle.
                mag = abs(vnew)
                if mag > 0:
                    v[i] = vnew / mag * system.v_set[i]

    st = PowerFlowState(vm=np.abs(v), va=np.angle(np.array(v)), iteration=iterations)
    return _finish(model, system, st, False, iterations, trace, "gauss-seidel",
                   failure="max iterations exceeded")


# ---------------------------------------------------------------------------
# Whole-model solve and validation

def solve_model(
    model: NetworkModel,
    settings: SolverSettings | None = None,
    method: str = "newton-raphson",
) -> NetworkSolution:
    """Solve every energized island; de-energized buses are reported at 0%."""
    solver = {
        "newton-raphson": solve_newton_raphson,
        "gauss-seidel": solve_gauss_seidel,
    }.get(method)
    if solver is None:
        raise PowerFlowError(f"unknown method {method!r}")

    island_solutions = []
    dead: list[str] = []
    for island in connected_islands(model):
        if island.energized:
            island_solutions.append(solver(model, island, settings))
        else:
            dead.extend(island.buses)
    return NetworkSolution(
        island_solutions=tuple(island_solutions),
        de_energized_buses=tuple(sorted(dead)),
        converged=all(s.converged for s in island_solutions),
    )


def power_balance_residual(
    solution: NetworkSolution, model: NetworkModel
) -> tuple[float, float]:
    """Re-derive injections from the solved voltages and compare to specified.

    Returns (worst per-bus residual, slack balance error) in pu, where slack
    balance checks slack P = total load + losses - other generation.
    """
    worst = 0.0
    slack_err = 0.0
    node_of = merged_nodes(model)
    for island in connected_islands(model):
        if not island.energized:
            continue
        sol = next(
            (s for s in solution.island_solutions if island.buses[0] in s.bus_vm_pu),
            None,
        )
        if sol is None or not sol.converged:
            continue
        ybus = build_ybus(model, island)
        system = reduce_island(model, island, ybus)
        idx = {n: i for i, n in enumerate(ybus.nodes)}
        vm = np.ones(ybus.n)
        va = np.zeros(ybus.n)
        for b in island.buses:
            vm[idx[node_of[b]]] = sol.bus_vm_pu[b]
            va[idx[node_of[b]]] = sol.bus_va_rad[b]
        p, q = injected_power(PowerFlowState(vm=vm, va=va), ybus)
        for i in range(ybus.n):
            if i == system.slack:
                continue
            worst = max(worst, abs(p[i] - system.p_spec[i]))
            if system.kinds[i] == "pq":
                worst = max(worst, abs(q[i] - system.q_spec[i]))
        total_load = sum(
            l.p_mw for l in model.loads if l.bus in system.node_of_bus
        ) / model.s_base_mva
        other_gen = sum(
            g.p_set_mw
            for g in model.generators
            if g.bus in system.node_of_bus
            and idx[system.node_of_bus[g.bus]] != system.slack
        ) / model.s_base_mva
        expected_slack = total_load + sol.losses.real - other_gen
        slack_err = max(slack_err, abs(sol.slack_injection.real - expected_slack))
    return worst, slack_err
