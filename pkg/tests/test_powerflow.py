import cmath
import math

import numpy as np
import pytest

from nca.network import Branch, Bus, Load, NetworkSpec, build_network, connected_islands
from nca.powerflow import (
    PowerFlowError,
    PowerFlowState,
    SolverSettings,
    assemble_jacobian,
    build_ybus,
    injected_power,
    power_balance_residual,
    reduce_island,
    solve_gauss_seidel,
    solve_model,
    solve_newton_raphson,
)

from helpers import (
    CASE_A_IMPEDANCE,
    branch_loss_oracle,
    fixed_point_oracle,
    no_fixed_point_exists,
    random_radial_spec,
    two_bus_model,
    two_bus_spec,
)


def main_island(model):
    islands = [i for i in connected_islands(model) if i.energized]
    return max(islands, key=lambda i: len(i.buses))


class TestBuildYbus:
    def test_single_line_stamp(self):
        model = two_bus_model()
        ybus = build_ybus(model, main_island(model))
        y = 1.0 / CASE_A_IMPEDANCE
        dense = ybus.dense()
        assert np.allclose(dense, np.array([[y, -y], [-y, y]]))

    def test_shunt_changes_only_own_diagonal(self):
        spec = two_bus_spec()
        shunted = NetworkSpec(
            **{
                **spec.__dict__,
                "branches": (
                    Branch(
                        id="line", from_bus="b1", to_bus="b2",
                        series_impedance=CASE_A_IMPEDANCE,
                        shunt_admittance=0.04j,
                    ),
                ),
            }
        )
        base = build_ybus(build_network(spec), main_island(build_network(spec)))
        model = build_network(shunted)
        with_shunt = build_ybus(model, main_island(model))
        delta = with_shunt.dense() - base.dense()
        assert np.allclose(np.diag(delta), [0.02j, 0.02j])
        assert np.allclose(delta - np.diag(np.diag(delta)), 0)

    def test_fixture_matrix_equals_summed_branch_stamps(self, fixture_model):
        """Oracle: re-stamp each branch in isolation and sum the contributions."""
        island = main_island(fixture_model)
        ybus = build_ybus(fixture_model, island)
        idx = {n: i for i, n in enumerate(ybus.nodes)}
        from nca.network import merged_nodes

        node_of = merged_nodes(fixture_model)
        members = set(island.buses)
        expected = np.zeros((ybus.n, ybus.n), dtype=complex)
        for br in fixture_model.branches:
            if br.from_bus not in members or br.to_bus not in members:
                continue
            if abs(br.series_impedance) == 0:
                continue
            i, j = idx[node_of[br.from_bus]], idx[node_of[br.to_bus]]
            y = 1.0 / br.series_impedance
            ysh = br.shunt_admittance / 2.0
            t = br.tap_ratio
            if i == j:
                expected[i, i] += 2 * ysh
                continue
            expected[i, i] += (y + ysh) / t**2
            expected[j, j] += y + ysh
            expected[i, j] -= y / t
            expected[j, i] -= y / t
        assert np.allclose(ybus.dense(), expected, atol=1e-12)

    def test_symmetry_and_row_sums_tap_free(self):
        rng = np.random.default_rng(7)
        model = build_network(random_radial_spec(rng))
        island = main_island(model)
        ybus = build_ybus(model, island)
        dense = ybus.dense()
        assert np.allclose(dense, dense.T)
        # Row sums equal the total shunt at each node: series terms cancel.
        shunts = np.zeros(ybus.n, dtype=complex)
        idx = {n: i for i, n in enumerate(ybus.nodes)}
        for br in model.branches:
            shunts[idx[br.from_bus]] += br.shunt_admittance / 2
            shunts[idx[br.to_bus]] += br.shunt_admittance / 2
        assert np.allclose(dense.sum(axis=1), shunts, atol=1e-9)


class TestInjectedPower:
    def test_flat_lossless_is_zero(self):
        model = two_bus_model()
        ybus = build_ybus(model, main_island(model))
        state = PowerFlowState(vm=np.ones(2), va=np.zeros(2))
        p, q = injected_power(state, ybus)
        assert np.allclose(p, 0) and np.allclose(q, 0)

    def test_case_a_solved_state_injections(self):
        v2 = fixed_point_oracle()
        model = two_bus_model()
        ybus = build_ybus(model, main_island(model))
        state = PowerFlowState(
            vm=np.array([1.0, abs(v2)]), va=np.array([0.0, cmath.phase(v2)])
        )
        p, q = injected_power(state, ybus)
        i2 = ybus.nodes.index("b2")
        assert abs(p[i2] - (-0.3)) < 1e-6
        assert abs(q[i2] - (-0.1)) < 1e-6

    def test_sum_of_injections_equals_branch_losses(self, fixture_model):
        solution = solve_model(fixture_model)
        assert solution.converged
        oracle = branch_loss_oracle(fixture_model, solution)
        total = sum(s.losses for s in solution.island_solutions)
        assert abs(total - oracle) < 1e-8
        assert total.real >= 0


class TestJacobian:
    def finite_difference(self, system, state, h=1e-6):
        """Central differences of injected_power, the independent derivative oracle."""
        pvpq = list(system.pvpq)
        pq = list(system.pq)
        n_rows = len(pvpq) + len(pq)
        full = np.zeros((n_rows, n_rows))

        def eval_pq(vm, va):
            p, q = injected_power(PowerFlowState(vm=vm, va=va), system.ybus)
            return np.concatenate([p[pvpq], q[pq]])

        col = 0
        for j in pvpq:
            va_hi, va_lo = state.va.copy(), state.va.copy()
            va_hi[j] += h
            va_lo[j] -= h
            full[:, col] = (eval_pq(state.vm, va_hi) - eval_pq(state.vm, va_lo)) / (2 * h)
            col += 1
        for j in pq:
            vm_hi, vm_lo = state.vm.copy(), state.vm.copy()
            vm_hi[j] += h
            vm_lo[j] -= h
            full[:, col] = (eval_pq(vm_hi, state.va) - eval_pq(vm_lo, state.va)) / (2 * h)
            col += 1
        return full

    def test_dimension_counts(self):
        spec = NetworkSpec(
            name="three",
            base_mva=100.0,
            buses=(
                Bus(id="s", nominal_kv=13.8, kind="slack"),
                Bus(id="a", nominal_kv=13.8),
                Bus(id="b", nominal_kv=13.8),
            ),
            branches=(
                Branch(id="l1", from_bus="s", to_bus="a", series_impedance=0.1j),
                Branch(id="l2", from_bus="a", to_bus="b", series_impedance=0.1j),
            ),
            transformers=(),
            breakers=(),
            loads=(Load(id="ld", bus="b", p_mw=10.0, q_mvar=2.0),),
            generators=(),
        )
        model = build_network(spec)
        system = reduce_island(model, main_island(model))
        state = PowerFlowState(vm=np.ones(3), va=np.zeros(3))
        jac = assemble_jacobian(state, system)
        assert jac.full().shape == (4, 4)

    def test_matches_finite_differences_at_random_states(self, fixture_model):
        rng = np.random.default_rng(42)
        system = reduce_island(fixture_model, main_island(fixture_model))
        for _ in range(20):
            vm = rng.uniform(0.9, 1.1, system.ybus.n)
            va = rng.uniform(-0.3, 0.3, system.ybus.n)
            state = PowerFlowState(vm=vm, va=va)
            analytic = assemble_jacobian(state, system).full()
            numeric = self.finite_difference(system, state)
            scale = np.maximum(np.abs(numeric), 1.0)
            assert np.max(np.abs(analytic - numeric) / scale) <= 1e-5

    def test_reactive_network_flat_start_j2_zero(self):
        model = two_bus_model(z=0.1j)
        system = reduce_island(model, main_island(model))
        state = PowerFlowState(vm=np.ones(2), va=np.zeros(2))
        jac = assemble_jacobian(state, system)
        assert np.allclose(jac.j2, 0.0, atol=1e-14)


class TestNewtonRaphson:
    def test_zero_load_flat_zero_iterations(self):
        model = build_network(
            NetworkSpec(
                name="idle",
                base_mva=100.0,
                buses=(Bus(id="a", nominal_kv=13.8, kind="slack"), Bus(id="b", nominal_kv=13.8)),
                branches=(Branch(id="l", from_bus="a", to_bus="b", series_impedance=0.1j),),
                transformers=(),
                breakers=(),
                loads=(),
                generators=(),
            )
        )
        sol = solve_newton_raphson(model, main_island(model))
        assert sol.converged
        assert sol.iterations == 0
        assert all(abs(v - 1.0) < 1e-12 for v in sol.bus_vm_pu.values())

    def test_case_a_matches_fixed_point_oracle(self):
        v_oracle = fixed_point_oracle()
        model = two_bus_model()
        sol = solve_newton_raphson(model, main_island(model))
        assert sol.converged
        assert abs(sol.bus_vm_pu["b2"] - abs(v_oracle)) < 1e-6
        assert abs(sol.bus_va_rad["b2"] - cmath.phase(v_oracle)) < 1e-6
        # Frozen oracle digits for the record.
        assert round(abs(v_oracle), 3) == 0.989
        assert round(math.degrees(cmath.phase(v_oracle)), 2) == -1.74

    def test_beyond_maximum_power_transfer_diverges(self):
        heavy = complex(6.0, 0.1)
        assert no_fixed_point_exists(heavy)
        model = two_bus_model(load=heavy)
        sol = solve_newton_raphson(model, main_island(model))
        assert not sol.converged
        assert sol.failure is not None
        assert len(sol.trace) >= 1

    def test_deterministic_trace(self, fixture_model):
        a = solve_newton_raphson(fixture_model, main_island(fixture_model))
        b = solve_newton_raphson(fixture_model, main_island(fixture_model))
        assert a.trace == b.trace
        assert a.bus_vm_pu == b.bus_vm_pu

    def test_settings_validation(self):
        with pytest.raises(PowerFlowError):
            SolverSettings(tolerance=0.0)
        with pytest.raises(PowerFlowError):
            SolverSettings(max_iterations=0)

    def test_two_slack_rejected(self):
        spec = two_bus_spec()
        bad = build_network(
            NetworkSpec(
                **{
                    **spec.__dict__,
                    "buses": (
                        Bus(id="b1", nominal_kv=4.16, kind="slack"),
                        Bus(id="b2", nominal_kv=4.16, kind="slack"),
                    ),
                }
            )
        )
        with pytest.raises(PowerFlowError, match="more than one slack"):
            solve_newton_raphson(bad, main_island(bad))


class TestQLimits:
    def limited_spec(self, q_max_mvar):
        """Slack feeding a heavy reactive load, supported by a limited pv unit."""
        from nca.network import Generator

        return NetworkSpec(
            name="qlim",
            base_mva=100.0,
            buses=(
                Bus(id="s", nominal_kv=13.8, kind="slack"),
                Bus(id="m", nominal_kv=13.8),
                Bus(id="g", nominal_kv=13.8, kind="pv"),
            ),
            branches=(
                Branch(id="l1", from_bus="s", to_bus="m", series_impedance=0.02 + 0.2j),
                Branch(id="l2", from_bus="m", to_bus="g", series_impedance=0.01 + 0.1j),
            ),
            transformers=(),
            breakers=(),
            loads=(Load(id="ld", bus="m", p_mw=40.0, q_mvar=30.0),),
            generators=(
                Generator(id="gen", bus="g", p_set_mw=20.0, v_set_pu=1.05,
                          q_limits=(-5.0, q_max_mvar)),
            ),
        )

    def gen_q(self, model, sol):
        island_sol = sol.island_solutions[0]
        return island_sol.bus_q_pu["g"] * model.s_base_mva

    def test_disabled_by_default_holds_setpoint(self):
        model = build_network(self.limited_spec(q_max_mvar=5.0))
        sol = solve_model(model)
        assert sol.converged
        assert sol.vm_pu("g") == pytest.approx(1.05, abs=1e-9)
        assert self.gen_q(model, sol) > 5.0

    def test_enforced_pins_output_at_bound(self):
        model = build_network(self.limited_spec(q_max_mvar=5.0))
        settings = SolverSettings(enforce_q_limits=True)
        sol = solve_model(model, settings)
        assert sol.converged
        assert self.gen_q(model, sol) == pytest.approx(5.0, abs=1e-4)
        assert sol.vm_pu("g") < 1.05

    def test_enforced_noop_when_inside_band(self):
        model = build_network(self.limited_spec(q_max_mvar=500.0))
        plain = solve_model(model)
        enforced = solve_model(model, SolverSettings(enforce_q_limits=True))
        assert enforced.vm_pu("g") == pytest.approx(plain.vm_pu("g"), abs=1e-9)
        assert enforced.vm_pu("g") == pytest.approx(1.05, abs=1e-9)


class TestGaussSeidel:
    def test_zero_load_flat(self):
        model = build_network(
            NetworkSpec(
                name="idle",
                base_mva=100.0,
                buses=(Bus(id="a", nominal_kv=13.8, kind="slack"), Bus(id="b", nominal_kv=13.8)),
                branches=(Branch(id="l", from_bus="a", to_bus="b", series_impedance=0.1j),),
                transformers=(),
                breakers=(),
                loads=(),
                generators=(),
            )
        )
        sol = solve_gauss_seidel(model, main_island(model))
        assert sol.converged and sol.iterations == 0

    def test_case_a_matches_oracle(self):
        v_oracle = fixed_point_oracle()
        model = two_bus_model()
        sol = solve_gauss_seidel(model, main_island(model))
        assert sol.converged
        assert abs(sol.bus_vm_pu["b2"] - abs(v_oracle)) < 1e-5

    def test_agrees_with_newton_on_fixture(self, fixture_model):
        nr = solve_model(fixture_model)
        gs = solve_model(fixture_model, method="gauss-seidel")
        assert nr.converged and gs.converged
        for bus in fixture_model.buses:
            v_nr, v_gs = nr.vm_pu(bus.id), gs.vm_pu(bus.id)
            assert abs(v_nr - v_gs) < 1e-4
            sol_nr = nr.solution_for(bus.id)
            sol_gs = gs.solution_for(bus.id)
            if sol_nr is not None and sol_gs is not None:
                d = abs(sol_nr.bus_va_rad[bus.id] - sol_gs.bus_va_rad[bus.id])
                assert math.degrees(d) < 0.01


class TestWholeModel:
    def test_fixture_solution_clean(self, fixture_model):
        sol = solve_model(fixture_model)
        assert sol.converged
        assert sol.de_energized_buses == ()

    def test_conservation_at_fixture_solution(self, fixture_model):
        sol = solve_model(fixture_model)
        gen = sum(s.slack_injection.real for s in sol.island_solutions)
        for s in sol.island_solutions:
            for bus, p in s.bus_p_pu.items():
                if bus != s.slack_bus and p > 0:
                    gen += p
        load = sum(l.p_mw for l in fixture_model.loads) / fixture_model.s_base_mva
        losses = sum(s.losses.real for s in sol.island_solutions)
        assert abs(gen - load - losses) < 1e-5

    def test_power_balance_residual(self, fixture_model):
        sol = solve_model(fixture_model)
        worst, slack_err = power_balance_residual(sol, fixture_model)
        assert worst <= 1e-6
        assert slack_err <= 1e-5

    def test_residual_detects_perturbation(self, fixture_model):
        from dataclasses import replace

        sol = solve_model(fixture_model)
        island = next(s for s in sol.island_solutions if "480V MCC 2E" in s.bus_vm_pu)
        # A bus that is its own electrical node, so the nudge survives merging.
        vm = dict(island.bus_vm_pu)
        vm["480V MCC 2E"] += 0.01
        others = tuple(s for s in sol.island_solutions if s is not island)
        perturbed = replace(sol, island_solutions=(replace(island, bus_vm_pu=vm),) + others)
        worst, _ = power_balance_residual(perturbed, fixture_model)
        assert worst > 1e-6

    def test_monotone_load_response(self, fixture_model):
        """Raising one pq load's P never raises that bus's solved voltage."""
        from dataclasses import replace as dc_replace

        target = "lc-2w-load"
        voltages = []
        for scale in np.linspace(1.0, 3.0, 8):
            loads = tuple(
                dc_replace(l, p_mw=l.p_mw * scale) if l.id == target else l
                for l in fixture_model.loads
            )
            model = dc_replace(fixture_model, loads=loads)
            sol = solve_model(model)
            assert sol.converged
            voltages.append(sol.vm_pu("600V Load Center 2W"))
        assert all(b <= a + 1e-9 for a, b in zip(voltages, voltages[1:]))

    def test_random_radial_nr_vs_gs(self):
        rng = np.random.default_rng(2024)
        for _ in range(10):
            model = build_network(random_radial_spec(rng))
            nr = solve_model(model)
            gs = solve_model(model, method="gauss-seidel")
            assert nr.converged and gs.converged
            for b in model.buses:
                assert abs(nr.vm_pu(b.id) - gs.vm_pu(b.id)) < 1e-4
