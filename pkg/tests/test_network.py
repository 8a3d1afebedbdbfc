import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nca.network import (
    Branch,
    Bus,
    Generator,
    Load,
    NetworkError,
    NetworkSpec,
    Transformer,
    Winding,
    apply_switching,
    build_network,
    connected_islands,
    impedance_pct_to_pu,
    merged_nodes,
    power_to_pu,
    voltage_to_pu,
)

from helpers import two_bus_spec


def sat_spec():
    """3-winding transformer spec: H at 22 kV, X and Y at 4.16 kV."""
    return NetworkSpec(
        name="sat",
        base_mva=100.0,
        buses=(
            Bus(id="hv", nominal_kv=22.0, kind="slack"),
            Bus(id="x-bus", nominal_kv=4.16),
            Bus(id="y-bus", nominal_kv=4.16),
        ),
        branches=(),
        transformers=(
            Transformer(
                id="SAT",
                own_mva_base=50.0,
                windings=(
                    Winding("H", "hv", 22.0),
                    Winding("X", "x-bus", 4.16),
                    Winding("Y", "y-bus", 4.16),
                ),
                impedance_pct=(
                    ("H-X", complex(1.0, 8.0)),
                    ("H-Y", complex(1.0, 8.0)),
                    ("X-Y", complex(2.0, 14.0)),
                ),
            ),
        ),
        breakers=(),
        loads=(),
        generators=(),
    )


class TestBuildNetwork:
    def test_minimal_two_bus(self):
        model = build_network(two_bus_spec())
        assert len(model.buses) == 2
        assert len(model.branches) == 1
        assert not any(b.category == "internal-node" for b in model.buses)

    def test_three_winding_star_expansion(self):
        model = build_network(sat_spec())
        internals = [b for b in model.buses if b.category == "internal-node"]
        legs = [br for br in model.branches if br.kind == "transformer-leg"]
        assert len(internals) == 1
        assert internals[0].id == "SAT-star"
        assert sorted(br.id for br in legs) == ["SAT-H", "SAT-X", "SAT-Y"]

    def test_star_conserves_pairwise_impedance(self):
        model = build_network(sat_spec())
        legs = {br.id: br.series_impedance for br in model.branches}
        z_hx_sys = impedance_pct_to_pu(complex(1.0, 8.0), 50.0, 22.0, 100.0, 22.0)
        assert abs((legs["SAT-H"] + legs["SAT-X"]) - z_hx_sys) < 1e-12
        z_xy_sys = impedance_pct_to_pu(complex(2.0, 14.0), 50.0, 4.16, 100.0, 4.16)
        assert abs((legs["SAT-X"] + legs["SAT-Y"]) - z_xy_sys) < 1e-12

    def test_dangling_branch_reference(self):
        spec = two_bus_spec()
        bad = NetworkSpec(
            **{
                **spec.__dict__,
                "branches": spec.branches
                + (Branch(id="bad", from_bus="b1", to_bus="2Z", series_impedance=0.1j),),
            }
        )
        with pytest.raises(NetworkError, match="2Z"):
            build_network(bad)

    def test_duplicate_bus_id(self):
        spec = two_bus_spec()
        bad = NetworkSpec(**{**spec.__dict__, "buses": spec.buses + (spec.buses[0],)})
        with pytest.raises(NetworkError, match="duplicate"):
            build_network(bad)

    def test_nonpositive_kv(self):
        spec = two_bus_spec()
        bad = NetworkSpec(
            **{**spec.__dict__, "buses": (Bus(id="b1", nominal_kv=0.0, kind="slack"), spec.buses[1])}
        )
        with pytest.raises(NetworkError, match="nominal_kv"):
            build_network(bad)

    def test_level_mismatch_without_transformer_kind(self):
        spec = NetworkSpec(
            name="bad",
            base_mva=100.0,
            buses=(Bus(id="a", nominal_kv=4.16, kind="slack"), Bus(id="b", nominal_kv=0.6)),
            branches=(Branch(id="ln", from_bus="a", to_bus="b", series_impedance=0.1j),),
            transformers=(),
            breakers=(),
            loads=(),
            generators=(),
        )
        with pytest.raises(NetworkError, match="voltage levels"):
            build_network(spec)

    def test_generator_on_pq_bus_rejected(self):
        spec = two_bus_spec()
        bad = NetworkSpec(
            **{
                **spec.__dict__,
                "generators": (Generator(id="g", bus="b2", p_set_mw=1.0),),
            }
        )
        with pytest.raises(NetworkError, match="pv or slack"):
            build_network(bad)

    def test_zero_impedance_line_rejected(self):
        spec = two_bus_spec(z=0j)
        with pytest.raises(NetworkError, match="zero series impedance"):
            build_network(spec)

    def test_deterministic(self):
        assert build_network(two_bus_spec()) == build_network(two_bus_spec())


class TestPerUnit:
    def test_impedance_rebase(self):
        z = impedance_pct_to_pu(8.0, 50.0, 4.16, 100.0, 4.16)
        assert math.isclose(z.real, 0.16, rel_tol=1e-12)

    def test_voltage_identity(self):
        assert voltage_to_pu(0.6, 0.6) == 1.0

    def test_power(self):
        assert power_to_pu(30.0, 10.0, 100.0) == complex(0.3, 0.1)

    def test_rejects_bad_base(self):
        with pytest.raises(NetworkError):
            power_to_pu(1.0, 0.0, 0.0)
        with pytest.raises(NetworkError):
            impedance_pct_to_pu(8.0, -50.0, 4.16, 100.0, 4.16)
        with pytest.raises(NetworkError):
            voltage_to_pu(1.0, 0.0)


class TestIslands:
    def test_fixture_all_closed_plus_alt_island(self, fixture_model):
        islands = connected_islands(fixture_model)
        # Main system plus the normally isolated alternate-source bus.
        assert len(islands) == 2
        assert all(i.energized for i in islands)
        sizes = sorted(len(i.buses) for i in islands)
        assert sizes[0] == 1

    def test_all_breakers_closed_single_island(self, fixture_model):
        close_all = [("close", b.id) for b in fixture_model.breakers]
        islands = connected_islands(apply_switching(fixture_model, close_all))
        assert len(islands) == 1
        assert islands[0].energized

    def test_open_feeds_create_dead_island(self, fixture_model):
        switched = apply_switching(fixture_model, [("open", "2E-sat-in")])
        islands = connected_islands(switched)
        dead = [i for i in islands if not i.energized]
        assert len(dead) == 1
        assert "4kv-2E" in dead[0].buses
        assert "600V Load Center 2W" in dead[0].buses

    def test_partition(self, fixture_model):
        islands = connected_islands(fixture_model)
        seen = [b for i in islands for b in i.buses]
        assert sorted(seen) == sorted(b.id for b in fixture_model.buses)

    def test_closed_tie_reaches_two_sources(self, fixture_model):
        switched = apply_switching(fixture_model, [("close", "tie-2S")])
        islands = connected_islands(switched)
        assert len(islands) == 1
        merged = merged_nodes(switched)
        assert merged["600V Alt Source 2S"] == merged["600V Load Center 2E Emerg"]


class TestSwitching:
    def test_empty_actions_identity(self, fixture_model):
        assert apply_switching(fixture_model, []) == fixture_model

    def test_open_then_close_involution(self, fixture_model):
        once = apply_switching(fixture_model, [("close", "tie-2S"), ("open", "tie-2S")])
        assert once == fixture_model

    def test_unknown_breaker(self, fixture_model):
        with pytest.raises(NetworkError, match="no-such"):
            apply_switching(fixture_model, [("open", "no-such")])

    def test_only_breaker_state_changes(self, fixture_model):
        switched = apply_switching(fixture_model, [("open", "DE03")])
        assert switched.branches == fixture_model.branches
        assert switched.loads == fixture_model.loads
        assert switched.generators == fixture_model.generators
        assert switched.breaker("DE03").current_state == "open"
        assert fixture_model.breaker("DE03").current_state == "closed"


@st.composite
def switching_sequences(draw, breaker_ids):
    ops = st.tuples(st.sampled_from(["open", "close"]), st.sampled_from(breaker_ids))
    return draw(st.lists(ops, max_size=8))


class TestSwitchingProperties:
    @settings(max_examples=40, deadline=None)
    @given(data=st.data())
    def test_islands_always_partition(self, fixture_model, data):
        ids = [b.id for b in fixture_model.breakers]
        actions = data.draw(switching_sequences(ids))
        model = apply_switching(fixture_model, actions)
        islands = connected_islands(model)
        seen = sorted(b for i in islands for b in i.buses)
        assert seen == sorted(b.id for b in model.buses)

    @settings(max_examples=40, deadline=None)
    @given(data=st.data())
    def test_final_state_wins(self, fixture_model, data):
        ids = [b.id for b in fixture_model.breakers]
        actions = data.draw(switching_sequences(ids))
        model = apply_switching(fixture_model, actions)
        expected = {b.id: b.current_state for b in fixture_model.breakers}
        for op, bid in actions:
            expected[bid] = "open" if op == "open" else "closed"
        assert {b.id: b.current_state for b in model.breakers} == expected
