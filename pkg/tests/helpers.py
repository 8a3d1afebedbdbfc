"""Shared test model builders and independent numeric oracles."""

import cmath

import numpy as np

from nca.network import Branch, Bus, Load, NetworkSpec, build_network

CASE_A_IMPEDANCE = 0.1j
CASE_A_LOAD = complex(0.3, 0.1)


def two_bus_spec(load=CASE_A_LOAD, z=CASE_A_IMPEDANCE, s_base=100.0):
    """Slack at 1.0 feeding one pq load over a single line, all at one level."""
    return NetworkSpec(
        name="two-bus",
        base_mva=s_base,
        buses=(
            Bus(id="b1", nominal_kv=4.16, kind="slack"),
            Bus(id="b2", nominal_kv=4.16, kind="pq"),
        ),
        branches=(
            Branch(id="line", from_bus="b1", to_bus="b2", series_impedance=z),
        ),
        transformers=(),
        breakers=(),
        loads=(
            Load(id="load", bus="b2", p_mw=load.real * s_base, q_mvar=load.imag * s_base),
        ),
        generators=(),
    )


def two_bus_model(load=CASE_A_LOAD, z=CASE_A_IMPEDANCE):
    return build_network(two_bus_spec(load=load, z=z))


def fixed_point_oracle(load=CASE_A_LOAD, z=CASE_A_IMPEDANCE, damping=0.5, tol=1e-12):
    """Independent 2-bus solution: damped fixed point V <- 1 - z*conj(S/V).

    Returns the complex load-bus voltage; convergence to within ``tol``
    between iterates, no Jacobian involved.
    """
    v = 1.0 + 0.0j
    for _ in range(200000):
        target = 1.0 - z * (load / v).conjugate()
        if abs(target - v) < tol:
            return v
        v = damping * target + (1.0 - damping) * v
    raise AssertionError("fixed-point oracle failed to converge")


def no_fixed_point_exists(load, z=CASE_A_IMPEDANCE, v_step=1e-4):
    """Sweep |V2| over (0, 1.2] and show no voltage satisfies both power balances.

    For a slack at 1.0 over a pure reactance x, the injections at the load bus
    are P = (v/x) sin(delta) and Q = (v cos(delta) - v^2)/x... expressed via
    the trig identity: a magnitude v admits a solution iff
    sin^2 + cos^2 = 1 is attainable, so the residual
    (Px/v)^2 + (v + Qx/v)^2 - 1 must cross zero somewhere.
    """
    x = z.imag
    assert z.real == 0, "oracle assumes a pure reactance"
    p, q = load.real, load.imag
    best = np.inf
    for v in np.arange(v_step, 1.2 + v_step / 2, v_step):
        sin_d = -p * x / v
        cos_d = v + q * x / v
        residual = sin_d**2 + cos_d**2 - 1.0
        best = min(best, residual)
    return best > 0


def random_radial_spec(rng, max_buses=20, s_base=100.0):
    """Seeded random radial feeder: slack at the root, pq loads below."""
    n = int(rng.integers(4, max_buses + 1))
    buses = [Bus(id="b000", nominal_kv=13.8, kind="slack")]
    branches = []
    loads = []
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        r = float(rng.uniform(0.005, 0.04))
        x = float(rng.uniform(0.02, 0.12))
        buses.append(Bus(id=f"b{i:03d}", nominal_kv=13.8, kind="pq"))
        branches.append(
            Branch(
                id=f"ln{i:03d}",
                from_bus=f"b{parent:03d}",
                to_bus=f"b{i:03d}",
                series_impedance=complex(r, x),
                shunt_admittance=complex(0.0, float(rng.uniform(0.0, 0.02))),
            )
        )
        p = float(rng.uniform(1.0, 12.0))
        loads.append(
            Load(id=f"ld{i:03d}", bus=f"b{i:03d}", p_mw=p, q_mvar=p * 0.45)
        )
    return NetworkSpec(
        name="radial",
        base_mva=s_base,
        buses=tuple(buses),
        branches=tuple(branches),
        transformers=(),
        breakers=(),
        loads=tuple(loads),
        generators=(),
    )


def branch_loss_oracle(model, solution):
    """Total complex series losses from per-branch first principles.

    For each branch, compute the two end currents from the solved voltages
    and the pi model directly (no admittance matrix), and sum S_from + S_to.
    """
    sol = solution.island_solutions
    volt = {}
    for s in sol:
        for b, vm in s.bus_vm_pu.items():
            volt[b] = vm * cmath.exp(1j * s.bus_va_rad[b])
    total = 0.0 + 0.0j
    for br in model.branches:
        if br.from_bus not in volt or br.to_bus not in volt:
            continue
        if abs(br.series_impedance) == 0:
            continue
        y = 1.0 / br.series_impedance
        ysh = br.shunt_admittance / 2.0
        t = br.tap_ratio
        vf, vt = volt[br.from_bus], volt[br.to_bus]
        i_from = (vf / t - vt) * y / t + (vf / t**2) * ysh
        i_to = (vt - vf / t) * y + vt * ysh
        total += vf * i_from.conjugate() + vt * i_to.conjugate()
    return total
