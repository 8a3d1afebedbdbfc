"""Per-unit electrical network model with breaker-aware topology processing.

The model is an immutable value: buses, branches, breakers, loads and
generators on a common MVA base. Closed breakers are zero-impedance switches
that merge their endpoints into one electrical node (supernode reduction);
they never appear in the admittance matrix. Three-winding transformers are
expanded into a star of transformer-leg branches around an internal node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

logger = logging.getLogger("nca.network")

BUS_KINDS = ("slack", "pv", "pq")
BUS_CATEGORIES = ("switchyard", "switchgear", "load-center", "mcc", "internal-node")
BRANCH_KINDS = ("line", "cable", "transformer-leg", "source-thevenin")
WINDING_NAMES = ("H", "X", "Y")


class NetworkError(ValueError):
    """Structurally invalid network input (dangling reference, bad base, ...)."""


@dataclass(frozen=True)
class Bus:
    id: str
    nominal_kv: float
    kind: str = "pq"
    category: str = "switchgear"
    safety_related: bool = False


@dataclass(frozen=True)
class Branch:
    """Series element between two buses, impedances in per-unit on the system base.

    ``shunt_admittance`` is the total branch shunt, split half per end when
    stamped. ``rating_mva`` of None means unlimited. ``tap_ratio`` divides the
    from-side voltage (1.0 for plain lines and cables).
    """

    id: str
    from_bus: str
    to_bus: str
    series_impedance: complex
    shunt_admittance: complex = 0j
    tap_ratio: float = 1.0
    rating_mva: float | None = None
    kind: str = "line"


@dataclass(frozen=True)
class Winding:
    name: str
    bus: str
    nominal_kv: float


@dataclass(frozen=True)
class Transformer:
    """2- or 3-winding transformer, pairwise test impedances in percent on its own base.

    ``impedance_pct`` holds ("H-X", r% + jx%) style pairs; ``taps`` holds
    per-winding off-nominal tap ratios applied to the expanded legs.
    """

    id: str
    own_mva_base: float
    windings: tuple[Winding, ...]
    impedance_pct: tuple[tuple[str, complex], ...]
    taps: tuple[tuple[str, float], ...] = ()

    def winding(self, name: str) -> Winding:
        for w in self.windings:
            if w.name == name:
                return w
        raise NetworkError(f"transformer {self.id!r} has no winding {name!r}")

    def pair_impedance_pct(self, a: str, b: str) -> complex:
        key = "-".join(sorted((a, b), key=WINDING_NAMES.index))
        for pair, z in self.impedance_pct:
            if pair == key:
                return z
        raise NetworkError(f"transformer {self.id!r} missing impedance for pair {key!r}")

    def tap(self, name: str) -> float:
        for w, t in self.taps:
            if w == name:
                return t
        return 1.0


@dataclass(frozen=True)
class Breaker:
    id: str
    from_bus: str
    to_bus: str
    normal_state: str = "closed"
    current_state: str = "closed"


@dataclass(frozen=True)
class Load:
    """Constant-power load in MW / MVAr at a bus."""

    id: str
    bus: str
    p_mw: float
    q_mvar: float = 0.0
    group: str | None = None
    safety_related: bool = False


@dataclass(frozen=True)
class Generator:
    id: str
    bus: str
    p_set_mw: float
    v_set_pu: float = 1.0
    q_limits: tuple[float, float] | None = None


@dataclass(frozen=True)
class NetworkSpec:
    """Document form of a network: same elements, transformers unexpanded."""

    name: str
    base_mva: float
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    transformers: tuple[Transformer, ...]
    breakers: tuple[Breaker, ...]
    loads: tuple[Load, ...]
    generators: tuple[Generator, ...]


@dataclass(frozen=True)
class Island:
    """Connected bus group; energized iff it contains a slack or pv bus."""

    buses: tuple[str, ...]
    energized: bool


@dataclass(frozen=True)
class NetworkModel:
    """Validated per-unit model. Branches include expanded transformer legs."""

    name: str
    s_base_mva: float
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    transformers: tuple[Transformer, ...]
    breakers: tuple[Breaker, ...]
    loads: tuple[Load, ...]
    generators: tuple[Generator, ...]
    _bus_map: dict = field(init=False, repr=False, compare=False, default_factory=dict)
    _breaker_map: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_bus_map", {b.id: b for b in self.buses})
        object.__setattr__(self, "_breaker_map", {b.id: b for b in self.breakers})

    def bus(self, bus_id: str) -> Bus:
        try:
            return self._bus_map[bus_id]
        except KeyError:
            raise NetworkError(f"unknown bus {bus_id!r}") from None

    def breaker(self, breaker_id: str) -> Breaker:
        try:
            return self._breaker_map[breaker_id]
        except KeyError:
            raise NetworkError(f"unknown breaker {breaker_id!r}") from None

    def branch(self, branch_id: str) -> Branch:
        for br in self.branches:
            if br.id == branch_id:
                return br
        raise NetworkError(f"unknown branch {branch_id!r}")

    def loads_at(self, bus_id: str) -> tuple[Load, ...]:
        return tuple(l for l in self.loads if l.bus == bus_id)

    def generators_at(self, bus_id: str) -> tuple[Generator, ...]:
        return tuple(g for g in self.generators if g.bus == bus_id)


# ---------------------------------------------------------------------------
# Per-unit conversion

def impedance_pct_to_pu(
    z_pct: complex,
    own_mva_base: float,
    own_kv: float,
    s_base_mva: float,
    v_base_kv: float,
) -> complex:
    """Rebase a percent impedance from equipment base to the system base.

    Z_pu = Z% / 100 * (S_sys / S_own) * (V_own / V_sys)^2
    """
    if own_mva_base <= 0 or s_base_mva <= 0:
        raise NetworkError("MVA base must be positive")
    if own_kv <= 0 or v_base_kv <= 0:
        raise NetworkError("kV base must be positive")
    return z_pct / 100.0 * (s_base_mva / own_mva_base) * (own_kv / v_base_kv) ** 2


def voltage_to_pu(kv: float, v_base_kv: float) -> float:
    if v_base_kv <= 0:
        raise NetworkError("kV base must be positive")
    return kv / v_base_kv


def power_to_pu(p_mw: float, q_mvar: float, s_base_mva: float) -> complex:
    if s_base_mva <= 0:
        raise NetworkError("MVA base must be positive")
    return complex(p_mw / s_base_mva, q_mvar / s_base_mva)


# ---------------------------------------------------------------------------
# Building and validation

def _check_unique(ids: Iterable[str], what: str) -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise NetworkError(f"duplicate {what} id {i!r}")
        seen.add(i)


def _star_legs(xf: Transformer, s_base_mva: float, bus_kv: dict[str, float]) -> list[Branch]:
    """Expand a transformer into transformer-leg branches on the system base.

    A 2-winding unit becomes a single leg between its winding buses. A
    3-winding unit becomes a star: Z_H = (Z_HX + Z_HY - Z_XY) / 2 and cyclic,
    all hung off an internal star node. Negative computed legs are permitted
    but logged.
    """
    names = [w.name for w in xf.windings]

    def z_sys(a: str, b: str) -> complex:
        wa = xf.winding(a)
        return impedance_pct_to_pu(
            xf.pair_impedance_pct(a, b), xf.own_mva_base, wa.nominal_kv,
            s_base_mva, bus_kv[wa.bus],
        )

    if len(xf.windings) == 2:
        a, b = names
        return [
            Branch(
                id=f"{xf.id}-{a}{b}",
                from_bus=xf.winding(a).bus,
                to_bus=xf.winding(b).bus,
                series_impedance=z_sys(a, b),
                tap_ratio=xf.tap(a),
                kind="transformer-leg",
            )
        ]

    star = f"{xf.id}-star"
    pairs = {
        "H": (z_sys("H", "X") + z_sys("H", "Y") - z_sys("X", "Y")) / 2,
        "X": (z_sys("H", "X") + z_sys("X", "Y") - z_sys("H", "Y")) / 2,
        "Y": (z_sys("H", "Y") + z_sys("X", "Y") - z_sys("H", "X")) / 2,
    }
    legs = []
    for name in names:
        z = pairs[name]
        if z.real < 0:
            logger.warning(
                "transformer %s: star leg %s has negative resistance %.6f pu",
                xf.id, name, z.real,
            )
        legs.append(
            Branch(
                id=f"{xf.id}-{name}",
                from_bus=xf.winding(name).bus,
                to_bus=star,
                series_impedance=z,
                tap_ratio=xf.tap(name),
                kind="transformer-leg",
            )
        )
    return legs


def build_network(spec: NetworkSpec) -> NetworkModel:
    """Validate a NetworkSpec and produce the solvable model.

    Expands transformers to star equivalents (adding internal-node buses),
    then checks referential integrity, positive bases, voltage-level
    consistency across branches and breakers, and element invariants.
    """
    if spec.base_mva <= 0:
        raise NetworkError("base_mva must be positive")

    _check_unique((b.id for b in spec.buses), "bus")
    _check_unique((t.id for t in spec.transformers), "transformer")
    _check_unique((b.id for b in spec.breakers), "breaker")
    _check_unique((l.id for l in spec.loads), "load")
    _check_unique((g.id for g in spec.generators), "generator")

    buses = list(spec.buses)
    for b in buses:
        if b.nominal_kv <= 0:
            raise NetworkError(f"bus {b.id!r}: nominal_kv must be positive")
        if b.kind not in BUS_KINDS:
            raise NetworkError(f"bus {b.id!r}: unknown kind {b.kind!r}")
        if b.category not in BUS_CATEGORIES:
            raise NetworkError(f"bus {b.id!r}: unknown category {b.category!r}")

    bus_kv = {b.id: b.nominal_kv for b in buses}

    # Transformer expansion first: legs and star nodes join the branch/bus lists.
    branches = list(spec.branches)
    for xf in spec.transformers:
        if xf.own_mva_base <= 0:
            raise NetworkError(f"transformer {xf.id!r}: own_mva_base must be positive")
        if len(xf.windings) not in (2, 3):
            raise NetworkError(f"transformer {xf.id!r}: needs 2 or 3 windings")
        for w in xf.windings:
            if w.name not in WINDING_NAMES:
                raise NetworkError(f"transformer {xf.id!r}: bad winding name {w.name!r}")
            if w.bus not in bus_kv:
                raise NetworkError(
                    f"transformer {xf.id!r} winding {w.name} references unknown bus {w.bus!r}"
                )
        if len(xf.windings) == 3:
            star_kv = xf.winding("H").nominal_kv
            star = Bus(
                id=f"{xf.id}-star",
                nominal_kv=star_kv,
                kind="pq",
                category="internal-node",
            )
            if star.id in bus_kv:
                raise NetworkError(f"duplicate bus id {star.id!r} from transformer expansion")
            buses.append(star)
            bus_kv[star.id] = star_kv
        branches.extend(_star_legs(xf, spec.base_mva, bus_kv))

    _check_unique((br.id for br in branches), "branch")

    for br in branches:
        for end in (br.from_bus, br.to_bus):
            if end not in bus_kv:
                raise NetworkError(f"branch {br.id!r} references unknown bus {end!r}")
        if br.kind not in BRANCH_KINDS:
            raise NetworkError(f"branch {br.id!r}: unknown kind {br.kind!r}")
        if br.tap_ratio <= 0:
            raise NetworkError(f"branch {br.id!r}: tap_ratio must be positive")
        if abs(br.series_impedance) == 0 and br.kind != "source-thevenin":
            raise NetworkError(f"branch {br.id!r}: zero series impedance")
        if (
            br.kind not in ("transformer-leg", "source-thevenin")
            and bus_kv[br.from_bus] != bus_kv[br.to_bus]
        ):
            raise NetworkError(
                f"branch {br.id!r} joins different voltage levels "
                f"({bus_kv[br.from_bus]} kV / {bus_kv[br.to_bus]} kV) without transformer kind"
            )

    for bk in spec.breakers:
        for end in (bk.from_bus, bk.to_bus):
            if end not in bus_kv:
                raise NetworkError(f"breaker {bk.id!r} references unknown bus {end!r}")
        if bk.normal_state not in ("open", "closed") or bk.current_state not in ("open", "closed"):
            raise NetworkError(f"breaker {bk.id!r}: state must be open or closed")
        if bus_kv[bk.from_bus] != bus_kv[bk.to_bus]:
            raise NetworkError(f"breaker {bk.id!r} joins different voltage levels")

    for l in spec.loads:
        if l.bus not in bus_kv:
            raise NetworkError(f"load {l.id!r} references unknown bus {l.bus!r}")
        if l.p_mw < 0:
            raise NetworkError(f"load {l.id!r}: p_mw must be nonnegative")

    kind_of = {b.id: b.kind for b in buses}
    for g in spec.generators:
        if g.bus not in bus_kv:
            raise NetworkError(f"generator {g.id!r} references unknown bus {g.bus!r}")
        if kind_of[g.bus] == "pq":
            raise NetworkError(
                f"generator {g.id!r}: bus {g.bus!r} must be kind pv or slack"
            )

    return NetworkModel(
        name=spec.name,
        s_base_mva=spec.base_mva,
        buses=tuple(buses),
        branches=tuple(branches),
        transformers=spec.transformers,
        breakers=spec.breakers,
        loads=spec.loads,
        generators=spec.generators,
    )


# ---------------------------------------------------------------------------
# Topology

class _UnionFind:
    def __init__(self, items: Iterable[str]) -> None:
        self.parent = {i: i for i in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Smallest id wins as representative, for deterministic output.
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def merged_nodes(model: NetworkModel) -> dict[str, str]:
    """Map every bus to its electrical node id after supernode reduction.

    Closed breakers merge endpoints, as do zero-impedance source-thevenin
    branches (the ideal-source contingency). Node id is the smallest bus id
    in the merged group.
    """
    uf = _UnionFind(b.id for b in model.buses)
    for bk in model.breakers:
        if bk.current_state == "closed":
            uf.union(bk.from_bus, bk.to_bus)
    for br in model.branches:
        if br.kind == "source-thevenin" and abs(br.series_impedance) == 0:
            uf.union(br.from_bus, br.to_bus)
    return {b.id: uf.find(b.id) for b in model.buses}


def connected_islands(model: NetworkModel) -> tuple[Island, ...]:
    """Partition buses into islands over branches plus closed breakers.

    Every bus lands in exactly one island. An island is energized iff it
    contains a slack or pv bus. Islands are ordered by their smallest bus id.
    """
    uf = _UnionFind(b.id for b in model.buses)
    for br in model.branches:
        uf.union(br.from_bus, br.to_bus)
    for bk in model.breakers:
        if bk.current_state == "closed":
            uf.union(bk.from_bus, bk.to_bus)

    groups: dict[str, list[str]] = {}
    for b in model.buses:
        groups.setdefault(uf.find(b.id), []).append(b.id)

    islands = []
    for root in sorted(groups):
        members = tuple(sorted(groups[root]))
        energized = any(model.bus(m).kind in ("slack", "pv") for m in members)
        islands.append(Island(buses=members, energized=energized))
    return tuple(islands)


def apply_switching(
    model: NetworkModel, actions: Sequence[tuple[str, str]]
) -> NetworkModel:
    """Return a new model with ("open"|"close", breaker_id) actions applied in order.

    Only breaker current_state changes; impedances, loads and generators are
    untouched. The input model is never modified.
    """
    states = {bk.id: bk.current_state for bk in model.breakers}
    for op, breaker_id in actions:
        if breaker_id not in states:
            raise NetworkError(f"unknown breaker {breaker_id!r}")
        if op not in ("open", "close"):
            raise NetworkError(f"unknown switching action {op!r}")
        states[breaker_id] = "open" if op == "open" else "closed"
    breakers = tuple(
        bk if states[bk.id] == bk.current_state else replace(bk, current_state=states[bk.id])
        for bk in model.breakers
    )
    return replace(model, breakers=breakers)
