"""Built-in reference study: a single-unit PWR-style auxiliary power system.

The network is invented fixture data, sized so that each study contingency
produces its documented qualitative signature (de-energization, undervoltage,
overvoltage, or a capacity advisory) and each catalog plan clears it. It is
not any real plant's data.

Topology sketch (345 kV down to 208 V):

    grid (slack) --[transmission-line 2500 MW]-- switchyard --[step-up]-- gen (1800 MW)
      |                                                          |
      +--[reserve-feed, thevenin]-- reserve-swyd == SAT-2B       +== UAT-2B
            SAT X: 4kv-2D, 4kv-2F      SAT Y: 4kv-2E, 4kv-2G (normal feeds)
            UAT X: 4kv-turb            UAT Y: standby for 2E/2G
    600 V load centers and MCC / 480 V / 208 V levels hang below, including
    the cooling-fan MCCs behind breakers DE03/DG15, a boosted 208 V group
    with a normally-open temporary feed from the turbine building, and a
    safety 600 V load center with a 1.05 pu alternate source behind a
    normally-open tie breaker.
"""

from __future__ import annotations

from .network import NetworkSpec
from .studyio import StudySpec, parse_network_spec, parse_study_spec

# Loads in MW / MVAr.
_FAN_P, _FAN_Q = 1.7, 0.85          # one cooling-tower fan on the 2E/2G side
_DF_FAN_P, _DF_FAN_Q = 1.5, 0.75   # redundant fans on the 2D/2F side
_EMERG_P, _EMERG_Q = 2.0, 1.0      # safety load center behind the tie breaker

LOCA_GROUP = "loca-cooling-fans"
LOCA_SCALE = 2.0


def _network_document() -> dict:
    buses = [
        {"id": "grid", "nominal_kv": 345.0, "kind": "slack", "category": "switchyard"},
        {"id": "switchyard", "nominal_kv": 345.0, "category": "switchyard"},
        {"id": "reserve-swyd", "nominal_kv": 345.0, "category": "switchyard"},
        {"id": "gen-22kv", "nominal_kv": 22.0, "kind": "pv", "category": "switchgear"},
        {"id": "sat2b-x", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "sat2b-y", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "uat2b-x", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "uat2b-y", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "4kv-2D", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "4kv-2E", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "4kv-2F", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "4kv-2G", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "4kv-turb", "nominal_kv": 4.16, "category": "switchgear"},
        {"id": "600V Load Center 2W", "nominal_kv": 0.6, "category": "load-center"},
        {"id": "600V MCC 1G", "nominal_kv": 0.6, "category": "mcc"},
        {"id": "600V Load Center 2U", "nominal_kv": 0.6, "category": "load-center"},
        {"id": "480V MCC 2E", "nominal_kv": 0.48, "category": "mcc"},
        {"id": "600V Load Center 2Z", "nominal_kv": 0.6, "category": "load-center"},
        {"id": "600V MCC 2T", "nominal_kv": 0.6, "category": "mcc"},
        {"id": "600V Load Center 2X", "nominal_kv": 0.6, "category": "load-center"},
        {"id": "480V MCC 2G", "nominal_kv": 0.48, "category": "mcc"},
        {"id": "600V Load Center 2D", "nominal_kv": 0.6, "category": "load-center"},
        {"id": "480V MCC 2D", "nominal_kv": 0.48, "category": "mcc"},
        {"id": "600V Load Center 2F", "nominal_kv": 0.6, "category": "load-center"},
        {"id": "480V MCC 2F", "nominal_kv": 0.48, "category": "mcc"},
        {"id": "208V Swgr 2A", "nominal_kv": 0.208, "category": "switchgear"},
        {"id": "208V MCC 2M", "nominal_kv": 0.208, "category": "mcc"},
        {"id": "208V MCC 1N", "nominal_kv": 0.208, "category": "mcc"},
        {"id": "208V MCC 2A", "nominal_kv": 0.208, "category": "mcc"},
        {"id": "208V MCC 2B", "nominal_kv": 0.208, "category": "mcc"},
        {"id": "600V Turb LC 2B", "nominal_kv": 0.6, "category": "load-center"},
        {"id": "208V Turb Dist 2J", "nominal_kv": 0.208, "category": "mcc"},
        {"id": "2S-pri", "nominal_kv": 4.16, "category": "internal-node"},
        {"id": "600V Sec 2S", "nominal_kv": 0.6, "category": "internal-node"},
        {
            "id": "600V Load Center 2E Emerg", "nominal_kv": 0.6,
            "category": "load-center", "safety_related": True,
        },
        {
            "id": "600V Alt Source 2S", "nominal_kv": 0.6, "kind": "pv",
            "category": "switchgear", "safety_related": True,
        },
    ]

    branches = [
        {
            "id": "transmission-line", "from_bus": "grid", "to_bus": "switchyard",
            "r_pu": 0.0002, "x_pu": 0.004, "rating_mva": 2500.0, "kind": "line",
        },
        {
            "id": "reserve-feed", "from_bus": "grid", "to_bus": "reserve-swyd",
            "r_pu": 0.02, "x_pu": 0.35, "kind": "source-thevenin",
        },
        # Emergency cable decouples the safety load center from the boosted
        # normal feed so the alternate source cannot clamp the feeder stub.
        {
            "id": "emerg-cable-2s", "from_bus": "600V Sec 2S",
            "to_bus": "600V Load Center 2E Emerg",
            "r_pu": 2.0, "x_pu": 6.0, "kind": "cable",
        },
    ]

    transformers = [
        {
            "id": "step-up", "own_mva_base": 2000.0,
            "windings": [
                {"name": "H", "bus": "switchyard", "nominal_kv": 345.0},
                {"name": "X", "bus": "gen-22kv", "nominal_kv": 22.0},
            ],
            "impedance_pct": {"H-X": [0.3, 10.0]},
        },
        {
            "id": "SAT-2B", "own_mva_base": 60.0,
            "windings": [
                {"name": "H", "bus": "reserve-swyd", "nominal_kv": 345.0},
                {"name": "X", "bus": "sat2b-x", "nominal_kv": 4.16},
                {"name": "Y", "bus": "sat2b-y", "nominal_kv": 4.16},
            ],
            "impedance_pct": {"H-X": [1.0, 8.0], "H-Y": [1.0, 8.0], "X-Y": [2.0, 14.0]},
            "taps": {"H": 0.95},
        },
        {
            "id": "UAT-2B", "own_mva_base": 60.0,
            "windings": [
                {"name": "H", "bus": "gen-22kv", "nominal_kv": 22.0},
                {"name": "X", "bus": "uat2b-x", "nominal_kv": 4.16},
                {"name": "Y", "bus": "uat2b-y", "nominal_kv": 4.16},
            ],
            "impedance_pct": {"H-X": [1.0, 8.0], "H-Y": [1.0, 8.0], "X-Y": [2.0, 14.0]},
        },
        {
            "id": "ss-2W", "own_mva_base": 5.0,
            "windings": [
                {"name": "H", "bus": "4kv-2E", "nominal_kv": 4.16},
                {"name": "X", "bus": "600V Load Center 2W", "nominal_kv": 0.6},
            ],
            "impedance_pct": {"H-X": [1.1, 5.75]},
        },
        {
            "id": "ss-2U", "own_mva_base": 5.0,
            "windings": [
                {"name": "H", "bus": "4kv-2E", "nominal_kv": 4.16},
                {"name": "X", "bus": "600V Load Center 2U", "nominal_kv": 0.6},
            ],
            "impedance_pct": {"H-X": [1.1, 5.75]},
        },
        {
            "id": "ss-2Z", "own_mva_base": 5.0,
            "windings": [
                {"name": "H", "bus": "4kv-2G", "nominal_kv": 4.16},
                {"name": "X", "bus": "600V Load Center 2Z", "nominal_kv": 0.6},
            ],
            "impedance_pct": {"H-X": [1.1, 5.75]},
        },
        {
            "id": "ss-2X", "own_mva_base": 5.0,
            "windings": [
                {"name": "H", "bus": "4kv-2G", "nominal_kv": 4.16},
                {"name": "X", "bus": "600V Load Center 2X", "nominal_kv": 0.6},
            ],
            "impedance_pct": {"H-X": [1.1, 5.75]},
        },
        {
            "id": "ss-480e", "own_mva_base": 2.0,
            "windings": [
                {"name": "H", "bus": "600V Load Center 2U", "nominal_kv": 0.6},
                {"name": "X", "bus": "480V MCC 2E", "nominal_kv": 0.48},
            ],
            "impedance_pct": {"H-X": [1.5, 5.0]},
        },
        {
            "id": "ss-480g", "own_mva_base": 2.0,
            "windings": [
                {"name": "H", "bus": "600V Load Center 2X", "nominal_kv": 0.6},
                {"name": "X", "bus": "480V MCC 2G", "nominal_kv": 0.48},
            ],
            "impedance_pct": {"H-X": [1.5, 5.0]},
        },
        {
            "id": "ss-600-2d", "own_mva_base": 7.5,
            "windings": [
                {"name": "H", "bus": "4kv-2D", "nominal_kv": 4.16},
                {"name": "X", "bus": "600V Load Center 2D", "nominal_kv": 0.6},
            ],
            "impedance_pct": {"H-X": [1.0, 6.0]},
        },
        {
            "id": "ss-480d", "own_mva_base": 2.0,
            "windings": [
                {"name": "H", "bus": "600V Load Center 2D", "nominal_kv": 0.6},
                {"name": "X", "bus": "480V MCC 2D", "nominal_kv": 0.48},
            ],
            "impedance_pct": {"H-X": [1.5, 5.0]},
        },
        {
            "id": "ss-600-2f", "own_mva_base": 7.5,
            "windings": [
                {"name": "H", "bus": "4kv-2F", "nominal_kv": 4.16},
                {"name": "X", "bus": "600V Load Center 2F", "nominal_kv": 0.6},
            ],
            "impedance_pct": {"H-X": [1.0, 6.0]},
        },
        {
            "id": "ss-480f", "own_mva_base": 2.0,
            "windings": [
                {"name": "H", "bus": "600V Load Center 2F", "nominal_kv": 0.6},
                {"name": "X", "bus": "480V MCC 2F", "nominal_kv": 0.48},
            ],
            "impedance_pct": {"H-X": [1.5, 5.0]},
        },
        # Fixed boost taps hold the lightly loaded 208 V group high-normal, so
        # stiffening the reserve source pushes exactly this group over the top.
        {
            "id": "ss-208-2a", "own_mva_base": 1.0,
            "windings": [
                {"name": "H", "bus": "600V Load Center 2D", "nominal_kv": 0.6},
                {"name": "X", "bus": "208V Swgr 2A", "nominal_kv": 0.208},
            ],
            "impedance_pct": {"H-X": [1.2, 4.5]},
            "taps": {"H": 0.905},
        },
        {
            "id": "ss-600-turb", "own_mva_base": 7.5,
            "windings": [
                {"name": "H", "bus": "4kv-turb", "nominal_kv": 4.16},
                {"name": "X", "bus": "600V Turb LC 2B", "nominal_kv": 0.6},
            ],
            "impedance_pct": {"H-X": [1.0, 6.0]},
        },
        {
            "id": "ss-208-turb", "own_mva_base": 1.0,
            "windings": [
                {"name": "H", "bus": "600V Turb LC 2B", "nominal_kv": 0.6},
                {"name": "X", "bus": "208V Turb Dist 2J", "nominal_kv": 0.208},
            ],
            "impedance_pct": {"H-X": [1.2, 4.5]},
            "taps": {"H": 0.97},
        },
        # Normal feed for the safety load center; the boost tap compensates a
        # deliberately long, weak feeder.
        {
            "id": "xe-2s", "own_mva_base": 1.5,
            "windings": [
                {"name": "H", "bus": "2S-pri", "nominal_kv": 4.16},
                {"name": "X", "bus": "600V Sec 2S", "nominal_kv": 0.6},
            ],
            "impedance_pct": {"H-X": [1.3, 5.2]},
            "taps": {"H": 0.87},
        },
    ]

    breakers = [
        {"id": "2D-sat-in", "from_bus": "sat2b-x", "to_bus": "4kv-2D"},
        {"id": "2F-sat-in", "from_bus": "sat2b-x", "to_bus": "4kv-2F"},
        {"id": "2E-sat-in", "from_bus": "sat2b-y", "to_bus": "4kv-2E"},
        {"id": "2G-sat-in", "from_bus": "sat2b-y", "to_bus": "4kv-2G"},
        {"id": "2E-uat-in", "from_bus": "uat2b-y", "to_bus": "4kv-2E", "normal_state": "open"},
        {"id": "2G-uat-in", "from_bus": "uat2b-y", "to_bus": "4kv-2G", "normal_state": "open"},
        {"id": "turb-in", "from_bus": "uat2b-x", "to_bus": "4kv-turb"},
        {"id": "DE03", "from_bus": "600V Load Center 2W", "to_bus": "600V MCC 1G"},
        {"id": "DG15", "from_bus": "600V Load Center 2Z", "to_bus": "600V MCC 2T"},
        {"id": "208-mcc-2m-in", "from_bus": "208V Swgr 2A", "to_bus": "208V MCC 2M"},
        {"id": "208-mcc-1n-in", "from_bus": "208V Swgr 2A", "to_bus": "208V MCC 1N"},
        {"id": "208-mcc-2a-in", "from_bus": "208V Swgr 2A", "to_bus": "208V MCC 2A"},
        {"id": "208-mcc-2b-in", "from_bus": "208V Swgr 2A", "to_bus": "208V MCC 2B"},
        {
            "id": "208-temp-feed", "from_bus": "208V Turb Dist 2J",
            "to_bus": "208V Swgr 2A", "normal_state": "open",
        },
        {"id": "2S-normal-in", "from_bus": "4kv-turb", "to_bus": "2S-pri"},
        {
            "id": "tie-2S", "from_bus": "600V Alt Source 2S",
            "to_bus": "600V Load Center 2E Emerg", "normal_state": "open",
        },
    ]

    loads = [
        {"id": "lc-2w-load", "bus": "600V Load Center 2W", "p_mw": 0.9, "q_mvar": 0.45},
        {"id": "ct-fan-1g-a", "bus": "600V MCC 1G", "p_mw": _FAN_P, "q_mvar": _FAN_Q,
         "group": LOCA_GROUP},
        {"id": "ct-fan-1g-b", "bus": "600V MCC 1G", "p_mw": _FAN_P, "q_mvar": _FAN_Q,
         "group": LOCA_GROUP},
        {"id": "lc-2u-load", "bus": "600V Load Center 2U", "p_mw": 0.9, "q_mvar": 0.45},
        {"id": "mcc-480e-load", "bus": "480V MCC 2E", "p_mw": 0.5, "q_mvar": 0.25},
        {"id": "lc-2z-load", "bus": "600V Load Center 2Z", "p_mw": 0.9, "q_mvar": 0.45},
        {"id": "ct-fan-2t-a", "bus": "600V MCC 2T", "p_mw": _FAN_P, "q_mvar": _FAN_Q,
         "group": LOCA_GROUP},
        {"id": "ct-fan-2t-b", "bus": "600V MCC 2T", "p_mw": _FAN_P, "q_mvar": _FAN_Q,
         "group": LOCA_GROUP},
        {"id": "lc-2x-load", "bus": "600V Load Center 2X", "p_mw": 0.9, "q_mvar": 0.45},
        {"id": "mcc-480g-load", "bus": "480V MCC 2G", "p_mw": 0.5, "q_mvar": 0.25},
        {"id": "lc-2d-load", "bus": "600V Load Center 2D", "p_mw": 1.5, "q_mvar": 0.7},
        {"id": "ct-fan-2d-a", "bus": "600V Load Center 2D", "p_mw": _DF_FAN_P,
         "q_mvar": _DF_FAN_Q, "group": "cooling-tower-fans"},
        {"id": "ct-fan-2d-b", "bus": "600V Load Center 2D", "p_mw": _DF_FAN_P,
         "q_mvar": _DF_FAN_Q, "group": "cooling-tower-fans"},
        {"id": "mcc-480d-load", "bus": "480V MCC 2D", "p_mw": 0.4, "q_mvar": 0.2},
        {"id": "lc-2f-load", "bus": "600V Load Center 2F", "p_mw": 1.5, "q_mvar": 0.7},
        {"id": "ct-fan-2f-a", "bus": "600V Load Center 2F", "p_mw": _DF_FAN_P,
         "q_mvar": _DF_FAN_Q, "group": "cooling-tower-fans"},
        {"id": "ct-fan-2f-b", "bus": "600V Load Center 2F", "p_mw": _DF_FAN_P,
         "q_mvar": _DF_FAN_Q, "group": "cooling-tower-fans"},
        {"id": "mcc-480f-load", "bus": "480V MCC 2F", "p_mw": 0.4, "q_mvar": 0.2},
        {"id": "mcc-2m-load", "bus": "208V MCC 2M", "p_mw": 0.06, "q_mvar": 0.02,
         "group": "rad-monitors"},
        {"id": "mcc-1n-load", "bus": "208V MCC 1N", "p_mw": 0.06, "q_mvar": 0.02,
         "group": "rad-monitors"},
        {"id": "mcc-2a-load", "bus": "208V MCC 2A", "p_mw": 0.05, "q_mvar": 0.015,
         "group": "rad-monitors"},
        {"id": "mcc-2b-load", "bus": "208V MCC 2B", "p_mw": 0.05, "q_mvar": 0.015,
         "group": "rad-monitors"},
        {"id": "turb-lc-load", "bus": "600V Turb LC 2B", "p_mw": 2.5, "q_mvar": 1.2},
        {"id": "turb-208-load", "bus": "208V Turb Dist 2J", "p_mw": 0.15, "q_mvar": 0.05},
        {"id": "emerg-load-2s", "bus": "600V Load Center 2E Emerg", "p_mw": _EMERG_P,
         "q_mvar": _EMERG_Q, "safety_related": True},
    ]

    generators = [
        {"id": "main-gen", "bus": "gen-22kv", "p_set_mw": 1800.0, "v_set_pu": 1.0},
        {"id": "alt-src-2s", "bus": "600V Alt Source 2S", "p_set_mw": _EMERG_P,
         "v_set_pu": 1.05},
    ]

    return {
        "name": "pwr-unit2-aux",
        "base_mva": 100.0,
        "buses": buses,
        "branches": branches,
        "transformers": transformers,
        "breakers": breakers,
        "loads": loads,
        "generators": generators,
    }


def _study_document() -> dict:
    return {
        "contingencies": [
            {
                "id": "y-winding-outage",
                "kind": "transformer-winding-outage",
                "transformer": "SAT-2B",
                "winding": "Y",
                "description": "Failure of the SAT 2B Y winding during normal operation",
            },
            {
                "id": "loca-overlay",
                "kind": "load-overlay",
                "group": LOCA_GROUP,
                "scale": LOCA_SCALE,
                "description": (
                    "Accident cooling duty left on the SAT 2B Y winding, doubling "
                    "the cooling-tower fan loading on the 2E/2G side"
                ),
            },
            {
                "id": "zero-system-impedance",
                "kind": "source-impedance-change",
                "branch": "reserve-feed",
                "r_pu": 0.0,
                "x_pu": 0.0,
                "description": "Reserve source impedance collapses to zero during an outage",
            },
            {
                "id": "line-capacity-1200",
                "kind": "line-capacity-reduction",
                "branch": "transmission-line",
                "new_capacity_mw": 1200.0,
                "critical_floor_mw": 1000.0,
                "description": "Transmission line capacity reduced from 2500 MW to 1200 MW",
            },
            {
                "id": "tie-breaker-stuck",
                "kind": "breaker-stuck-closed",
                "breaker": "tie-2S",
                "description": "Tie breaker to the alternate 600 V source fails closed",
            },
            {
                "id": "sat-breaker-fail-open",
                "kind": "breaker-fail-open",
                "breaker": "2E-sat-in",
                "description": "Incoming SAT breaker for bus 2E fails open (UAT breaker open)",
            },
        ],
        "ras_catalog": [
            {
                "id": "fbt-to-uat",
                "intended_contingency": "y-winding-outage",
                "applicable_kinds": ["transformer-winding-outage"],
                "description": (
                    "Fast bus transfer of 2E from SAT to UAT; close the 2G UAT "
                    "infeed (the 2G supply breaker stays closed on the dead "
                    "winding side so the winding bus remains energized)"
                ),
                "actions": [
                    {"kind": "fast-bus-transfer", "open": "2E-sat-in", "close": "2E-uat-in"},
                    {"kind": "close-breaker", "breaker": "2G-uat-in"},
                ],
            },
            {
                "id": "shed-de03-dg15",
                "intended_contingency": "loca-overlay",
                "applicable_kinds": ["load-overlay"],
                "description": (
                    "Manually open breakers DE03 and DG15 to shed the cooling-tower "
                    "fan loading, modeled as dropping the fan load group; the "
                    "redundant fans on the 2D/2F side carry the cooling duty"
                ),
                "actions": [{"kind": "shed-load-group", "group": LOCA_GROUP}],
            },
            {
                "id": "temp-feed-208",
                "intended_contingency": "zero-system-impedance",
                "applicable_kinds": ["source-impedance-change"],
                "description": (
                    "Parallel temporary power from the turbine building 208 V "
                    "distribution onto the 208 V switchgear"
                ),
                "actions": [
                    {
                        "kind": "temporary-feed",
                        "close": "208-temp-feed",
                        "note": "temporary power from turbine building switchgear",
                    }
                ],
            },
            {
                "id": "curtail-to-capacity",
                "intended_contingency": "line-capacity-1200",
                "applicable_kinds": ["line-capacity-reduction"],
                "description": (
                    "Curtail plant output to the reduced line capacity and contact "
                    "grid operators to replace the shortfall from other plants"
                ),
                "actions": [{"kind": "redispatch", "generator": "main-gen", "p_mw": 1200.0}],
            },
            {
                "id": "isolate-normal-source",
                "intended_contingency": "tie-breaker-stuck",
                "applicable_kinds": ["breaker-stuck-closed"],
                "description": (
                    "Open the normal-source breaker so the safety load center is "
                    "powered by the alternate source only"
                ),
                "actions": [{"kind": "open-breaker", "breaker": "2S-normal-in"}],
            },
            {
                "id": "supervised-fbt",
                "intended_contingency": "sat-breaker-fail-open",
                "applicable_kinds": ["breaker-fail-open"],
                "description": "Supervised fast bus transfer of 2E to the UAT",
                "actions": [
                    {"kind": "fast-bus-transfer", "open": "2E-sat-in", "close": "2E-uat-in"}
                ],
            },
        ],
        "limits": {"under_pct": 90.0, "over_pct": 110.0},
        "solver": {"tolerance": 1e-6, "max_iterations": 50, "flat_start": True},
    }


def reference_network() -> tuple[NetworkSpec, StudySpec]:
    """Deterministic built-in fixture: network spec plus its six-case study."""
    return parse_network_spec(_network_document()), parse_study_spec(_study_document())
