"""Shared fixtures: the running phone/call example and its expected results.

The base call graph has five phones (ids 11..15) and six calls; two of the
calls are an identical duplicated pair, exercising bag semantics.  Expected
outcomes that depend on call durations are computed from the flat call list
in each test rather than copied from engine output.
"""
from __future__ import annotations

import datetime

import pytest

from graphoid.dims import (
    DimensionCatalog,
    DimensionInstance,
    DimensionSchema,
    Level,
    open_dimension,
)
from graphoid.hypergraph import EdgeTypeDecl, NodeTypeDecl, build_graphoid

DAY = datetime.date


@pytest.fixture(scope="session")
def phone_dimension() -> DimensionInstance:
    schema = DimensionSchema(
        name="Phone",
        levels=(
            Level("Phone"),
            Level("Operator"),
            Level("Customer"),
            Level("City"),
            Level("Country"),
            Level("All", ordered=False),
        ),
        edges=(
            ("Phone", "Operator"),
            ("Phone", "Customer"),
            ("Customer", "City"),
            ("City", "Country"),
            ("Operator", "All"),
            ("Country", "All"),
        ),
    )
    return DimensionInstance.build(
        schema,
        members={
            "Phone": {"Ph1", "Ph2", "Ph3", "Ph4", "Ph5"},
            "Operator": {"ATT", "Vodafone", "Movistar"},
            "Customer": {"C1", "C2", "C3"},
            "City": {"Rosario", "Salta"},
            "Country": {"Argentina"},
        },
        parents=[
            ("Ph1", "Phone", "ATT", "Operator"),
            ("Ph2", "Phone", "Vodafone", "Operator"),
            ("Ph3", "Phone", "Movistar", "Operator"),
            ("Ph4", "Phone", "Vodafone", "Operator"),
            ("Ph5", "Phone", "Movistar", "Operator"),
            ("Ph1", "Phone", "C1", "Customer"),
            ("Ph2", "Phone", "C1", "Customer"),
            ("Ph3", "Phone", "C2", "Customer"),
            ("Ph4", "Phone", "C3", "Customer"),
            ("Ph5", "Phone", "C3", "Customer"),
            ("C1", "Customer", "Rosario", "City"),
            ("C2", "Customer", "Salta", "City"),
            ("C3", "Customer", "Salta", "City"),
            ("Rosario", "City", "Argentina", "Country"),
            ("Salta", "City", "Argentina", "Country"),
        ],
    )


@pytest.fixture(scope="session")
def time_dimension() -> DimensionInstance:
    schema = DimensionSchema(
        name="Time",
        levels=(
            Level("Day", vtype="date"),
            Level("Month"),
            Level("Year", vtype="int"),
            Level("All", ordered=False),
        ),
        edges=(("Day", "Month"), ("Month", "Year"), ("Year", "All")),
    )
    days = [DAY(2016, 10, 10), DAY(2016, 10, 12), DAY(2016, 11, 1), DAY(2016, 12, 25)]
    return DimensionInstance.build(
        schema,
        members={
            "Day": set(days),
            "Month": {"2016-10", "2016-11", "2016-12"},
            "Year": {2016},
        },
        parents=[(d, "Day", f"{d.year}-{d.month:02d}", "Month") for d in days]
        + [(m, "Month", 2016, "Year") for m in ("2016-10", "2016-11", "2016-12")],
    )


@pytest.fixture(scope="session")
def figures_catalog(phone_dimension, time_dimension) -> DimensionCatalog:
    return DimensionCatalog.of(phone_dimension, time_dimension, open_dimension("Duration"))


PHONE_DECL = NodeTypeDecl("#Phone", ("Id", "Phone"))
CALL_DECL = EdgeTypeDecl("#Call", ("Time", "Duration"), measures=((1, "SUM"),))

BASE_NODES = [
    ("#Phone", 11, "Ph1"),
    ("#Phone", 12, "Ph2"),
    ("#Phone", 13, "Ph3"),
    ("#Phone", 14, "Ph4"),
    ("#Phone", 15, "Ph5"),
]

# (source, target, day, duration); the first two rows are the duplicated pair
BASE_CALLS = [
    ([11], [12], DAY(2016, 10, 10), 4),
    ([11], [12], DAY(2016, 10, 10), 4),
    ([14], [13], DAY(2016, 10, 12), 5),
    ([14], [15], DAY(2016, 11, 1), 2),
    ([13], [12, 15], DAY(2016, 10, 10), 10),
    ([15], [12, 13], DAY(2016, 12, 25), 7),
]

BASE_LEVELS = {("#Phone", 1): "Phone", ("#Call", 0): "Day", ("#Call", 1): "Duration"}

OPERATOR_OF = {11: "ATT", 12: "Vodafone", 13: "Movistar", 14: "Vodafone", 15: "Movistar"}

# minimize contracts each operator group to its smallest node id
CONTRACTION = {11: 11, 12: 12, 13: 13, 14: 12, 15: 13}


@pytest.fixture(scope="session")
def base_graph(figures_catalog):
    return build_graphoid(
        figures_catalog,
        [PHONE_DECL],
        [CALL_DECL],
        BASE_NODES,
        [("#Call", s, t, d, dur) for s, t, d, dur in BASE_CALLS],
        levels=BASE_LEVELS,
    )


@pytest.fixture(scope="session")
def operator_graph(figures_catalog):
    """The base graph with phone numbers replaced by operator names."""
    return build_graphoid(
        figures_catalog,
        [PHONE_DECL],
        [CALL_DECL],
        [("#Phone", i, OPERATOR_OF[i]) for i in (11, 12, 13, 14, 15)],
        [("#Call", s, t, d, dur) for s, t, d, dur in BASE_CALLS],
        levels={**BASE_LEVELS, ("#Phone", 1): "Operator"},
    )


@pytest.fixture(scope="session")
def minimal_operator_graph(figures_catalog):
    """The operator graph after contraction: three nodes, all six calls."""
    rewrite = CONTRACTION
    return build_graphoid(
        figures_catalog,
        [PHONE_DECL],
        [CALL_DECL],
        [("#Phone", i, OPERATOR_OF[i]) for i in (11, 12, 13)],
        [
            ("#Call", sorted({rewrite[i] for i in s}), sorted({rewrite[i] for i in t}), d, dur)
            for s, t, d, dur in BASE_CALLS
        ],
        levels={**BASE_LEVELS, ("#Phone", 1): "Operator"},
    )


@pytest.fixture(scope="session")
def year_rollup_graph(figures_catalog):
    """Roll-up of the minimal operator graph over Time Day->Year, Duration summed.

    Expected cells computed flat from BASE_CALLS: group the contracted calls
    by (source, target, year) and sum durations.
    """
    groups: dict[tuple, int] = {}
    for s, t, d, dur in BASE_CALLS:
        key = (
            tuple(sorted({CONTRACTION[i] for i in s})),
            tuple(sorted({CONTRACTION[i] for i in t})),
            d.year,
        )
        groups[key] = groups.get(key, 0) + dur
    return build_graphoid(
        figures_catalog,
        [PHONE_DECL],
        [CALL_DECL],
        [("#Phone", i, OPERATOR_OF[i]) for i in (11, 12, 13)],
        [("#Call", list(s), list(t), year, total) for (s, t, year), total in sorted(groups.items())],
        levels={("#Phone", 1): "Operator", ("#Call", 0): "Year", ("#Call", 1): "Duration"},
    )
