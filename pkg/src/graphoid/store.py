"""Persistence and data sources: JSON round trips, CSV ingest, synthetic calls.

Scalars are typed by the level they sit at, so dates travel as ISO strings and
come back as date objects.  Dimension instance files embed their schema to
stay self-contained.
"""
from __future__ import annotations

import csv
import datetime
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .cubes import Cube, CubeMeasure, build_cube
from .dims import (
    ALL_LEVEL,
    DimensionCatalog,
    DimensionInstance,
    DimensionSchema,
    Level,
    all_level,
    open_dimension,
)
from .hypergraph import (
    EdgeTypeDecl,
    Graphoid,
    GraphoidError,
    Node,
    NodeTypeDecl,
    build_graphoid,
)


class StoreError(GraphoidError):
    pass


def _value_to_json(value: object) -> object:
    if isinstance(value, datetime.date):
        return value.isoformat()
    return value


def _value_from_json(vtype: str, raw: object) -> object:
    if vtype == "date" and isinstance(raw, str):
        return datetime.date.fromisoformat(raw)
    return raw


# ---------------------------------------------------------------------------
# dimension schemas and instances

def schema_to_json(schema: DimensionSchema) -> dict:
    return {
        "name": schema.name,
        "levels": [
            {"name": lv.name, "type": lv.vtype, "ordered": lv.ordered, "open": lv.open}
            for lv in schema.levels
        ],
        "edges": [[child, parent] for child, parent in schema.edges],
    }


def schema_from_json(raw: dict) -> DimensionSchema:
    levels = []
    for entry in raw["levels"]:
        if isinstance(entry, str):
            levels.append(all_level() if entry == ALL_LEVEL else Level(entry))
        else:
            levels.append(
                Level(
                    entry["name"],
                    entry.get("type", "string"),
                    entry.get("ordered", True),
                    entry.get("open", False),
                )
            )
    edges = tuple((child, parent) for child, parent in raw["edges"])
    return DimensionSchema(raw["name"], tuple(levels), edges)


def instance_to_json(instance: DimensionInstance) -> dict:
    schema = instance.schema
    members = {
        level: [_value_to_json(m) for m in sorted(ms, key=repr)]
        for level, ms in sorted(instance.members.items())
        if level != ALL_LEVEL
    }
    parents = [
        [_value_to_json(c), cl, _value_to_json(p), pl]
        for c, cl, p, pl in instance.parent_quads
        if pl != ALL_LEVEL
    ]
    return {"schema": schema_to_json(schema), "members": members, "parents": parents}


def instance_from_json(raw: dict, schema: DimensionSchema | None = None) -> DimensionInstance:
    declared = raw.get("schema")
    if isinstance(declared, dict):
        schema = schema_from_json(declared)
    if schema is None:
        raise StoreError("instance file names a schema that was not supplied")
    members = {}
    for level, values in raw.get("members", {}).items():
        vtype = schema.level(level).vtype if schema.has_level(level) else "string"
        members[level] = frozenset(_value_from_json(vtype, v) for v in values)
    parents = []
    for child, clv, parent, plv in raw.get("parents", ()):
        cvt = schema.level(clv).vtype if schema.has_level(clv) else "string"
        pvt = schema.level(plv).vtype if schema.has_level(plv) else "string"
        parents.append((_value_from_json(cvt, child), clv, _value_from_json(pvt, parent), plv))
    return DimensionInstance.build(schema, members, tuple(parents))


# ---------------------------------------------------------------------------
# graph values

def graphoid_to_json(g: Graphoid) -> dict:
    return {
        "nodeTypes": [{"name": d.name, "dims": list(d.dims)} for d in g.node_types.values()],
        "edgeTypes": [
            {
                "name": d.name,
                "dims": list(d.dims),
                "measures": [[slot, fn] for slot, fn in d.measures],
            }
            for d in g.edge_types.values()
        ],
        "levelMap": {
            name: [g.levels[(name, slot)] for slot in range(decl.arity)]
            for name, decl in list(g.node_types.items()) + list(g.edge_types.items())
        },
        "nodes": [
            [node.ntype] + [_value_to_json(v) for v in node.label]
            for node in (g.nodes[i] for i in sorted(g.nodes))
        ],
        "edges": [
            [e.etype, sorted(e.source), sorted(e.target)] + [_value_to_json(v) for v in e.label]
            for e in g.edges
        ],
    }


def graphoid_from_json(raw: dict, catalog: DimensionCatalog) -> Graphoid:
    node_types = [NodeTypeDecl(d["name"], tuple(d["dims"])) for d in raw.get("nodeTypes", ())]
    edge_types = [
        EdgeTypeDecl(
            d["name"],
            tuple(d["dims"]),
            tuple((int(slot), fn) for slot, fn in d.get("measures", ())),
        )
        for d in raw.get("edgeTypes", ())
    ]
    decls = {d.name: d for d in (*node_types, *edge_types)}
    levels: dict[tuple[str, int], str] = {}
    for name, per_slot in raw.get("levelMap", {}).items():
        for slot, level in enumerate(per_slot):
            levels[(name, slot)] = level

    def coerce_row(name: str, values: list) -> tuple:
        decl = decls.get(name)
        if decl is None or len(values) != len(decl.dims):
            return tuple(values)
        out = []
        for slot, v in enumerate(values):
            dim = decl.dims[slot]
            level = levels.get((name, slot))
            vtype = (
                catalog.schema(dim).level(level).vtype
                if dim in catalog and level is not None and catalog.schema(dim).has_level(level)
                else "string"
            )
            out.append(_value_from_json(vtype, v))
        return tuple(out)

    nodes = [Node(row[0], coerce_row(row[0], row[1:])) for row in raw.get("nodes", ())]
    edges = [
        (row[0], frozenset(row[1]), frozenset(row[2])) + coerce_row(row[0], row[3:])
        for row in raw.get("edges", ())
    ]
    return build_graphoid(catalog, node_types, edge_types, nodes, edges, levels)


# ---------------------------------------------------------------------------
# cubes

def cube_to_json(cube: Cube) -> dict:
    return {
        "dims": [{"dim": d, "level": lv} for d, lv in zip(cube.dims, cube.levels)],
        "measures": [{"name": m.name, "agg": m.agg} for m in cube.measures],
        "cells": [
            [[_value_to_json(v) for v in coord], list(values)]
            for coord, values in sorted(cube.cells.items(), key=lambda kv: repr(kv[0]))
        ],
    }


def cube_from_json(raw: dict, catalog: DimensionCatalog) -> Cube:
    dims = [(d["dim"], d["level"]) for d in raw.get("dims", ())]
    measures = [CubeMeasure(m["name"], m.get("agg", "SUM")) for m in raw.get("measures", ())]
    cells = []
    for coord, values in raw.get("cells", ()):
        typed = tuple(
            _value_from_json(catalog.schema(dim).level(level).vtype, v)
            for (dim, level), v in zip(dims, coord)
        )
        cells.append((typed, tuple(values)))
    return build_cube(catalog, dims, measures, cells)


# ---------------------------------------------------------------------------
# files

def save_json(payload: dict, target: str | TextIO) -> None:
    if hasattr(target, "write"):
        json.dump(payload, target, indent=2)
        target.write("\n")
        return
    with open(target, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_json(source: str | TextIO) -> dict:
    if hasattr(source, "read"):
        return json.load(source)
    with open(source, "r", encoding="utf-8") as fh:
        return json.load(fh)


def sniff_kind(raw: dict) -> str:
    """Which of the four value kinds a JSON document looks like."""
    if "nodeTypes" in raw or "edgeTypes" in raw:
        return "graphoid"
    if "cells" in raw:
        return "cube"
    if "members" in raw or "parents" in raw:
        return "instance"
    if "levels" in raw and "edges" in raw:
        return "schema"
    raise StoreError("unrecognized document shape")


def load_dimension(source: str | TextIO) -> DimensionInstance:
    """A dimension file: an instance with embedded schema, or a bare schema."""
    raw = load_json(source)
    kind = sniff_kind(raw)
    if kind == "instance":
        return instance_from_json(raw)
    if kind == "schema":
        return DimensionInstance.build(schema_from_json(raw), {})
    raise StoreError(f"expected a dimension file, found a {kind}")


# ---------------------------------------------------------------------------
# call-record ingest

CALL_COLUMNS = ["CallId", "CallerId", "Participant", "StartTime", "EndTime", "Duration"]

PHONE_DIMENSION = "Phone"
PHONE_BOTTOM = "PhoneId"
TIME_DIMENSION = "Time"
DAY_LEVEL = "Day"
DURATION_DIMENSION = "Duration"

CALL_TYPE = "#Call"
PHONE_TYPE = "#Phone"


def call_decls() -> tuple[list[NodeTypeDecl], list[EdgeTypeDecl]]:
    node_types = [NodeTypeDecl(PHONE_TYPE, ("Id", PHONE_DIMENSION))]
    edge_types = [
        EdgeTypeDecl(CALL_TYPE, (TIME_DIMENSION, DURATION_DIMENSION), measures=((1, "SUM"),))
    ]
    return node_types, edge_types


def _parse_duration(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def ingest_calls(source: str | TextIO, catalog: DimensionCatalog) -> Graphoid:
    """One hyperedge per call (caller -> participants), one node per phone.

    Rows sharing a CallId must agree on caller, times and duration; the edge
    label is the call's day and duration.
    """
    if hasattr(source, "read"):
        reader = csv.reader(source)
    else:
        fh = open(source, "r", encoding="utf-8", newline="")
        reader = csv.reader(fh)
    problems: list[str] = []
    calls: dict[str, dict] = {}
    try:
        header = next(reader, None)
        if header != CALL_COLUMNS:
            raise StoreError(f"expected columns {','.join(CALL_COLUMNS)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CALL_COLUMNS):
                problems.append(f"line {lineno}: expected {len(CALL_COLUMNS)} fields")
                continue
            call_id, caller_s, participant_s, start_s, end_s, duration_s = row
            try:
                caller = int(caller_s)
                participant = int(participant_s)
                start = datetime.datetime.fromisoformat(start_s)
                end = datetime.datetime.fromisoformat(end_s)
                duration = _parse_duration(duration_s)
            except ValueError as exc:
                problems.append(f"line {lineno}: malformed row ({exc})")
                continue
            if participant == caller:
                problems.append(f"line {lineno}: participant equals the caller")
                continue
            entry = calls.setdefault(
                call_id,
                {"caller": caller, "start": start, "end": end, "duration": duration,
                 "participants": [], "rows": [], "first": lineno},
            )
            if (entry["caller"], entry["start"], entry["end"], entry["duration"]) != (
                caller, start, end, duration,
            ):
                problems.append(
                    f"line {lineno}: call {call_id} disagrees with line {entry['first']}"
                )
                continue
            if participant in entry["participants"]:
                problems.append(f"line {lineno}: duplicate participant {participant} in call {call_id}")
                continue
            entry["participants"].append(participant)
    finally:
        if not hasattr(source, "read"):
            fh.close()
    if problems:
        raise StoreError("; ".join(problems))

    phone_ids = sorted(
        {entry["caller"] for entry in calls.values()}
        | {p for entry in calls.values() for p in entry["participants"]}
    )
    node_types, edge_types = call_decls()
    nodes = [(PHONE_TYPE, pid, pid) for pid in phone_ids]
    edges = [
        (
            CALL_TYPE,
            frozenset({entry["caller"]}),
            frozenset(entry["participants"]),
            entry["start"].date(),
            entry["duration"],
        )
        for entry in calls.values()
    ]
    levels = {(CALL_TYPE, 0): DAY_LEVEL}
    return build_graphoid(catalog, node_types, edge_types, nodes, edges, levels)


# ---------------------------------------------------------------------------
# synthetic call data

@dataclass(frozen=True)
class GeneratorConfig:
    phone_count: int = 100
    user_count: int = 50
    call_count: int = 1000
    max_group_size: int = 4
    start_date: datetime.date = datetime.date(2016, 1, 1)
    end_date: datetime.date = datetime.date(2016, 12, 31)
    min_duration: int = 1
    max_duration: int = 3600
    operators: tuple[str, ...] = ("ATT", "Claro", "Movistar", "Vodafone")
    cities: tuple[str, ...] = ("Buenos Aires", "Cordoba", "Rosario", "Salta")
    countries: tuple[str, ...] = ("Argentina",)
    seed: int = 7


# roughly the published sizes of the real data sets; not exercised by tests
TABLE_SCALE_D1 = GeneratorConfig(phone_count=793, user_count=500, call_count=126700, seed=1)
TABLE_SCALE_D2 = GeneratorConfig(phone_count=2940, user_count=1800, call_count=280000, seed=2)


@dataclass(frozen=True)
class CallRecord:
    call_id: str
    caller: int
    participants: tuple[int, ...]
    start: datetime.datetime
    duration: int

    @property
    def end(self) -> datetime.datetime:
        return self.start + datetime.timedelta(seconds=self.duration)

    @property
    def group(self) -> tuple[int, ...]:
        return tuple(sorted((self.caller, *self.participants)))


@dataclass(frozen=True)
class PhoneInfo:
    number: int
    customer: str
    city: str
    country: str
    operator: str


@dataclass(frozen=True)
class GeneratedData:
    config: GeneratorConfig
    catalog: DimensionCatalog = field(repr=False)
    graphoid: Graphoid = field(repr=False)
    calls: tuple[CallRecord, ...] = field(repr=False)
    phones: dict[int, PhoneInfo] = field(repr=False, default_factory=dict)


def phone_schema() -> DimensionSchema:
    return DimensionSchema(
        PHONE_DIMENSION,
        (
            Level(PHONE_BOTTOM, "int"),
            Level("Number", "int"),
            Level("Customer", "string"),
            Level("City", "string"),
            Level("Country", "string"),
            Level("Operator", "string"),
            all_level(),
        ),
        (
            (PHONE_BOTTOM, "Number"),
            ("Number", "Customer"),
            ("Customer", "City"),
            ("City", "Country"),
            ("Country", ALL_LEVEL),
            ("Number", "Operator"),
            ("Operator", ALL_LEVEL),
        ),
    )


def time_schema() -> DimensionSchema:
    return DimensionSchema(
        TIME_DIMENSION,
        (
            Level("Timestamp", "string"),
            Level(DAY_LEVEL, "date"),
            Level("Month", "string"),
            Level("Year", "int"),
            all_level(),
        ),
        (
            ("Timestamp", DAY_LEVEL),
            (DAY_LEVEL, "Month"),
            ("Month", "Year"),
            ("Year", ALL_LEVEL),
        ),
    )


def _month_of(day: datetime.date) -> str:
    return f"{day.year:04d}-{day.month:02d}"


def time_instance(days: Iterable[datetime.date], timestamps: Iterable[datetime.datetime] = ()) -> DimensionInstance:
    """A calendar over the given days, with optional second-resolution members."""
    day_set = frozenset(days)
    ts_set = frozenset(timestamps)
    months = frozenset(_month_of(d) for d in day_set)
    years = frozenset(d.year for d in day_set)
    members = {
        "Timestamp": frozenset(t.isoformat() for t in ts_set),
        DAY_LEVEL: day_set,
        "Month": months,
        "Year": years,
    }
    parents = []
    for ts in sorted(ts_set):
        parents.append((ts.isoformat(), "Timestamp", ts.date(), DAY_LEVEL))
    for day in sorted(day_set):
        parents.append((day, DAY_LEVEL, _month_of(day), "Month"))
    for month in sorted(months):
        parents.append((month, "Month", int(month[:4]), "Year"))
    return DimensionInstance.build(time_schema(), members, parents)


def generate(config: GeneratorConfig) -> GeneratedData:
    """Deterministic synthetic phones and calls for the given configuration."""
    if config.max_group_size < 2:
        raise StoreError("max_group_size must be at least 2")
    if config.phone_count < config.max_group_size:
        raise StoreError("phone_count must not be below max_group_size")
    rng = random.Random(config.seed)

    customers = [f"Customer{k + 1:03d}" for k in range(config.user_count)]
    city_country = {
        city: config.countries[i % len(config.countries)]
        for i, city in enumerate(config.cities)
    }
    phones: dict[int, PhoneInfo] = {}
    customer_city = {c: rng.choice(config.cities) for c in customers}
    for pid in range(1, config.phone_count + 1):
        customer = rng.choice(customers)
        city = customer_city[customer]
        phones[pid] = PhoneInfo(
            number=5_550_000 + pid,
            customer=customer,
            city=city,
            country=city_country[city],
            operator=rng.choice(config.operators),
        )

    phone_members = {
        PHONE_BOTTOM: frozenset(phones),
        "Number": frozenset(info.number for info in phones.values()),
        "Customer": frozenset(customers),
        "City": frozenset(config.cities),
        "Country": frozenset(config.countries),
        "Operator": frozenset(config.operators),
    }
    phone_parents = []
    for pid in sorted(phones):
        info = phones[pid]
        phone_parents.append((pid, PHONE_BOTTOM, info.number, "Number"))
        phone_parents.append((info.number, "Number", info.customer, "Customer"))
        phone_parents.append((info.number, "Number", info.operator, "Operator"))
    for customer in customers:
        phone_parents.append((customer, "Customer", customer_city[customer], "City"))
    for city in config.cities:
        phone_parents.append((city, "City", city_country[city], "Country"))
    phone_dim = DimensionInstance.build(phone_schema(), phone_members, phone_parents)

    day_count = (config.end_date - config.start_date).days + 1
    calls = []
    for k in range(config.call_count):
        size = rng.randint(2, config.max_group_size)
        group = rng.sample(sorted(phones), size)
        day = config.start_date + datetime.timedelta(days=rng.randrange(day_count))
        start = datetime.datetime.combine(day, datetime.time()) + datetime.timedelta(
            seconds=rng.randrange(86400)
        )
        calls.append(
            CallRecord(
                call_id=f"c{k + 1:06d}",
                caller=group[0],
                participants=tuple(group[1:]),
                start=start,
                duration=rng.randint(config.min_duration, config.max_duration),
            )
        )

    all_days = [config.start_date + datetime.timedelta(days=i) for i in range(day_count)]
    time_dim = time_instance(all_days, (c.start for c in calls))
    duration_dim = open_dimension(DURATION_DIMENSION, "decimal")
    catalog = DimensionCatalog.of(phone_dim, time_dim, duration_dim)

    node_types, edge_types = call_decls()
    nodes = [(PHONE_TYPE, pid, pid) for pid in sorted(phones)]
    edges = [
        (CALL_TYPE, frozenset({c.caller}), frozenset(c.participants), c.start.date(), c.duration)
        for c in calls
    ]
    g = build_graphoid(catalog, node_types, edge_types, nodes, edges, {(CALL_TYPE, 0): DAY_LEVEL})
    return GeneratedData(config, catalog, g, tuple(calls), phones)


def write_calls_csv(calls: Iterable[CallRecord], target: str | TextIO) -> None:
    """One row per participant, matching the ingest column layout."""
    own = not hasattr(target, "write")
    fh = open(target, "w", encoding="utf-8", newline="") if own else target
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CALL_COLUMNS)
        for call in calls:
            for participant in call.participants:
                writer.writerow(
                    [
                        call.call_id,
                        call.caller,
                        participant,
                        call.start.isoformat(),
                        call.end.isoformat(),
                        call.duration,
                    ]
                )
    finally:
        if own:
            fh.close()
