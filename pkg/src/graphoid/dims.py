"""Background dimension hierarchies: level lattices, instances, roll-up.

A dimension schema is a small DAG of levels with a unique bottom level and a
unique top level ``All``; an instance populates each level with members and
connects adjacent levels with functional parent mappings.  Roll-up is the
transitive composition of those mappings, materialized per level pair when
the instance is built.
"""
from __future__ import annotations

import datetime
import itertools
from dataclasses import dataclass, field

ALL_LEVEL = "All"
ALL_MEMBER = "all"

VALUE_TYPES = ("string", "int", "decimal", "date")


class DimensionError(ValueError):
    """Raised for malformed dimension data or bad roll-up requests."""


class UnknownMember(DimensionError):
    pass


class UnreachableLevel(DimensionError):
    pass


def value_matches(vtype: str, value: object) -> bool:
    """Does a scalar belong to a level's value type?"""
    if vtype == "string":
        return isinstance(value, str)
    if vtype == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if vtype == "decimal":
        return (isinstance(value, int) and not isinstance(value, bool)) or isinstance(value, float)
    if vtype == "date":
        return isinstance(value, datetime.date) and not isinstance(value, datetime.datetime)
    raise DimensionError(f"unknown value type {vtype!r}")


def compare_values(cmp: str, left: object, right: object) -> bool:
    if cmp == "=":
        return left == right
    if cmp == "<":
        return left < right  # type: ignore[operator]
    if cmp == ">":
        return left > right  # type: ignore[operator]
    raise DimensionError(f"unknown comparator {cmp!r}")


@dataclass(frozen=True)
class Level:
    """One granularity level of a dimension."""

    name: str
    vtype: str = "string"
    ordered: bool = True
    open: bool = False


def all_level() -> Level:
    return Level(ALL_LEVEL, "string", ordered=False)


@dataclass(frozen=True)
class RollupStep:
    """A from-level to to-level move inside one dimension."""

    dimension: str
    from_level: str
    to_level: str


@dataclass(frozen=True)
class DimensionSchema:
    """Level DAG of one dimension.  ``edges`` point child level -> parent level."""

    name: str
    levels: tuple[Level, ...]
    edges: tuple[tuple[str, str], ...]

    def level(self, name: str) -> Level:
        for lv in self.levels:
            if lv.name == name:
                return lv
        raise DimensionError(f"dimension {self.name}: unknown level {name!r}")

    def has_level(self, name: str) -> bool:
        return any(lv.name == name for lv in self.levels)

    def parents_of(self, level: str) -> tuple[str, ...]:
        return tuple(p for c, p in self.edges if c == level)

    def children_of(self, level: str) -> tuple[str, ...]:
        return tuple(c for c, p in self.edges if p == level)

    @property
    def bottom(self) -> str:
        targets = {p for _, p in self.edges}
        sources = [lv.name for lv in self.levels if lv.name not in targets]
        if len(sources) != 1:
            raise DimensionError(f"dimension {self.name}: no unique bottom level")
        return sources[0]

    def reachable_from(self, level: str) -> frozenset[str]:
        seen = {level}
        frontier = [level]
        while frontier:
            cur = frontier.pop()
            for parent in self.parents_of(cur):
                if parent not in seen:
                    seen.add(parent)
                    frontier.append(parent)
        return frozenset(seen)

    def paths_between(self, start: str, end: str) -> tuple[tuple[str, ...], ...]:
        """All simple level paths start -> end following child->parent edges."""
        if start == end:
            return ((start,),)
        out: list[tuple[str, ...]] = []
        for parent in sorted(self.parents_of(start)):
            for tail in self.paths_between(parent, end):
                out.append((start,) + tail)
        return tuple(out)


def validate_schema(schema: DimensionSchema) -> list[str]:
    """Structural checks; returns a report, empty when the schema is valid."""
    problems: list[str] = []
    names = [lv.name for lv in schema.levels]
    if not names:
        return [f"dimension {schema.name}: no levels declared"]
    if len(set(names)) != len(names):
        problems.append(f"dimension {schema.name}: duplicate level names")
    for lv in schema.levels:
        if lv.vtype not in VALUE_TYPES:
            problems.append(f"dimension {schema.name}: level {lv.name}: unknown value type {lv.vtype!r}")
    if ALL_LEVEL not in names:
        problems.append(f"dimension {schema.name}: missing top level {ALL_LEVEL}")
        return problems
    known = set(names)
    for child, parent in schema.edges:
        if child not in known or parent not in known:
            problems.append(f"dimension {schema.name}: edge {child}->{parent} references unknown level")
        elif child == parent:
            problems.append(f"dimension {schema.name}: self-edge on level {child}")
    if len(set(schema.edges)) != len(schema.edges):
        problems.append(f"dimension {schema.name}: duplicate edges")
    if problems:
        return problems

    # cycle check by repeated source elimination
    remaining = dict.fromkeys(names, 0)
    for _, parent in schema.edges:
        remaining[parent] += 1
    queue = [n for n, deg in remaining.items() if deg == 0]
    seen = 0
    active = dict(remaining)
    while queue:
        cur = queue.pop()
        seen += 1
        for child, parent in schema.edges:
            if child == cur:
                active[parent] -= 1
                if active[parent] == 0:
                    queue.append(parent)
    if seen != len(names):
        problems.append(f"dimension {schema.name}: level graph has a cycle")
        return problems

    sinks = [n for n in names if not schema.parents_of(n)]
    if sinks != [ALL_LEVEL]:
        problems.append(
            f"dimension {schema.name}: non-unique top: every maximal level must be {ALL_LEVEL}, got {sorted(sinks)}"
        )
    sources = [n for n in names if not schema.children_of(n)]
    if len(sources) != 1:
        problems.append(f"dimension {schema.name}: non-unique bottom: got {sorted(sources)}")
    elif sources == [ALL_LEVEL]:
        problems.append(f"dimension {schema.name}: bottom level must differ from {ALL_LEVEL}")
    if problems:
        return problems

    bottom = sources[0]
    from_bottom = schema.reachable_from(bottom)
    for name in names:
        if name not in from_bottom:
            problems.append(f"dimension {schema.name}: level {name} not reachable from bottom {bottom}")
        elif ALL_LEVEL not in schema.reachable_from(name):
            problems.append(f"dimension {schema.name}: level {name} does not reach {ALL_LEVEL}")
    for lv in schema.levels:
        if lv.open:
            bad = [p for p in schema.parents_of(lv.name) if p != ALL_LEVEL]
            if bad:
                problems.append(
                    f"dimension {schema.name}: open level {lv.name} may only roll up to {ALL_LEVEL}"
                )
    return problems


ParentQuad = tuple[object, str, object, str]


@dataclass(frozen=True)
class DimensionInstance:
    """Members per level plus functional parent mappings per schema edge.

    ``rollup_maps`` materializes the transitive composition for every
    reachable level pair and is derived at construction; it is only
    meaningful once ``validate_instance`` comes back clean.
    """

    schema: DimensionSchema
    members: dict[str, frozenset]
    parent_quads: tuple[ParentQuad, ...]
    rollup_maps: dict[tuple[str, str], dict] = field(
        init=False, compare=False, repr=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        maps: dict[tuple[str, str], dict] = {}
        for child_level, parent_level in self.schema.edges:
            step: dict = {}
            for child, clv, parent, plv in self.parent_quads:
                if clv == child_level and plv == parent_level and child not in step:
                    step[child] = parent
            maps[(child_level, parent_level)] = step
        # compose outward from every level; first computed map per pair wins
        edge_maps = dict(maps)
        for start in sorted({lv.name for lv in self.schema.levels}):
            visited = {start}
            frontier = [(start, {m: m for m in self.members.get(start, frozenset())})]
            while frontier:
                level, mapping = frontier.pop()
                for parent in sorted(self.schema.parents_of(level)):
                    edge = edge_maps[(level, parent)]
                    key = (start, parent)
                    if key not in maps:
                        maps[key] = {m: edge[v] for m, v in mapping.items() if v in edge}
                    if parent not in visited:
                        visited.add(parent)
                        frontier.append((parent, maps[key]))
        object.__setattr__(self, "rollup_maps", maps)

    @classmethod
    def build(
        cls,
        schema: DimensionSchema,
        members: dict[str, frozenset | set | list | tuple],
        parents: tuple[ParentQuad, ...] | list[ParentQuad] = (),
    ) -> DimensionInstance:
        """Normalize raw member/parent data, auto-completing the All level."""
        normalized = {lv: frozenset(ms) for lv, ms in members.items()}
        normalized.setdefault(ALL_LEVEL, frozenset({ALL_MEMBER}))
        quads = list(parents)
        present = {(c, cl, p, pl) for c, cl, p, pl in quads}
        for child_level, parent_level in schema.edges:
            if parent_level != ALL_LEVEL:
                continue
            for member in sorted(normalized.get(child_level, frozenset()), key=repr):
                quad = (member, child_level, ALL_MEMBER, ALL_LEVEL)
                if quad not in present:
                    quads.append(quad)
                    present.add(quad)
        return cls(schema, normalized, tuple(quads))

    @property
    def name(self) -> str:
        return self.schema.name

    def domain(self, level: str) -> frozenset:
        lv = self.schema.level(level)
        if lv.open:
            raise DimensionError(f"dimension {self.name}: level {level} has an open domain")
        if level == ALL_LEVEL:
            return frozenset({ALL_MEMBER})
        return self.members.get(level, frozenset())

    def contains(self, level: str, value: object) -> bool:
        lv = self.schema.level(level)
        if lv.open:
            return value_matches(lv.vtype, value)
        if level == ALL_LEVEL:
            return value == ALL_MEMBER
        return value in self.members.get(level, frozenset())


def validate_instance(instance: DimensionInstance) -> list[str]:
    """Membership, typing, functionality, and path-independence checks."""
    schema = instance.schema
    problems = validate_schema(schema)
    if problems:
        return problems
    dim = schema.name

    declared = {lv.name for lv in schema.levels}
    for level, members in instance.members.items():
        if level not in declared:
            problems.append(f"dimension {dim}: members listed for unknown level {level}")
            continue
        lv = schema.level(level)
        if lv.open and members:
            problems.append(f"dimension {dim}: open level {level} must not enumerate members")
            continue
        for member in members:
            if not value_matches(lv.vtype, member):
                problems.append(f"dimension {dim}: member {member!r} is not a {lv.vtype} at level {level}")
    if instance.members.get(ALL_LEVEL, frozenset({ALL_MEMBER})) != frozenset({ALL_MEMBER}):
        problems.append(f"dimension {dim}: domain of {ALL_LEVEL} must be exactly {{{ALL_MEMBER!r}}}")

    edges = set(schema.edges)
    seen_child: dict[tuple[object, str, str], object] = {}
    for child, clv, parent, plv in instance.parent_quads:
        if (clv, plv) not in edges:
            problems.append(f"dimension {dim}: parent pair uses non-edge {clv}->{plv}")
            continue
        if not instance.contains(clv, child):
            problems.append(f"dimension {dim}: parent pair child {child!r} not in dom({clv})")
        if not instance.contains(plv, parent):
            problems.append(f"dimension {dim}: parent pair parent {parent!r} not in dom({plv})")
        key = (child, clv, plv)
        if key in seen_child and seen_child[key] != parent:
            problems.append(
                f"dimension {dim}: non-functional roll-up: {child!r} has two parents at {plv}"
            )
        seen_child[key] = parent
    if problems:
        return problems

    for child_level, parent_level in schema.edges:
        lv = schema.level(child_level)
        if lv.open:
            continue
        mapping = instance.rollup_maps[(child_level, parent_level)]
        for member in instance.members.get(child_level, frozenset()):
            if member not in mapping:
                problems.append(
                    f"dimension {dim}: member {member!r} at {child_level} has no parent at {parent_level}"
                )
    if problems:
        return problems

    # path independence: all compositions between a level pair must agree
    names = sorted(declared)
    for start, end in itertools.permutations(names, 2):
        paths = schema.paths_between(start, end)
        if len(paths) < 2 or schema.level(start).open:
            continue
        for member in instance.members.get(start, frozenset()):
            results = set()
            for path in paths:
                value = member
                ok = True
                for a, b in zip(path, path[1:]):
                    step = instance.rollup_maps[(a, b)]
                    if value not in step:
                        ok = False
                        break
                    value = step[value]
                if ok:
                    results.add(value)
            if len(results) > 1:
                problems.append(
                    f"dimension {dim}: unsound: {member!r} rolls up from {start} to {end} ambiguously {sorted(results, key=repr)}"
                )
    return problems


def rollup(instance: DimensionInstance, step: RollupStep, member: object):
    """Roll one member from step.from_level to step.to_level."""
    schema = instance.schema
    if not schema.has_level(step.from_level):
        raise UnreachableLevel(f"dimension {schema.name}: unknown level {step.from_level}")
    if not schema.has_level(step.to_level):
        raise UnreachableLevel(f"dimension {schema.name}: unknown level {step.to_level}")
    if not instance.contains(step.from_level, member):
        raise UnknownMember(
            f"dimension {schema.name}: {member!r} is not a member of level {step.from_level}"
        )
    if step.to_level == step.from_level:
        return member
    if step.to_level == ALL_LEVEL:
        return ALL_MEMBER
    if step.to_level not in schema.reachable_from(step.from_level):
        raise UnreachableLevel(
            f"dimension {schema.name}: level {step.to_level} not reachable from {step.from_level}"
        )
    mapping = instance.rollup_maps.get((step.from_level, step.to_level), {})
    if member not in mapping:
        raise UnknownMember(
            f"dimension {schema.name}: no roll-up for {member!r} from {step.from_level} to {step.to_level}"
        )
    return mapping[member]


ID_DIMENSION = "Id"
ID_LEVEL = "Id"


def id_dimension() -> DimensionInstance:
    """The built-in identifier dimension: open integer bottom under All."""
    schema = DimensionSchema(
        ID_DIMENSION,
        (Level(ID_LEVEL, "int", open=True), all_level()),
        ((ID_LEVEL, ALL_LEVEL),),
    )
    return DimensionInstance.build(schema, {})


def open_dimension(name: str, vtype: str = "decimal") -> DimensionInstance:
    """A two-level dimension with an open bottom, used for measures."""
    schema = DimensionSchema(
        name,
        (Level(name, vtype, open=True), all_level()),
        ((name, ALL_LEVEL),),
    )
    return DimensionInstance.build(schema, {})


@dataclass(frozen=True)
class DimensionCatalog:
    """Immutable name -> instance lookup; always carries the Id dimension."""

    instances: dict[str, DimensionInstance]

    @classmethod
    def of(cls, *dims: DimensionInstance) -> DimensionCatalog:
        table = {ID_DIMENSION: id_dimension()}
        for inst in dims:
            table[inst.name] = inst
        return cls(table)

    def with_dimension(self, inst: DimensionInstance) -> DimensionCatalog:
        table = dict(self.instances)
        table[inst.name] = inst
        return DimensionCatalog(table)

    def __contains__(self, name: str) -> bool:
        return name in self.instances

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.instances)

    def instance(self, name: str) -> DimensionInstance:
        try:
            return self.instances[name]
        except KeyError:
            raise DimensionError(f"unknown dimension {name!r}") from None

    def schema(self, name: str) -> DimensionSchema:
        return self.instance(name).schema

    def level(self, dim: str, level: str) -> Level:
        return self.schema(dim).level(level)

    def roll(self, dim: str, from_level: str, to_level: str, member: object):
        return rollup(self.instance(dim), RollupStep(dim, from_level, to_level), member)
