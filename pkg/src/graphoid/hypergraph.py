"""Node/edge-labelled directed multi-hypergraphs over dimension catalogs.

Nodes carry a typed label vector whose first slot is a globally unique
integer identifier.  Hyperedges connect a set of source node ids to a set of
target node ids and form a bag: two edges with identical type, endpoints and
label are distinct occurrences.  Each (type, slot) pair tracks the dimension
level its values currently live at.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .dims import ALL_LEVEL, ALL_MEMBER, DimensionCatalog, ID_DIMENSION, ID_LEVEL

AGGREGATES = ("SUM", "MIN", "MAX", "COUNT", "AVG")


class GraphoidError(ValueError):
    """Base class for graph-value construction and operation errors."""


class GraphoidBuildError(GraphoidError):
    """Carries the full validation report for a rejected graph value."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class NodeTypeDecl:
    """A node type: name plus the dimension of each label slot (slot 0 is Id)."""

    name: str
    dims: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.dims)


@dataclass(frozen=True)
class EdgeTypeDecl:
    """An edge type; ``measures`` maps label slots to default aggregates."""

    name: str
    dims: tuple[str, ...]
    measures: tuple[tuple[int, str], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.dims)

    def measure_slots(self) -> dict[int, str]:
        return dict(self.measures)

    def measure_slot_of(self, dim: str) -> int | None:
        for slot, _ in self.measures:
            if self.dims[slot] == dim:
                return slot
        return None


@dataclass(frozen=True)
class Node:
    ntype: str
    label: tuple

    @property
    def ident(self) -> int:
        return self.label[0]


@dataclass(frozen=True)
class HyperEdge:
    """One edge occurrence; ``surrogate`` is internal bookkeeping, never compared."""

    etype: str
    source: frozenset[int]
    target: frozenset[int]
    label: tuple
    surrogate: int = field(compare=False, default=0)

    @property
    def adjacency(self) -> frozenset[int]:
        return self.source | self.target


def adjacency(edge: HyperEdge) -> frozenset[int]:
    """All node ids the edge touches, sources and targets combined."""
    return edge.adjacency


@dataclass(frozen=True, eq=False)
class Graphoid:
    """An immutable graph value bound to a dimension catalog.

    ``levels`` maps (type name, slot) to the current level of that slot's
    dimension.  ``base``/``tainted`` track lineage: ``base`` points at the
    graph the value was derived from (None for freshly built ones) and
    ``tainted`` records that a dice or slice happened along the way.
    """

    catalog: DimensionCatalog = field(repr=False)
    node_types: Mapping[str, NodeTypeDecl]
    edge_types: Mapping[str, EdgeTypeDecl]
    nodes: Mapping[int, Node]
    edges: tuple[HyperEdge, ...]
    levels: Mapping[tuple[str, int], str]
    base: Graphoid | None = field(default=None, repr=False)
    tainted: bool = False

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def node_type(self, name: str) -> NodeTypeDecl:
        try:
            return self.node_types[name]
        except KeyError:
            raise GraphoidError(f"unknown node type {name!r}") from None

    def edge_type(self, name: str) -> EdgeTypeDecl:
        try:
            return self.edge_types[name]
        except KeyError:
            raise GraphoidError(f"unknown edge type {name!r}") from None

    def type_decl(self, name: str) -> NodeTypeDecl | EdgeTypeDecl:
        if name in self.node_types:
            return self.node_types[name]
        if name in self.edge_types:
            return self.edge_types[name]
        raise GraphoidError(f"unknown type {name!r}")

    def nodes_of_type(self, name: str) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes.values() if n.ntype == name)

    def edge_multiset(self) -> Counter:
        return Counter((e.etype, e.source, e.target, e.label) for e in self.edges)

    def bag_equal(self, other: Graphoid) -> bool:
        return (
            dict(self.node_types) == dict(other.node_types)
            and dict(self.edge_types) == dict(other.edge_types)
            and dict(self.nodes) == dict(other.nodes)
            and dict(self.levels) == dict(other.levels)
            and self.edge_multiset() == other.edge_multiset()
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graphoid):
            return NotImplemented
        return self.bag_equal(other)

    __hash__ = None  # type: ignore[assignment]

    def derive(self, **changes) -> Graphoid:
        """A child value: same lineage root, taint preserved unless overridden."""
        changes.setdefault("base", self.base if self.base is not None else self)
        return replace(self, **changes)


def _validate_node_decl(decl: NodeTypeDecl, catalog: DimensionCatalog, problems: list[str]) -> None:
    if not decl.name.startswith("#"):
        problems.append(f"node type {decl.name!r}: type names start with '#'")
    if decl.arity < 1 or decl.dims[0] != ID_DIMENSION:
        problems.append(f"node type {decl.name}: slot 0 must hold the {ID_DIMENSION} dimension")
        return
    if len(set(decl.dims)) != len(decl.dims):
        problems.append(f"node type {decl.name}: repeated dimensions")
    for dim in decl.dims:
        if dim not in catalog:
            problems.append(f"node type {decl.name}: unknown dimension {dim!r}")


def _validate_edge_decl(decl: EdgeTypeDecl, catalog: DimensionCatalog, problems: list[str]) -> None:
    if not decl.name.startswith("#"):
        problems.append(f"edge type {decl.name!r}: type names start with '#'")
    if len(set(decl.dims)) != len(decl.dims):
        problems.append(f"edge type {decl.name}: repeated dimensions")
    if decl.dims.count(ID_DIMENSION) > 1:
        problems.append(f"edge type {decl.name}: at most one {ID_DIMENSION} slot")
    for dim in decl.dims:
        if dim not in catalog:
            problems.append(f"edge type {decl.name}: unknown dimension {dim!r}")
    for slot, fn in decl.measures:
        if slot < 0 or slot >= decl.arity:
            problems.append(f"edge type {decl.name}: measure slot {slot} out of range")
        elif decl.dims[slot] == ID_DIMENSION:
            problems.append(f"edge type {decl.name}: the {ID_DIMENSION} slot cannot be a measure")
        if fn not in AGGREGATES:
            problems.append(f"edge type {decl.name}: unknown aggregate {fn!r}")


def default_levels(
    node_types: Iterable[NodeTypeDecl],
    edge_types: Iterable[EdgeTypeDecl],
    catalog: DimensionCatalog,
) -> dict[tuple[str, int], str]:
    """Every slot starts at its dimension's bottom level."""
    levels: dict[tuple[str, int], str] = {}
    for decl in (*node_types, *edge_types):
        for slot, dim in enumerate(decl.dims):
            if dim in catalog:
                levels[(decl.name, slot)] = catalog.schema(dim).bottom
    return levels


def build_graphoid(
    catalog: DimensionCatalog,
    node_types: Iterable[NodeTypeDecl],
    edge_types: Iterable[EdgeTypeDecl],
    nodes: Iterable[Node | tuple],
    edges: Iterable[tuple],
    levels: Mapping[tuple[str, int], str] | None = None,
) -> Graphoid:
    """Validate and assemble a graph value.

    ``nodes`` accepts Node objects or (type, label...) rows; ``edges`` accepts
    (type, sources, targets, label...) rows.  Raises GraphoidBuildError with
    the full report when anything is off.
    """
    problems: list[str] = []
    ntypes: dict[str, NodeTypeDecl] = {}
    for decl in node_types:
        if decl.name in ntypes:
            problems.append(f"node type {decl.name}: declared twice")
        ntypes[decl.name] = decl
        _validate_node_decl(decl, catalog, problems)
    etypes: dict[str, EdgeTypeDecl] = {}
    for decl in edge_types:
        if decl.name in etypes or decl.name in ntypes:
            problems.append(f"edge type {decl.name}: declared twice")
        etypes[decl.name] = decl
        _validate_edge_decl(decl, catalog, problems)
    if problems:
        raise GraphoidBuildError(problems)

    level_map = default_levels(ntypes.values(), etypes.values(), catalog)
    if levels:
        for (tname, slot), level in levels.items():
            if tname not in ntypes and tname not in etypes:
                problems.append(f"level map references unknown type {tname!r}")
                continue
            decl = ntypes.get(tname) or etypes[tname]
            if slot < 0 or slot >= decl.arity:
                problems.append(f"level map: type {tname} has no slot {slot}")
                continue
            dim = decl.dims[slot]
            if not catalog.schema(dim).has_level(level):
                problems.append(f"level map: dimension {dim} has no level {level!r}")
                continue
            level_map[(tname, slot)] = level
    if problems:
        raise GraphoidBuildError(problems)

    node_table: dict[int, Node] = {}
    for row in nodes:
        node = row if isinstance(row, Node) else Node(str(row[0]), tuple(row[1:]))
        if node.ntype not in ntypes:
            problems.append(f"node {node.label!r}: unknown node type {node.ntype}")
            continue
        decl = ntypes[node.ntype]
        if len(node.label) != decl.arity:
            problems.append(f"node {node.label!r}: expected {decl.arity} label slots")
            continue
        ident = node.label[0]
        if not isinstance(ident, int) or isinstance(ident, bool):
            problems.append(f"node {node.label!r}: identifier slot must be an integer")
            continue
        if ident in node_table:
            problems.append(f"node id {ident}: duplicate identifier")
            continue
        bad = False
        for slot, value in enumerate(node.label):
            dim = decl.dims[slot]
            level = level_map[(node.ntype, slot)]
            if not catalog.instance(dim).contains(level, value):
                problems.append(
                    f"node {node.label!r}: slot {slot} value {value!r} outside dom({dim}.{level})"
                )
                bad = True
        if not bad:
            node_table[ident] = node
    if not node_table and not problems:
        problems.append("non-empty node set required")
    if problems:
        raise GraphoidBuildError(problems)

    edge_list: list[HyperEdge] = []
    for row in edges:
        if isinstance(row, HyperEdge):
            etype, source, target, label = row.etype, row.source, row.target, row.label
        else:
            etype, source, target = str(row[0]), frozenset(row[1]), frozenset(row[2])
            label = tuple(row[3:])
        if etype not in etypes:
            problems.append(f"edge {label!r}: unknown edge type {etype}")
            continue
        decl = etypes[etype]
        if len(label) != decl.arity:
            problems.append(f"edge {etype} {label!r}: expected {decl.arity} label slots")
            continue
        if not source and not target:
            problems.append(f"edge {etype} {label!r}: source and target sets are both empty")
            continue
        bad = False
        for ident in sorted(source | target):
            if ident not in node_table:
                problems.append(f"edge {etype} {label!r}: endpoint {ident} is not a node")
                bad = True
        for slot, value in enumerate(label):
            dim = decl.dims[slot]
            level = level_map[(etype, slot)]
            if not catalog.instance(dim).contains(level, value):
                problems.append(
                    f"edge {etype} {label!r}: slot {slot} value {value!r} outside dom({dim}.{level})"
                )
                bad = True
        if not bad:
            edge_list.append(
                HyperEdge(etype, frozenset(source), frozenset(target), label, surrogate=len(edge_list))
            )
    if problems:
        raise GraphoidBuildError(problems)

    ordered_nodes = {ident: node_table[ident] for ident in sorted(node_table)}
    return Graphoid(catalog, ntypes, etypes, ordered_nodes, tuple(edge_list), level_map)


def edgify(g: Graphoid, ntype: str, slot: int) -> Graphoid:
    """Move a node label slot onto fresh single-target hyperedges.

    Every node of the type loses its slot value (replaced by "all" at level
    All) and gains an incoming edge of a new type named after the dimension,
    labelled with the old value.  Applying the same move twice is a no-op
    beyond registering the edge type.
    """
    decl = g.node_type(ntype)
    if slot <= 0 or slot >= decl.arity:
        raise GraphoidError(f"edgify: type {ntype} has no movable slot {slot}")
    dim = decl.dims[slot]
    new_type = f"#Has{dim}"
    old_level = g.levels[(ntype, slot)]
    edge_decl = EdgeTypeDecl(new_type, (dim,), measures=((0, "SUM"),))
    if new_type in g.node_types or g.edge_types.get(new_type, edge_decl) != edge_decl:
        raise GraphoidError(f"edgify: type name {new_type} already taken")
    etypes = dict(g.edge_types)
    levels = dict(g.levels)
    if new_type not in etypes:
        etypes[new_type] = edge_decl
        levels[(new_type, 0)] = old_level

    if old_level == ALL_LEVEL:
        return g.derive(edge_types=etypes, levels=levels)

    nodes = dict(g.nodes)
    new_edges = list(g.edges)
    surrogate = max((e.surrogate for e in g.edges), default=-1) + 1
    for ident in sorted(nodes):
        node = nodes[ident]
        if node.ntype != ntype:
            continue
        label = list(node.label)
        value = label[slot]
        label[slot] = ALL_MEMBER
        nodes[ident] = Node(ntype, tuple(label))
        new_edges.append(HyperEdge(new_type, frozenset(), frozenset({ident}), (value,), surrogate))
        surrogate += 1
    levels[(ntype, slot)] = ALL_LEVEL
    return g.derive(edge_types=etypes, nodes=nodes, edges=tuple(new_edges), levels=levels)
