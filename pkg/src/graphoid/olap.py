"""The graph OLAP operation algebra.

All operations are pure: they take a graph value and return a derived one.
Climb rewrites label slots along the dimension hierarchy, minimize contracts
nodes that became indistinguishable, aggr merges parallel edges and folds
their measures, and roll-up is the composition of the three.  Dice and its
strong variant filter edges under a three-valued reading of conditions, slice
rolls a dimension out entirely, and n-delete removes a node type.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .dims import (
    ALL_LEVEL,
    ALL_MEMBER,
    ID_DIMENSION,
    RollupStep,
    compare_values,
    value_matches,
)
from .hypergraph import (
    AGGREGATES,
    EdgeTypeDecl,
    Graphoid,
    GraphoidError,
    HyperEdge,
    Node,
    NodeTypeDecl,
)


class OlapError(GraphoidError):
    pass


class LineageError(OlapError):
    pass


WILDCARD = "*"


@dataclass(frozen=True)
class TargetSet:
    """Named types an operation applies to; ``names=None`` means every applicable one."""

    names: tuple[str, ...] | None = None

    @classmethod
    def everything(cls) -> TargetSet:
        return cls(None)

    @classmethod
    def of(cls, *names: str) -> TargetSet:
        return cls(tuple(names))

    @property
    def is_wildcard(self) -> bool:
        return self.names is None

    @classmethod
    def coerce(cls, value) -> TargetSet:
        if isinstance(value, TargetSet):
            return value
        if value is None or value == WILDCARD:
            return cls(None)
        if isinstance(value, str):
            return cls((value,))
        names = tuple(value)
        if WILDCARD in names:
            if len(names) != 1:
                raise OlapError("the wildcard target cannot be combined with named types")
            return cls(None)
        return cls(names)


MeasurePairs = Sequence[tuple[str, str]]


def _coerce_measures(measures: MeasurePairs) -> tuple[tuple[str, str], ...]:
    pairs = tuple((str(dim), str(fn)) for dim, fn in measures)
    if not pairs:
        raise OlapError("at least one measure/aggregate pair is required")
    for dim, fn in pairs:
        if fn not in AGGREGATES:
            raise OlapError(f"unknown aggregate {fn!r}")
    return pairs


def apply_aggregate(fn: str, values: list):
    if fn == "SUM":
        return sum(values)
    if fn == "MIN":
        return min(values)
    if fn == "MAX":
        return max(values)
    if fn == "COUNT":
        return len(values)
    if fn == "AVG":
        return sum(values) / len(values)
    raise OlapError(f"unknown aggregate {fn!r}")


# ---------------------------------------------------------------------------
# conditions

@dataclass(frozen=True)
class Atom:
    """One comparison; ``level`` is None for measure atoms, ``negated`` flags NOT."""

    dim: str
    level: str | None
    cmp: str
    value: object
    negated: bool = False


@dataclass(frozen=True)
class Condition:
    """Disjunctive normal form: a tuple of conjunctive clauses of atoms."""

    clauses: tuple[tuple[Atom, ...], ...]

    @classmethod
    def of(cls, *atoms: Atom) -> Condition:
        return cls((tuple(atoms),))

    def atoms(self) -> tuple[Atom, ...]:
        return tuple(a for clause in self.clauses for a in clause)


def _atom_slot(atom: Atom, decl: NodeTypeDecl | EdgeTypeDecl) -> int | None:
    """The label slot an atom reads on this type, None when it has none."""
    if atom.level is None:
        if isinstance(decl, EdgeTypeDecl):
            return decl.measure_slot_of(atom.dim)
        return None
    for slot, dim in enumerate(decl.dims):
        if dim == atom.dim:
            return slot
    return None


def eval_atom(atom: Atom, decl, levels, label: tuple, catalog) -> bool | None:
    """Two-valued comparison where possible, None when the atom has no slot here."""
    slot = _atom_slot(atom, decl)
    if slot is None:
        return None
    stored = levels[(decl.name, slot)]
    value = label[slot]
    target_level = atom.level if atom.level is not None else catalog.schema(atom.dim).bottom
    if stored != target_level:
        value = catalog.roll(atom.dim, stored, target_level, value)
    result = compare_values(atom.cmp, value, atom.value)
    return (not result) if atom.negated else result


def validate_condition(g: Graphoid, cond: Condition) -> None:
    """Static checks: level compatibility, value typing, orderedness."""
    decls = list(g.node_types.values()) + list(g.edge_types.values())
    for atom in cond.atoms():
        if atom.dim not in g.catalog:
            raise OlapError(f"condition references unknown dimension {atom.dim!r}")
        schema = g.catalog.schema(atom.dim)
        level_name = atom.level if atom.level is not None else schema.bottom
        level = schema.level(level_name)  # raises on unknown level
        if not value_matches(level.vtype, atom.value):
            raise OlapError(
                f"condition constant {atom.value!r} is not a {level.vtype} ({atom.dim}.{level_name})"
            )
        if atom.cmp in ("<", ">") and not level.ordered:
            raise OlapError(f"level {atom.dim}.{level_name} is unordered; only '=' applies")
        for decl in decls:
            slot = _atom_slot(atom, decl)
            if slot is None:
                continue
            stored = g.levels[(decl.name, slot)]
            if stored == level_name:
                continue
            if level_name in schema.reachable_from(stored):
                continue
            raise OlapError(
                f"condition level {atom.dim}.{level_name} is below the stored level "
                f"{stored} of type {decl.name}"
            )


def _literal_not_false(atom: Atom, decl, levels, label, catalog) -> bool:
    value = eval_atom(atom, decl, levels, label, catalog)
    return True if value is None else value


def edge_satisfies(g: Graphoid, edge: HyperEdge, cond: Condition) -> bool:
    """An edge satisfies an atom when it is not false on the edge itself and
    on every adjacent node; clauses and the disjunction lift pointwise."""
    edecl = g.edge_types[edge.etype]
    adjacent = [g.nodes[i] for i in sorted(edge.adjacency)]
    for clause in cond.clauses:
        ok = True
        for atom in clause:
            if not _literal_not_false(atom, edecl, g.levels, edge.label, g.catalog):
                ok = False
                break
            for node in adjacent:
                ndecl = g.node_types[node.ntype]
                if not _literal_not_false(atom, ndecl, g.levels, node.label, g.catalog):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


# ---------------------------------------------------------------------------
# operations

def _resolve_climb_targets(g: Graphoid, targets: TargetSet, step: RollupStep) -> list[tuple[str, int]]:
    """Slots to rewrite.  A slot already sitting at the destination level is
    accepted as a no-op, so re-running a climb is harmless."""
    found: list[tuple[str, int]] = []
    if targets.is_wildcard:
        for decl in (*g.node_types.values(), *g.edge_types.values()):
            for slot, dim in enumerate(decl.dims):
                if dim == step.dimension and g.levels[(decl.name, slot)] == step.from_level:
                    found.append((decl.name, slot))
        if not found and not any(
            dim == step.dimension and g.levels[(decl.name, slot)] == step.to_level
            for decl in (*g.node_types.values(), *g.edge_types.values())
            for slot, dim in enumerate(decl.dims)
        ):
            raise OlapError(
                f"no type holds dimension {step.dimension} at level {step.from_level}"
            )
        return found
    for name in targets.names or ():
        decl = g.type_decl(name)
        slots = [slot for slot, dim in enumerate(decl.dims) if dim == step.dimension]
        if not slots:
            raise OlapError(f"type {name} lacks dimension {step.dimension}")
        slot = slots[0]
        stored = g.levels[(name, slot)]
        if stored == step.to_level:
            continue
        if stored != step.from_level:
            raise OlapError(
                f"type {name}: dimension {step.dimension} is at level {stored}, not {step.from_level}"
            )
        found.append((name, slot))
    return found


def climb(g: Graphoid, targets, step: RollupStep) -> Graphoid:
    """Rewrite one dimension's slot values from one level to a higher one."""
    if step.dimension == ID_DIMENSION:
        raise OlapError("the Id dimension cannot be climbed")
    targets = TargetSet.coerce(targets)
    schema = g.catalog.schema(step.dimension)
    for name in (step.from_level, step.to_level):
        if not schema.has_level(name):
            raise OlapError(f"dimension {step.dimension} has no level {name!r}")
    if step.to_level not in schema.reachable_from(step.from_level):
        raise OlapError(
            f"dimension {step.dimension}: level {step.to_level} not reachable from {step.from_level}"
        )
    found = _resolve_climb_targets(g, targets, step)
    if step.from_level == step.to_level:
        return g.derive()

    node_slots = {name: slot for name, slot in found if name in g.node_types}
    edge_slots = {name: slot for name, slot in found if name in g.edge_types}

    def moved(label: tuple, slot: int) -> tuple:
        out = list(label)
        out[slot] = g.catalog.roll(step.dimension, step.from_level, step.to_level, label[slot])
        return tuple(out)

    nodes = dict(g.nodes)
    if node_slots:
        for ident, node in g.nodes.items():
            slot = node_slots.get(node.ntype)
            if slot is not None:
                nodes[ident] = Node(node.ntype, moved(node.label, slot))
    edges = g.edges
    if edge_slots:
        edges = tuple(
            HyperEdge(e.etype, e.source, e.target, moved(e.label, edge_slots[e.etype]), e.surrogate)
            if e.etype in edge_slots
            else e
            for e in g.edges
        )
    levels = dict(g.levels)
    for name, slot in found:
        levels[(name, slot)] = step.to_level
    return g.derive(nodes=nodes, edges=edges, levels=levels)


def minimize(g: Graphoid) -> Graphoid:
    """Contract nodes that agree on type and every non-identifier slot.

    The surviving representative is the one with the smallest identifier;
    edge endpoints are rewritten through the contraction, the edge bag keeps
    its size.  Idempotent, and independent of input ordering.
    """
    chosen: dict[tuple, int] = {}
    rep: dict[int, int] = {}
    for ident in sorted(g.nodes):
        node = g.nodes[ident]
        key = (node.ntype, node.label[1:])
        if key not in chosen:
            chosen[key] = ident
        rep[ident] = chosen[key]
    if all(k == v for k, v in rep.items()):
        return g.derive()
    nodes = {ident: g.nodes[ident] for ident in sorted(chosen.values())}
    edges = tuple(
        HyperEdge(
            e.etype,
            frozenset(rep[i] for i in e.source),
            frozenset(rep[i] for i in e.target),
            e.label,
            e.surrogate,
        )
        for e in g.edges
    )
    return g.derive(nodes=nodes, edges=edges)


def group(g: Graphoid, type_name: str, step: RollupStep) -> Graphoid:
    """Climb one type; node types are additionally contracted afterwards."""
    if type_name in g.node_types:
        return minimize(climb(g, TargetSet.of(type_name), step))
    if type_name in g.edge_types:
        return climb(g, TargetSet.of(type_name), step)
    raise OlapError(f"unknown type {type_name!r}")


def _aggregation_plan(g: Graphoid, edge_type: str, pairs) -> dict[str, dict[int, str]]:
    """Which slots of which edge types fold under which aggregate."""
    plan: dict[str, dict[int, str]] = {}
    if edge_type == WILDCARD:
        for dim, fn in pairs:
            hit = False
            for decl in g.edge_types.values():
                slot = decl.measure_slot_of(dim)
                if slot is not None:
                    plan.setdefault(decl.name, {})[slot] = fn
                    hit = True
            if not hit:
                raise OlapError(f"measure {dim} is not declared by any edge type")
    else:
        decl = g.edge_type(edge_type)
        for dim, fn in pairs:
            slot = decl.measure_slot_of(dim)
            if slot is None:
                raise OlapError(f"edge type {edge_type} has no measure {dim}")
            plan.setdefault(decl.name, {})[slot] = fn
    for name, slots in plan.items():
        decl = g.edge_types[name]
        for slot, fn in slots.items():
            level = g.levels[(name, slot)]
            if fn != "COUNT" and level != g.catalog.schema(decl.dims[slot]).bottom:
                raise OlapError(
                    f"measure {decl.dims[slot]} of {name} sits at level {level}; "
                    "only COUNT can fold non-bottom values"
                )
    return plan


def aggr(g: Graphoid, edge_type: str, measures: MeasurePairs) -> Graphoid:
    """Merge same-class parallel edges and fold the listed measures.

    Two edges of a targeted type fall in one class when they share endpoints
    and agree on every label slot apart from the folded measures and an
    identifier slot.  The class keeps the edge with the smallest internal
    surrogate (and its identifier value) and its measure slots receive the
    aggregate over the whole class.  Input is contracted first so endpoint
    sets are canonical.
    """
    g = minimize(g)
    pairs = _coerce_measures(measures)
    plan = _aggregation_plan(g, edge_type, pairs)

    def class_key(e: HyperEdge):
        decl = g.edge_types[e.etype]
        skip = set(plan[e.etype])
        for slot, dim in enumerate(decl.dims):
            if dim == ID_DIMENSION:
                skip.add(slot)
        kept = tuple(v for slot, v in enumerate(e.label) if slot not in skip)
        return (e.etype, e.source, e.target, kept)

    classes: dict[tuple, list[HyperEdge]] = {}
    for e in g.edges:
        if e.etype in plan:
            classes.setdefault(class_key(e), []).append(e)

    reps = {min(members, key=lambda e: e.surrogate).surrogate: key for key, members in classes.items()}
    edges: list[HyperEdge] = []
    for e in g.edges:
        if e.etype not in plan:
            edges.append(e)
            continue
        key = reps.get(e.surrogate)
        if key is None:
            continue
        members = classes[key]
        label = list(e.label)
        for slot, fn in plan[e.etype].items():
            label[slot] = apply_aggregate(fn, [m.label[slot] for m in members])
        edges.append(HyperEdge(e.etype, e.source, e.target, tuple(label), e.surrogate))
    return g.derive(edges=tuple(edges))


def roll_up(g: Graphoid, targets, step: RollupStep, edge_type: str, measures: MeasurePairs) -> Graphoid:
    """Climb, contract, then aggregate: the usual coarsening move."""
    return aggr(minimize(climb(g, targets, step)), edge_type, measures)


def drill_down(
    g: Graphoid,
    targets,
    dimension: str,
    to_level: str,
    edge_type: str,
    measures: MeasurePairs,
) -> Graphoid:
    """Re-derive a finer view from the lineage base.

    Only sound while no dice or slice happened since the base was built; the
    requested level must be reachable from the base's stored level, so any
    level the original data supports can be re-materialized.
    """
    if g.tainted:
        raise LineageError("drill-down after a dice or slice is undefined")
    base = g.base if g.base is not None else g
    targets = TargetSet.coerce(targets)
    if targets.is_wildcard:
        names = [
            decl.name
            for decl in (*base.node_types.values(), *base.edge_types.values())
            if dimension in decl.dims
        ]
        if not names:
            raise OlapError(f"no type holds dimension {dimension}")
    else:
        names = list(targets.names or ())
    cur = base
    for name in names:
        decl = base.type_decl(name)
        if dimension not in decl.dims:
            raise OlapError(f"type {name} lacks dimension {dimension}")
        slot = decl.dims.index(dimension)
        stored = base.levels[(name, slot)]
        cur = climb(cur, TargetSet.of(name), RollupStep(dimension, stored, to_level))
    return aggr(minimize(cur), edge_type, measures)


def dice(g: Graphoid, cond: Condition) -> Graphoid:
    """Keep the edges satisfying the condition; nodes stay put.

    An atom holds on an edge when it is not false on the edge and on every
    adjacent node, where "not false" means either it cannot be evaluated
    there or it evaluates to true.
    """
    validate_condition(g, cond)
    edges = tuple(e for e in g.edges if edge_satisfies(g, e, cond))
    return g.derive(edges=edges, tainted=True)


def s_dice(g: Graphoid, cond: Condition) -> Graphoid:
    """Dice, then also drop survivors sharing an adjacency set with a removed edge."""
    validate_condition(g, cond)
    kept: list[HyperEdge] = []
    removed_adjacency: set[frozenset[int]] = set()
    for e in g.edges:
        if edge_satisfies(g, e, cond):
            kept.append(e)
        else:
            removed_adjacency.add(e.adjacency)
    edges = tuple(e for e in kept if e.adjacency not in removed_adjacency)
    return g.derive(edges=edges, tainted=True)


def slice_out(g: Graphoid, dimension: str, measures: MeasurePairs) -> Graphoid:
    """Roll a dimension up to All everywhere and aggregate the listed measures."""
    if dimension == ID_DIMENSION:
        raise OlapError("the Id dimension cannot be sliced out")
    spots = [
        (decl.name, slot)
        for decl in (*g.node_types.values(), *g.edge_types.values())
        for slot, dim in enumerate(decl.dims)
        if dim == dimension
    ]
    if not spots:
        raise OlapError(f"dimension {dimension} does not appear in the graph")
    cur = g
    for name, slot in spots:
        stored = cur.levels[(name, slot)]
        if stored != ALL_LEVEL:
            cur = climb(cur, TargetSet.of(name), RollupStep(dimension, stored, ALL_LEVEL))
    result = aggr(minimize(cur), WILDCARD, measures)
    return result.derive(tainted=True)


def n_delete(g: Graphoid, node_type: str) -> Graphoid:
    """Remove a node type; edges shrink and vanish once they touch nothing."""
    g.node_type(node_type)
    dead = {ident for ident, node in g.nodes.items() if node.ntype == node_type}
    nodes = {ident: node for ident, node in g.nodes.items() if ident not in dead}
    edges: list[HyperEdge] = []
    for e in g.edges:
        source = e.source - dead
        target = e.target - dead
        if source or target:
            edges.append(HyperEdge(e.etype, source, target, e.label, e.surrogate))
    return g.derive(nodes=nodes, edges=tuple(edges))
