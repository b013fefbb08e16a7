"""Graph-metric aggregation: co-occurrence projection and shortest paths.

The projection treats two nodes as adjacent when some hyperedge of the
selected types touches both, ignoring direction and multiplicity.  Shortest
paths are unweighted hop counts over that projection, with the
lexicographically smallest witness path reported per endpoint pair.
"""
from __future__ import annotations

import csv
import io
import itertools
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .hypergraph import Graphoid, GraphoidError
from .olap import Condition, TargetSet, eval_atom


@dataclass(frozen=True)
class NodeFilter:
    """Selects nodes of one type, optionally narrowed by a condition."""

    ntype: str
    condition: Condition | None = None


@dataclass(frozen=True)
class PathResult:
    source: int
    target: int
    hops: int
    path: tuple[int, ...]

    @property
    def reachable(self) -> bool:
        return self.hops >= 0


def map_deterministic(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Order-preserving map, threaded when more than one worker is asked for."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _selected_edges(g: Graphoid, via) -> list:
    via = TargetSet.coerce(via)
    if via.is_wildcard:
        return list(g.edges)
    for name in via.names or ():
        g.edge_type(name)
    chosen = set(via.names or ())
    return [e for e in g.edges if e.etype in chosen]


def adjacency_projection(g: Graphoid, via="*") -> dict[int, tuple[int, ...]]:
    """Undirected simple graph over node ids; isolated nodes map to ()."""
    neighbors: dict[int, set[int]] = {ident: set() for ident in g.nodes}
    for e in _selected_edges(g, via):
        touched = sorted(e.adjacency)
        for u, v in itertools.combinations(touched, 2):
            neighbors[u].add(v)
            neighbors[v].add(u)
    return {ident: tuple(sorted(ns)) for ident, ns in sorted(neighbors.items())}


def _bfs_distances(adj: dict[int, tuple[int, ...]], root: int) -> dict[int, int]:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        for nxt in adj[cur]:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


def _matching_nodes(g: Graphoid, flt: NodeFilter) -> list[int]:
    decl = g.node_type(flt.ntype)
    if flt.condition is None:
        return sorted(ident for ident, node in g.nodes.items() if node.ntype == flt.ntype)
    for atom in flt.condition.atoms():
        if atom.dim not in g.catalog:
            raise GraphoidError(f"filter references unknown dimension {atom.dim!r}")
        schema = g.catalog.schema(atom.dim)
        level_name = atom.level if atom.level is not None else schema.bottom
        schema.level(level_name)
        slot = next((i for i, d in enumerate(decl.dims) if d == atom.dim), None)
        if slot is None:
            raise GraphoidError(f"filter atom {atom.dim} is absent from node type {flt.ntype}")
        stored = g.levels[(decl.name, slot)]
        if stored != level_name and level_name not in schema.reachable_from(stored):
            raise GraphoidError(
                f"filter level {atom.dim}.{level_name} is below the stored level {stored}"
            )
    matched = []
    for ident in sorted(g.nodes):
        node = g.nodes[ident]
        if node.ntype != flt.ntype:
            continue
        for clause in flt.condition.clauses:
            values = [eval_atom(a, decl, g.levels, node.label, g.catalog) for a in clause]
            if all(v is True for v in values):
                matched.append(ident)
                break
    return matched


def _witness(adj, dist_to_target: dict[int, int], source: int, target: int) -> tuple[int, ...]:
    """Greedy front-first walk: always the smallest neighbor one hop closer."""
    path = [source]
    cur = source
    while cur != target:
        cur = min(n for n in adj[cur] if dist_to_target.get(n, -1) == dist_to_target[cur] - 1)
        path.append(cur)
    return tuple(path)


def shortest_paths(
    g: Graphoid,
    source_filter: NodeFilter,
    target_filter: NodeFilter,
    via="*",
    workers: int = 1,
) -> tuple[PathResult, ...]:
    """Hop counts and witness paths for every (source, target) pair, source != target.

    Unreachable pairs get hops -1 and an empty path.  Results are ordered by
    (source, target); ties in witness choice break toward smaller node ids,
    which makes the reported path the lexicographically smallest one.
    """
    adj = adjacency_projection(g, via)
    sources = _matching_nodes(g, source_filter)
    targets = _matching_nodes(g, target_filter)
    distance_maps = dict(
        zip(targets, map_deterministic(lambda root: _bfs_distances(adj, root), targets, workers))
    )
    results: list[PathResult] = []
    for source in sources:
        for target in targets:
            if source == target:
                continue
            dist = distance_maps[target]
            if source not in dist:
                results.append(PathResult(source, target, -1, ()))
            else:
                results.append(
                    PathResult(source, target, dist[source], _witness(adj, dist, source, target))
                )
    return tuple(results)


def path_results_to_csv(results: Iterable[PathResult]) -> str:
    """CSV rows source,target,hops,path with the path joined by '/'."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["source", "target", "hops", "path"])
    for r in results:
        writer.writerow([r.source, r.target, r.hops, "/".join(str(i) for i in r.path)])
    return out.getvalue()


def path_results_to_rows(results: Iterable[PathResult]) -> list[dict]:
    return [
        {"source": r.source, "target": r.target, "hops": r.hops, "path": list(r.path)}
        for r in results
    ]


def group_average(
    g: Graphoid,
    via,
    size: int,
    measure: str,
    workers: int = 1,
) -> dict[tuple[int, ...], float]:
    """Average of an edge measure over every ``size``-subset of co-participants.

    Every selected edge contributes its measure value to each subset of that
    many distinct adjacent nodes; groups are keyed by sorted node ids.
    """
    if size < 1:
        raise GraphoidError("group size must be at least 1")
    edges = _selected_edges(g, via)
    for e in edges:
        decl = g.edge_types[e.etype]
        if decl.measure_slot_of(measure) is None:
            raise GraphoidError(f"edge type {e.etype} has no measure {measure}")

    def tally(edge):
        decl = g.edge_types[edge.etype]
        slot = decl.measure_slot_of(measure)
        value = edge.label[slot]
        return [
            (combo, value)
            for combo in itertools.combinations(sorted(edge.adjacency), size)
        ]

    sums: dict[tuple[int, ...], float] = {}
    counts: dict[tuple[int, ...], int] = {}
    for contributions in map_deterministic(tally, edges, workers):
        for combo, value in contributions:
            sums[combo] = sums.get(combo, 0) + value
            counts[combo] = counts.get(combo, 0) + 1
    return {combo: sums[combo] / counts[combo] for combo in sorted(sums)}
