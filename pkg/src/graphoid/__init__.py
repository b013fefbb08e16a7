"""In-memory graph OLAP: hypergraph values, dimension hierarchies, an
operation algebra, a star-cube bridge, path metrics, a query language and
JSON persistence."""
from __future__ import annotations

from .dims import (
    DimensionCatalog,
    DimensionError,
    DimensionInstance,
    DimensionSchema,
    Level,
    RollupStep,
    id_dimension,
    open_dimension,
    validate_instance,
    validate_schema,
)
from .hypergraph import (
    EdgeTypeDecl,
    Graphoid,
    GraphoidBuildError,
    GraphoidError,
    HyperEdge,
    Node,
    NodeTypeDecl,
    build_graphoid,
    edgify,
)
from .olap import (
    Atom,
    Condition,
    LineageError,
    OlapError,
    aggr,
    climb,
    dice,
    drill_down,
    group,
    minimize,
    n_delete,
    roll_up,
    s_dice,
    slice_out,
)
from .metrics import (
    NodeFilter,
    PathResult,
    adjacency_projection,
    group_average,
    shortest_paths,
)
from .cubes import (
    Cube,
    CubeMeasure,
    build_cube,
    check_equivalence,
    cube_dice,
    cube_roll_up,
    cube_slice,
    run_equivalence_trials,
    star,
    unstar,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "Condition",
    "Cube",
    "CubeMeasure",
    "DimensionCatalog",
    "DimensionError",
    "DimensionInstance",
    "DimensionSchema",
    "EdgeTypeDecl",
    "Graphoid",
    "GraphoidBuildError",
    "GraphoidError",
    "HyperEdge",
    "Level",
    "LineageError",
    "Node",
    "NodeFilter",
    "NodeTypeDecl",
    "OlapError",
    "PathResult",
    "RollupStep",
    "adjacency_projection",
    "aggr",
    "build_cube",
    "build_graphoid",
    "check_equivalence",
    "climb",
    "cube_dice",
    "cube_roll_up",
    "cube_slice",
    "dice",
    "drill_down",
    "edgify",
    "group",
    "group_average",
    "id_dimension",
    "minimize",
    "n_delete",
    "open_dimension",
    "roll_up",
    "run_equivalence_trials",
    "s_dice",
    "shortest_paths",
    "slice_out",
    "star",
    "unstar",
    "validate_instance",
    "validate_schema",
]
