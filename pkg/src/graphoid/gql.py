"""The textual query language: parse, print, check, evaluate.

A program is a sequence of ``NAME = expr;`` bindings and ``OUTPUT expr;``
directives.  Expressions are operation calls over graph values, bare names,
or ``LOAD "file"``.  Conditions are normalized to disjunctive normal form at
parse time (negation stays on the atoms), and ``print_program`` emits a
canonical form that re-parses to the same tree.
"""
from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .dims import DimensionCatalog, RollupStep, value_matches
from .hypergraph import AGGREGATES, Graphoid, GraphoidError, edgify
from .metrics import NodeFilter, shortest_paths
from . import olap
from .olap import Atom, Condition, TargetSet

OP_NAMES = (
    "CLIMB",
    "MINIMIZE",
    "GROUP",
    "AGGR",
    "ROLLUP",
    "DRILLDOWN",
    "SLICE",
    "DICE",
    "SDICE",
    "NDELETE",
    "EDGIFY",
    "SHORTESTPATHS",
)
KEYWORDS = ("OUTPUT", "LOAD", "WHERE", "AND", "OR", "NOT") + OP_NAMES


class GqlError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class GqlSyntaxError(GqlError):
    pass


class GqlEvalError(GqlError):
    pass


# ---------------------------------------------------------------------------
# tokens

@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: object
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<DATE>\d{4}-\d{2}-\d{2})
  | (?P<NUMBER>-?\d+(?:\.\d+)?)
  | (?P<STRING>"(?:[^"\\\n]|\\.)*")
  | (?P<ARROW>->)
  | (?P<TYPENAME>\#[A-Za-z_][A-Za-z0-9_]*)
  | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PUNCT>[(){},;:.=<>*])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise GqlSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        raw = m.group()
        if kind == "WS":
            pass
        elif kind == "DATE":
            tokens.append(Token("DATE", raw, datetime.date.fromisoformat(raw), line, col))
        elif kind == "NUMBER":
            value = float(raw) if "." in raw else int(raw)
            tokens.append(Token("NUMBER", raw, value, line, col))
        elif kind == "STRING":
            body = raw[1:-1].replace('\\"', '"').replace("\\\\", "\\")
            tokens.append(Token("STRING", raw, body, line, col))
        elif kind == "NAME":
            upper = raw.upper()
            if upper in KEYWORDS:
                tokens.append(Token(upper, raw, upper, line, col))
            else:
                tokens.append(Token("NAME", raw, raw, line, col))
        elif kind == "TYPENAME":
            tokens.append(Token("TYPENAME", raw, raw, line, col))
        elif kind == "ARROW":
            tokens.append(Token("->", raw, raw, line, col))
        else:
            tokens.append(Token(raw, raw, raw, line, col))
        for ch in raw:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        pos = m.end()
    tokens.append(Token("EOF", "", None, line, col))
    return tokens


# ---------------------------------------------------------------------------
# syntax tree

@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Load:
    path: str


@dataclass(frozen=True)
class ClimbOp:
    source: object
    targets: TargetSet
    step: RollupStep


@dataclass(frozen=True)
class MinimizeOp:
    source: object


@dataclass(frozen=True)
class GroupOp:
    source: object
    type_name: str
    step: RollupStep


@dataclass(frozen=True)
class AggrOp:
    source: object
    edge_type: str
    measures: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class RollupOp:
    source: object
    targets: TargetSet
    step: RollupStep
    edge_type: str
    measures: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class DrilldownOp:
    source: object
    targets: TargetSet
    dimension: str
    to_level: str
    edge_type: str
    measures: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class SliceOp:
    source: object
    dimension: str
    measures: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class DiceOp:
    source: object
    condition: Condition


@dataclass(frozen=True)
class SdiceOp:
    source: object
    condition: Condition


@dataclass(frozen=True)
class NdeleteOp:
    source: object
    node_type: str


@dataclass(frozen=True)
class EdgifyOp:
    source: object
    node_type: str
    dimension: str


@dataclass(frozen=True)
class ShortestPathsOp:
    source: object
    from_filter: NodeFilter
    to_filter: NodeFilter
    via: TargetSet


@dataclass(frozen=True)
class Statement:
    name: str | None  # None for OUTPUT
    expr: object
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
    statements: tuple[Statement, ...]


# condition trees prior to normalization

@dataclass(frozen=True)
class BoolAtom:
    atom: Atom


@dataclass(frozen=True)
class BoolNot:
    item: object


@dataclass(frozen=True)
class BoolAnd:
    items: tuple


@dataclass(frozen=True)
class BoolOr:
    items: tuple


def _to_nnf(tree, negate: bool = False):
    if isinstance(tree, BoolAtom):
        a = tree.atom
        return BoolAtom(Atom(a.dim, a.level, a.cmp, a.value, a.negated ^ negate))
    if isinstance(tree, BoolNot):
        return _to_nnf(tree.item, not negate)
    if isinstance(tree, BoolAnd):
        items = tuple(_to_nnf(i, negate) for i in tree.items)
        return BoolOr(items) if negate else BoolAnd(items)
    if isinstance(tree, BoolOr):
        items = tuple(_to_nnf(i, negate) for i in tree.items)
        return BoolAnd(items) if negate else BoolOr(items)
    raise TypeError(f"not a condition tree: {tree!r}")


def _to_clauses(tree) -> tuple[tuple[Atom, ...], ...]:
    if isinstance(tree, BoolAtom):
        return ((tree.atom,),)
    if isinstance(tree, BoolOr):
        out: tuple[tuple[Atom, ...], ...] = ()
        for item in tree.items:
            out += _to_clauses(item)
        return out
    if isinstance(tree, BoolAnd):
        combos: tuple[tuple[Atom, ...], ...] = ((),)
        for item in tree.items:
            parts = _to_clauses(item)
            combos = tuple(left + right for left in combos for right in parts)
        return combos
    raise TypeError(f"not a condition tree: {tree!r}")


def normalize_condition(tree) -> Condition:
    """Push negation to the atoms, distribute AND over OR."""
    return Condition(_to_clauses(_to_nnf(tree)))


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise GqlSyntaxError(f"expected {kind!r}, found {shown!r}", tok.line, tok.col)
        return self.next()

    def fail(self, message: str) -> GqlSyntaxError:
        tok = self.peek()
        return GqlSyntaxError(message, tok.line, tok.col)

    # program ---------------------------------------------------------------

    def program(self) -> Program:
        statements = []
        while self.peek().kind != "EOF":
            statements.append(self.statement())
        if not statements:
            raise self.fail("empty program")
        return Program(tuple(statements))

    def statement(self) -> Statement:
        tok = self.peek()
        if tok.kind == "OUTPUT":
            self.next()
            expr = self.expression()
            self.expect(";")
            return Statement(None, expr, tok.line, tok.col)
        name = self.expect("NAME")
        self.expect("=")
        expr = self.expression()
        self.expect(";")
        return Statement(name.value, expr, name.line, name.col)

    def expression(self):
        tok = self.peek()
        if tok.kind == "LOAD":
            self.next()
            path = self.expect("STRING")
            return Load(path.value)
        if tok.kind in OP_NAMES:
            return self.op_call()
        if tok.kind == "NAME":
            if self.peek(1).kind == "(":
                raise GqlSyntaxError(f"unknown operation {tok.value!r}", tok.line, tok.col)
            self.next()
            return Ref(tok.value)
        raise self.fail(f"expected an expression, found {tok.text or 'end of input'!r}")

    def op_call(self):
        op = self.next()
        self.expect("(")
        source = self.expression()
        build = getattr(self, f"_args_{op.kind.lower()}")
        result = build(source)
        self.expect(")")
        return result

    # per-operation argument tails -------------------------------------------

    def _args_climb(self, source):
        self.expect(",")
        targets = self.target_set()
        self.expect(",")
        return ClimbOp(source, targets, self.step())

    def _args_minimize(self, source):
        return MinimizeOp(source)

    def _args_group(self, source):
        self.expect(",")
        tname = self.expect("TYPENAME").value
        self.expect(",")
        return GroupOp(source, tname, self.step())

    def _args_aggr(self, source):
        self.expect(",")
        etype = self.edge_type_or_star()
        self.expect(",")
        return AggrOp(source, etype, self.measures())

    def _args_rollup(self, source):
        self.expect(",")
        targets = self.target_set()
        self.expect(",")
        step = self.step()
        self.expect(";")
        etype = self.edge_type_or_star()
        self.expect(",")
        return RollupOp(source, targets, step, etype, self.measures())

    def _args_drilldown(self, source):
        self.expect(",")
        targets = self.target_set()
        self.expect(",")
        dim = self.expect("NAME").value
        self.expect("->")
        level = self.level_name()
        self.expect(";")
        etype = self.edge_type_or_star()
        self.expect(",")
        return DrilldownOp(source, targets, dim, level, etype, self.measures())

    def _args_slice(self, source):
        self.expect(",")
        dim = self.expect("NAME").value
        self.expect(";")
        return SliceOp(source, dim, self.measures())

    def _args_dice(self, source):
        self.expect(",")
        return DiceOp(source, self.condition())

    def _args_sdice(self, source):
        self.expect(",")
        return SdiceOp(source, self.condition())

    def _args_ndelete(self, source):
        self.expect(",")
        return NdeleteOp(source, self.expect("TYPENAME").value)

    def _args_edgify(self, source):
        self.expect(",")
        ntype = self.expect("TYPENAME").value
        self.expect(",")
        return EdgifyOp(source, ntype, self.expect("NAME").value)

    def _args_shortestpaths(self, source):
        self.expect(",")
        src = self.node_filter()
        self.expect(",")
        dst = self.node_filter()
        via = TargetSet.everything()
        if self.peek().kind == ",":
            self.next()
            via = self.target_set()
        return ShortestPathsOp(source, src, dst, via)

    # shared pieces -----------------------------------------------------------

    def target_set(self) -> TargetSet:
        tok = self.peek()
        if tok.kind == "*":
            self.next()
            return TargetSet.everything()
        self.expect("{")
        names = [self.expect("TYPENAME").value]
        while self.peek().kind == ",":
            self.next()
            names.append(self.expect("TYPENAME").value)
        self.expect("}")
        return TargetSet.of(*names)

    def edge_type_or_star(self) -> str:
        tok = self.peek()
        if tok.kind == "*":
            self.next()
            return olap.WILDCARD
        return self.expect("TYPENAME").value

    def level_name(self) -> str:
        # the top level shares its spelling with a keyword-free NAME
        tok = self.peek()
        if tok.kind == "NAME":
            return self.next().value
        raise self.fail(f"expected a level name, found {tok.text!r}")

    def step(self) -> RollupStep:
        dim = self.expect("NAME").value
        self.expect(":")
        frm = self.level_name()
        self.expect("->")
        to = self.level_name()
        return RollupStep(dim, frm, to)

    def measures(self) -> tuple[tuple[str, str], ...]:
        pairs = [self.measure_pair()]
        while self.peek().kind == ",":
            self.next()
            pairs.append(self.measure_pair())
        return tuple(pairs)

    def measure_pair(self) -> tuple[str, str]:
        dim = self.expect("NAME").value
        self.expect(",")
        fn = self.expect("NAME").value
        return (dim, fn)

    def node_filter(self) -> NodeFilter:
        ntype = self.expect("TYPENAME").value
        if self.peek().kind == "WHERE":
            self.next()
            return NodeFilter(ntype, self.condition())
        return NodeFilter(ntype)

    # conditions ---------------------------------------------------------------

    def condition(self) -> Condition:
        return normalize_condition(self.bool_or())

    def bool_or(self):
        items = [self.bool_and()]
        while self.peek().kind == "OR":
            self.next()
            items.append(self.bool_and())
        return items[0] if len(items) == 1 else BoolOr(tuple(items))

    def bool_and(self):
        items = [self.bool_unit()]
        while self.peek().kind == "AND":
            self.next()
            items.append(self.bool_unit())
        return items[0] if len(items) == 1 else BoolAnd(tuple(items))

    def bool_unit(self):
        tok = self.peek()
        if tok.kind == "NOT":
            self.next()
            return BoolNot(self.bool_unit())
        if tok.kind == "(":
            self.next()
            inner = self.bool_or()
            self.expect(")")
            return inner
        return BoolAtom(self.atom())

    def atom(self) -> Atom:
        dim = self.expect("NAME").value
        level: str | None = None
        if self.peek().kind == ".":
            self.next()
            level = self.level_name()
        cmp_tok = self.peek()
        if cmp_tok.kind not in ("<", "=", ">"):
            raise self.fail(f"expected a comparator, found {cmp_tok.text!r}")
        self.next()
        lit = self.peek()
        if lit.kind not in ("NUMBER", "STRING", "DATE"):
            raise self.fail(f"expected a literal, found {lit.text or 'end of input'!r}")
        self.next()
        return Atom(dim, level, cmp_tok.kind, lit.value)


def parse(text: str) -> Program:
    """Parse a program; raises GqlSyntaxError with line/col on the first error."""
    parser = _Parser(tokenize(text))
    program = parser.program()
    return program


def parse_condition(text: str) -> Condition:
    """Parse a bare condition (handy for tests and filters)."""
    parser = _Parser(tokenize(text))
    cond = parser.condition()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise GqlSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return cond


# ---------------------------------------------------------------------------
# printer

def format_value(value: object) -> str:
    if isinstance(value, str):
        body = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{body}"'
    if isinstance(value, bool):
        raise GqlError(f"cannot print literal {value!r}", 0, 0)
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, datetime.date):
        return value.isoformat()
    raise GqlError(f"cannot print literal {value!r}", 0, 0)


def format_atom(atom: Atom) -> str:
    name = atom.dim if atom.level is None else f"{atom.dim}.{atom.level}"
    text = f"{name} {atom.cmp} {format_value(atom.value)}"
    return f"NOT {text}" if atom.negated else text


def format_condition(cond: Condition) -> str:
    parts = []
    for clause in cond.clauses:
        text = " AND ".join(format_atom(a) for a in clause)
        if len(cond.clauses) > 1 and len(clause) > 1:
            text = f"({text})"
        parts.append(text)
    return " OR ".join(parts)


def _format_targets(targets: TargetSet) -> str:
    if targets.is_wildcard:
        return "*"
    return "{" + ", ".join(targets.names or ()) + "}"


def _format_step(step: RollupStep) -> str:
    return f"{step.dimension}: {step.from_level} -> {step.to_level}"


def _format_measures(measures: Sequence[tuple[str, str]]) -> str:
    return ", ".join(f"{dim}, {fn}" for dim, fn in measures)


def _format_filter(flt: NodeFilter) -> str:
    if flt.condition is None:
        return flt.ntype
    return f"{flt.ntype} WHERE {format_condition(flt.condition)}"


def format_expr(expr) -> str:
    if isinstance(expr, Ref):
        return expr.name
    if isinstance(expr, Load):
        return f'LOAD {format_value(expr.path)}'
    if isinstance(expr, ClimbOp):
        return f"CLIMB({format_expr(expr.source)}, {_format_targets(expr.targets)}, {_format_step(expr.step)})"
    if isinstance(expr, MinimizeOp):
        return f"MINIMIZE({format_expr(expr.source)})"
    if isinstance(expr, GroupOp):
        return f"GROUP({format_expr(expr.source)}, {expr.type_name}, {_format_step(expr.step)})"
    if isinstance(expr, AggrOp):
        return f"AGGR({format_expr(expr.source)}, {expr.edge_type}, {_format_measures(expr.measures)})"
    if isinstance(expr, RollupOp):
        return (
            f"ROLLUP({format_expr(expr.source)}, {_format_targets(expr.targets)}, "
            f"{_format_step(expr.step)}; {expr.edge_type}, {_format_measures(expr.measures)})"
        )
    if isinstance(expr, DrilldownOp):
        return (
            f"DRILLDOWN({format_expr(expr.source)}, {_format_targets(expr.targets)}, "
            f"{expr.dimension} -> {expr.to_level}; {expr.edge_type}, {_format_measures(expr.measures)})"
        )
    if isinstance(expr, SliceOp):
        return f"SLICE({format_expr(expr.source)}, {expr.dimension}; {_format_measures(expr.measures)})"
    if isinstance(expr, DiceOp):
        return f"DICE({format_expr(expr.source)}, {format_condition(expr.condition)})"
    if isinstance(expr, SdiceOp):
        return f"SDICE({format_expr(expr.source)}, {format_condition(expr.condition)})"
    if isinstance(expr, NdeleteOp):
        return f"NDELETE({format_expr(expr.source)}, {expr.node_type})"
    if isinstance(expr, EdgifyOp):
        return f"EDGIFY({format_expr(expr.source)}, {expr.node_type}, {expr.dimension})"
    if isinstance(expr, ShortestPathsOp):
        return (
            f"SHORTESTPATHS({format_expr(expr.source)}, {_format_filter(expr.from_filter)}, "
            f"{_format_filter(expr.to_filter)}, {_format_targets(expr.via)})"
        )
    raise GqlError(f"cannot print expression {expr!r}", 0, 0)


def print_program(program: Program) -> str:
    lines = []
    for stmt in program.statements:
        expr = format_expr(stmt.expr)
        lines.append(f"OUTPUT {expr};" if stmt.name is None else f"{stmt.name} = {expr};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# static checks

def _check_condition(cond: Condition, catalog: DimensionCatalog, where: str, report: list[str]) -> None:
    for atom in cond.atoms():
        if atom.dim not in catalog:
            report.append(f"{where}: unknown dimension {atom.dim!r}")
            continue
        schema = catalog.schema(atom.dim)
        level_name = atom.level if atom.level is not None else schema.bottom
        if not schema.has_level(level_name):
            report.append(f"{where}: dimension {atom.dim} has no level {level_name!r}")
            continue
        level = schema.level(level_name)
        if not value_matches(level.vtype, atom.value):
            report.append(
                f"{where}: constant {format_value(atom.value)} is not a {level.vtype} "
                f"({atom.dim}.{level_name})"
            )
        if atom.cmp in ("<", ">") and not level.ordered:
            report.append(f"{where}: level {atom.dim}.{level_name} is unordered")


def _check_step(step: RollupStep, catalog: DimensionCatalog, where: str, report: list[str]) -> None:
    if step.dimension not in catalog:
        report.append(f"{where}: unknown dimension {step.dimension!r}")
        return
    schema = catalog.schema(step.dimension)
    for name in (step.from_level, step.to_level):
        if not schema.has_level(name):
            report.append(f"{where}: dimension {step.dimension} has no level {name!r}")
            return
    if step.to_level not in schema.reachable_from(step.from_level):
        report.append(
            f"{where}: level {step.to_level} not reachable from {step.from_level} in {step.dimension}"
        )


def _check_measures(measures, where: str, report: list[str]) -> None:
    for _, fn in measures:
        if fn not in AGGREGATES:
            report.append(f"{where}: unknown aggregate {fn!r}")


def check(program: Program, catalog: DimensionCatalog, defined: set[str] | None = None) -> list[str]:
    """Name discipline and catalog-level validity, without evaluating."""
    report: list[str] = []
    env: set[str] = set(defined or ())

    def walk(expr, where: str) -> None:
        if isinstance(expr, Ref):
            if expr.name not in env:
                report.append(f"{where}: name {expr.name!r} used before definition")
            return
        if isinstance(expr, Load):
            return
        if isinstance(expr, ClimbOp):
            walk(expr.source, where)
            _check_step(expr.step, catalog, where, report)
        elif isinstance(expr, MinimizeOp):
            walk(expr.source, where)
        elif isinstance(expr, GroupOp):
            walk(expr.source, where)
            _check_step(expr.step, catalog, where, report)
        elif isinstance(expr, AggrOp):
            walk(expr.source, where)
            _check_measures(expr.measures, where, report)
        elif isinstance(expr, RollupOp):
            walk(expr.source, where)
            _check_step(expr.step, catalog, where, report)
            _check_measures(expr.measures, where, report)
        elif isinstance(expr, DrilldownOp):
            walk(expr.source, where)
            if expr.dimension not in catalog:
                report.append(f"{where}: unknown dimension {expr.dimension!r}")
            elif not catalog.schema(expr.dimension).has_level(expr.to_level):
                report.append(f"{where}: dimension {expr.dimension} has no level {expr.to_level!r}")
            _check_measures(expr.measures, where, report)
        elif isinstance(expr, SliceOp):
            walk(expr.source, where)
            if expr.dimension not in catalog:
                report.append(f"{where}: unknown dimension {expr.dimension!r}")
            _check_measures(expr.measures, where, report)
        elif isinstance(expr, (DiceOp, SdiceOp)):
            walk(expr.source, where)
            _check_condition(expr.condition, catalog, where, report)
        elif isinstance(expr, NdeleteOp):
            walk(expr.source, where)
        elif isinstance(expr, EdgifyOp):
            walk(expr.source, where)
            if expr.dimension not in catalog:
                report.append(f"{where}: unknown dimension {expr.dimension!r}")
        elif isinstance(expr, ShortestPathsOp):
            walk(expr.source, where)
            for flt in (expr.from_filter, expr.to_filter):
                if flt.condition is not None:
                    _check_condition(flt.condition, catalog, where, report)
        else:
            report.append(f"{where}: unknown expression {expr!r}")

    for stmt in program.statements:
        where = f"line {stmt.line}"
        walk(stmt.expr, where)
        if stmt.name is not None:
            if stmt.name in env:
                report.append(f"{where}: name {stmt.name!r} is already bound")
            env.add(stmt.name)
    return report


# ---------------------------------------------------------------------------
# evaluation

Loader = Callable[[str], Graphoid]


@dataclass
class EvalOutcome:
    bindings: dict[str, object]
    outputs: list[object]


def eval_program(
    program: Program,
    catalog: DimensionCatalog,
    loader: Loader | None = None,
    bindings: dict[str, object] | None = None,
    workers: int = 1,
) -> EvalOutcome:
    """Run the statements in order; OUTPUT values are collected in order."""
    env: dict[str, object] = dict(bindings or {})
    outputs: list[object] = []

    def graph_of(value, stmt) -> Graphoid:
        if not isinstance(value, Graphoid):
            raise GqlEvalError("expression expects a graph value", stmt.line, stmt.col)
        return value

    def evaluate(expr, stmt):
        if isinstance(expr, Ref):
            if expr.name not in env:
                raise GqlEvalError(f"name {expr.name!r} is not bound", stmt.line, stmt.col)
            return env[expr.name]
        if isinstance(expr, Load):
            if loader is None:
                raise GqlEvalError("LOAD is not available here", stmt.line, stmt.col)
            return loader(expr.path)
        src = graph_of(evaluate(expr.source, stmt), stmt)
        if isinstance(expr, ClimbOp):
            return olap.climb(src, expr.targets, expr.step)
        if isinstance(expr, MinimizeOp):
            return olap.minimize(src)
        if isinstance(expr, GroupOp):
            return olap.group(src, expr.type_name, expr.step)
        if isinstance(expr, AggrOp):
            return olap.aggr(src, expr.edge_type, expr.measures)
        if isinstance(expr, RollupOp):
            return olap.roll_up(src, expr.targets, expr.step, expr.edge_type, expr.measures)
        if isinstance(expr, DrilldownOp):
            return olap.drill_down(
                src, expr.targets, expr.dimension, expr.to_level, expr.edge_type, expr.measures
            )
        if isinstance(expr, SliceOp):
            return olap.slice_out(src, expr.dimension, expr.measures)
        if isinstance(expr, DiceOp):
            return olap.dice(src, expr.condition)
        if isinstance(expr, SdiceOp):
            return olap.s_dice(src, expr.condition)
        if isinstance(expr, NdeleteOp):
            return olap.n_delete(src, expr.node_type)
        if isinstance(expr, EdgifyOp):
            decl = src.node_type(expr.node_type)
            if expr.dimension not in decl.dims:
                raise GqlEvalError(
                    f"type {expr.node_type} lacks dimension {expr.dimension}", stmt.line, stmt.col
                )
            return edgify(src, expr.node_type, decl.dims.index(expr.dimension))
        if isinstance(expr, ShortestPathsOp):
            return shortest_paths(src, expr.from_filter, expr.to_filter, expr.via, workers)
        raise GqlEvalError(f"cannot evaluate {expr!r}", stmt.line, stmt.col)

    for stmt in program.statements:
        try:
            value = evaluate(stmt.expr, stmt)
        except GqlEvalError:
            raise
        except GraphoidError as exc:
            raise GqlEvalError(str(exc), stmt.line, stmt.col) from exc
        if stmt.name is None:
            outputs.append(value)
        else:
            if stmt.name in env:
                raise GqlEvalError(f"name {stmt.name!r} is already bound", stmt.line, stmt.col)
            env[stmt.name] = value
    return EvalOutcome(env, outputs)
