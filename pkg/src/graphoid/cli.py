"""Command line front end: validate, ingest, generate, query, theorem1, bench.

Exit codes: 0 on success, 1 when validation/equivalence/evaluation fails,
2 for usage problems (bad flags, missing files).  File arguments accept ``-``
for stdin/stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

from . import cubes, gql, metrics, olap, store
from .dims import DimensionCatalog, DimensionError, validate_instance, validate_schema
from .hypergraph import Graphoid, GraphoidBuildError, GraphoidError
from .metrics import NodeFilter
from .olap import Atom, Condition


class CliFailure(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _workers_default() -> int:
    try:
        return max(1, int(os.environ.get("GRAPHOID_WORKERS", "1")))
    except ValueError:
        return 1


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliFailure(f"cannot read {path}: {exc}", 2) from exc


def _load_json(path: str) -> dict:
    if path == "-":
        return json.load(sys.stdin)
    try:
        return store.load_json(path)
    except OSError as exc:
        raise CliFailure(f"cannot read {path}: {exc}", 2) from exc
    except json.JSONDecodeError as exc:
        raise CliFailure(f"{path}: not valid JSON ({exc})", 1) from exc


def _write_text(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliFailure(f"cannot write {path}: {exc}", 2) from exc


def _catalog_from_dims(paths: list[str]) -> DimensionCatalog:
    catalog = DimensionCatalog.of()
    for path in paths or []:
        try:
            source = io.StringIO(sys.stdin.read()) if path == "-" else path
            instance = store.load_dimension(source)
            problems = validate_instance(instance)
        except OSError as exc:
            raise CliFailure(f"cannot read {path}: {exc}", 2) from exc
        except (GraphoidError, DimensionError, KeyError) as exc:
            raise CliFailure(f"{path}: {exc}", 1) from exc
        if problems:
            raise CliFailure(f"{path}: " + "; ".join(problems), 1)
        catalog = catalog.with_dimension(instance)
    return catalog


# ---------------------------------------------------------------------------
# subcommands

def cmd_validate(args) -> int:
    catalog = _catalog_from_dims(args.dims)
    failed = False
    for path in args.files:
        raw = _load_json(path)
        try:
            kind = store.sniff_kind(raw)
            if kind == "schema":
                problems = validate_schema(store.schema_from_json(raw))
            elif kind == "instance":
                problems = validate_instance(store.instance_from_json(raw))
            elif kind == "graphoid":
                store.graphoid_from_json(raw, catalog)
                problems = []
            else:
                store.cube_from_json(raw, catalog)
                problems = []
        except GraphoidBuildError as exc:
            problems = exc.problems
        except (GraphoidError, DimensionError, KeyError, TypeError) as exc:
            problems = [str(exc)]
        if problems:
            failed = True
            for problem in problems:
                print(f"FAIL {path}: {problem}")
        else:
            print(f"OK {path}: valid {kind}")
    return 1 if failed else 0


def cmd_ingest(args) -> int:
    catalog = _catalog_from_dims(args.dims)
    try:
        if args.csv == "-":
            g = store.ingest_calls(sys.stdin, catalog)
        else:
            if not os.path.exists(args.csv):
                raise CliFailure(f"cannot read {args.csv}: no such file", 2)
            g = store.ingest_calls(args.csv, catalog)
    except GraphoidError as exc:
        print(f"ingest failed: {exc}", file=sys.stderr)
        return 1
    payload = json.dumps(store.graphoid_to_json(g), indent=2) + "\n"
    _write_text(payload, args.out)
    print(f"ingested {g.edge_count} calls over {g.node_count} phones", file=sys.stderr)
    return 0


def cmd_generate(args) -> int:
    config = store.GeneratorConfig(
        phone_count=args.phones,
        user_count=args.users,
        call_count=args.calls,
        max_group_size=args.max_group,
        seed=args.seed,
    )
    try:
        data = store.generate(config)
    except GraphoidError as exc:
        print(f"generate failed: {exc}", file=sys.stderr)
        return 1
    out = args.out
    os.makedirs(out, exist_ok=True)
    for name in (store.PHONE_DIMENSION, store.TIME_DIMENSION, store.DURATION_DIMENSION):
        payload = store.instance_to_json(data.catalog.instance(name))
        store.save_json(payload, os.path.join(out, f"{name.lower()}.dimension.json"))
    store.write_calls_csv(data.calls, os.path.join(out, "calls.csv"))
    store.save_json(store.graphoid_to_json(data.graphoid), os.path.join(out, "graph.json"))
    print(f"generated {len(data.calls)} calls over {len(data.phones)} phones into {out}")
    return 0


def _graphoid_edge_csv(g: Graphoid) -> str:
    width = max((decl.arity for decl in g.edge_types.values()), default=0)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["type", "source", "target"] + [f"v{i}" for i in range(width)])
    for e in g.edges:
        row = [
            e.etype,
            "/".join(str(i) for i in sorted(e.source)),
            "/".join(str(i) for i in sorted(e.target)),
        ]
        row += [str(v) for v in e.label]
        row += [""] * (width - len(e.label))
        writer.writerow(row)
    return out.getvalue()


def _render_output(value, fmt: str) -> str:
    if isinstance(value, Graphoid):
        if fmt == "csv":
            return _graphoid_edge_csv(value)
        return json.dumps(store.graphoid_to_json(value), indent=2) + "\n"
    results = tuple(value)
    if fmt == "csv":
        return metrics.path_results_to_csv(results)
    return json.dumps(metrics.path_results_to_rows(results), indent=2) + "\n"


def _make_loader(catalog: DimensionCatalog, base_dir: str):
    def load(path: str) -> Graphoid:
        resolved = path if os.path.isabs(path) else os.path.join(base_dir, path)
        try:
            document = store.load_json(resolved)
        except OSError as exc:
            raise store.StoreError(f"cannot load {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise store.StoreError(f"{path} is not valid JSON: {exc}") from exc
        return store.graphoid_from_json(document, catalog)

    return load


def _summary(value) -> str:
    if isinstance(value, Graphoid):
        return f"graphoid: {value.node_count} nodes, {value.edge_count} edges"
    return f"{len(tuple(value))} path results"


def _run_repl(catalog: DimensionCatalog, workers: int) -> int:
    loader = _make_loader(catalog, os.getcwd())
    env: dict[str, object] = {}
    buffer = ""
    prompt = "gql> " if sys.stdin.isatty() else ""
    while True:
        try:
            line = input(prompt if not buffer else "...  " if prompt else "")
        except EOFError:
            break
        if not buffer and line.strip().lower() in ("exit", "quit"):
            break
        if not line.strip():
            continue
        buffer += line + "\n"
        if not buffer.rstrip().endswith(";"):
            continue
        text, buffer = buffer, ""
        try:
            program = gql.parse(text)
            problems = gql.check(program, catalog, defined=set(env))
            if problems:
                for problem in problems:
                    print(f"error: {problem}")
                continue
            outcome = gql.eval_program(program, catalog, loader, bindings=env, workers=workers)
        except gql.GqlError as exc:
            print(f"error: {exc}")
            continue
        except GraphoidError as exc:
            print(f"error: {exc}")
            continue
        for value in outcome.outputs:
            sys.stdout.write(_render_output(value, "json"))
        for name, value in outcome.bindings.items():
            if name not in env:
                print(f"{name} = {_summary(value)}")
        env.update(outcome.bindings)
    return 0


def cmd_query(args) -> int:
    catalog = _catalog_from_dims(args.dims)
    if args.repl:
        return _run_repl(catalog, args.workers)
    if not args.file:
        raise CliFailure("query needs a program file or --repl", 2)
    text = _read_text(args.file)
    base_dir = os.getcwd() if args.file == "-" else os.path.dirname(os.path.abspath(args.file))
    try:
        program = gql.parse(text)
    except gql.GqlSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return 1
    problems = gql.check(program, catalog)
    if problems:
        for problem in problems:
            print(f"check error: {problem}", file=sys.stderr)
        return 1
    try:
        outcome = gql.eval_program(
            program, catalog, _make_loader(catalog, base_dir), workers=args.workers
        )
    except (gql.GqlError, GraphoidError) as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return 1
    rendered = "".join(_render_output(value, args.format) for value in outcome.outputs)
    _write_text(rendered, args.out)
    return 0


def cmd_theorem1(args) -> int:
    results = cubes.run_equivalence_trials(args.trials, args.seed, args.workers)
    ok = sum(1 for r in results if r.ok)
    if args.format == "json":
        for r in results:
            print(
                json.dumps(
                    {
                        "trial": r.index,
                        "seed": r.seed,
                        "op": r.description,
                        "ok": r.ok,
                        "mismatches": list(r.mismatches),
                    }
                )
            )
        print(json.dumps({"trials": len(results), "equivalent": ok}))
    else:
        for r in results:
            mark = "ok  " if r.ok else "FAIL"
            print(f"trial {r.index:04d} {mark} {r.description}")
            for mismatch in r.mismatches:
                print(f"          {mismatch}")
        print(f"{ok}/{len(results)} equivalent")
    return 0 if ok == len(results) else 1


def cmd_bench(args) -> int:
    config = store.GeneratorConfig(
        phone_count=args.phones, user_count=args.users, call_count=args.calls, seed=args.seed
    )
    data = store.generate(config)
    g = data.graphoid
    rows: list[tuple[str, float, int]] = []

    def run(label: str, fn) -> None:
        t0 = time.perf_counter()
        result = fn()
        elapsed = time.perf_counter() - t0
        size = len(result) if hasattr(result, "__len__") else 1
        rows.append((label, elapsed, size))

    from .dims import RollupStep

    by_customer = olap.minimize(
        olap.climb(g, [store.PHONE_TYPE], RollupStep(store.PHONE_DIMENSION, store.PHONE_BOTTOM, "Customer"))
    )
    by_operator = olap.minimize(
        olap.climb(g, [store.PHONE_TYPE], RollupStep(store.PHONE_DIMENSION, store.PHONE_BOTTOM, "Operator"))
    )
    for n in (2, 3):
        run(f"Q1 avg duration, {n}-phone groups", lambda n=n: metrics.group_average(g, [store.CALL_TYPE], n, "Duration", args.workers))
    for n in (2, 3):
        run(f"Q2 avg duration, {n}-customer groups", lambda n=n: metrics.group_average(by_customer, [store.CALL_TYPE], n, "Duration", args.workers))
    for n in (2, 3):
        run(f"Q3 avg duration, {n}-operator groups", lambda n=n: metrics.group_average(by_operator, [store.CALL_TYPE], n, "Duration", args.workers))
    phones = NodeFilter(store.PHONE_TYPE)
    claro = NodeFilter(store.PHONE_TYPE, Condition.of(Atom(store.PHONE_DIMENSION, "Operator", "=", "Claro")))
    movistar = NodeFilter(store.PHONE_TYPE, Condition.of(Atom(store.PHONE_DIMENSION, "Operator", "=", "Movistar")))
    ba = NodeFilter(store.PHONE_TYPE, Condition.of(Atom(store.PHONE_DIMENSION, "City", "=", "Buenos Aires")))
    salta = NodeFilter(store.PHONE_TYPE, Condition.of(Atom(store.PHONE_DIMENSION, "City", "=", "Salta")))
    run("Q4 shortest paths, all pairs", lambda: metrics.shortest_paths(g, phones, phones, [store.CALL_TYPE], args.workers))
    run("Q5 shortest paths, Claro -> Movistar", lambda: metrics.shortest_paths(g, claro, movistar, [store.CALL_TYPE], args.workers))
    run("Q6 shortest paths, Buenos Aires -> Salta", lambda: metrics.shortest_paths(g, ba, salta, [store.CALL_TYPE], args.workers))
    run("Q7 shortest paths, from Buenos Aires", lambda: metrics.shortest_paths(g, ba, phones, [store.CALL_TYPE], args.workers))

    print(f"benchmark over {len(data.calls)} calls, {len(data.phones)} phones (seed {config.seed})")
    for label, elapsed, size in rows:
        print(f"{label:45s} {elapsed * 1000:10.1f} ms   {size} rows")
    return 0


# ---------------------------------------------------------------------------
# parser wiring

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphoid", description="graph OLAP engine over labelled directed multi-hypergraphs"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_workers(p):
        p.add_argument(
            "--workers",
            type=int,
            default=_workers_default(),
            help="parallel workers (default from GRAPHOID_WORKERS)",
        )

    p = sub.add_parser("validate", help="validate schema/instance/graphoid/cube files")
    p.add_argument("files", nargs="+", help="JSON files to validate")
    p.add_argument("--dims", action="append", default=[], help="dimension file (repeatable)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ingest", help="build a graph value from a call-record CSV")
    p.add_argument("csv", help="call records (- for stdin)")
    p.add_argument("--dims", action="append", default=[], required=True, help="dimension file")
    p.add_argument("--out", default="-", help="output graphoid JSON (- for stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("generate", help="write synthetic dimensions, calls and graph")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--calls", type=int, default=1000)
    p.add_argument("--phones", type=int, default=100)
    p.add_argument("--users", type=int, default=50)
    p.add_argument("--max-group", type=int, default=4, dest="max_group")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("query", help="run a query program (batch file or REPL)")
    p.add_argument("file", nargs="?", help="program file (- for stdin)")
    p.add_argument("--repl", action="store_true", help="interactive statement loop")
    p.add_argument("--dims", action="append", default=[], help="dimension file (repeatable)")
    p.add_argument("--out", default="-", help="where OUTPUT values go (- for stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    add_workers(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("theorem1", help="random cube/graph equivalence trials")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--format", choices=("text", "json"), default="text")
    add_workers(p)
    p.set_defaults(func=cmd_theorem1)

    p = sub.add_parser("bench", help="time the case-study queries on synthetic data")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--calls", type=int, default=1000)
    p.add_argument("--phones", type=int, default=100)
    p.add_argument("--users", type=int, default=50)
    add_workers(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliFailure as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
