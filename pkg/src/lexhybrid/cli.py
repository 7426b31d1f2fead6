"""Command-line interface.

Subcommands: ingest, build-graph, query, graph, eval, serve.
Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

import argparse
import json
import sys
from pathlib import Path

from .errors import LexHybridError
from .evaluation import (
    JudgeConfig,
    load_eval_items,
    render_comparison_table,
    run_benchmark,
    run_competency_suite,
)
from .graph.model import NodeLabel
from .graph.store import Direction
from .graph.model import EdgeType
from .orchestrator import AnswerMode
from .service import answer_to_dict
from .system import LegalSearchSystem, ServiceConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lexhybrid", description="Hybrid legal retrieval system")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_state_args(p, manifest_required=False):
        p.add_argument("--manifest", help="corpus manifest JSON", required=manifest_required)
        p.add_argument("--state-dir", default="state", help="directory holding saved indexes and graph")

    p_ingest = sub.add_parser("ingest", help="chunk + embed the corpus and save the indexes")
    add_state_args(p_ingest, manifest_required=True)

    p_graph_build = sub.add_parser("build-graph", help="extract entities and save the graph files")
    add_state_args(p_graph_build, manifest_required=True)

    p_query = sub.add_parser("query", help="answer one question (or loop with --interactive)")
    add_state_args(p_query)
    p_query.add_argument("question", nargs="?", help="the question to answer")
    p_query.add_argument("--mode", choices=[m.value for m in AnswerMode], default="hybrid")
    p_query.add_argument("--k", type=int, default=None)
    p_query.add_argument("--json", action="store_true", help="emit the full response as JSON")
    p_query.add_argument("--interactive", action="store_true")

    p_graph = sub.add_parser("graph", help="inspect the knowledge graph")
    graph_sub = p_graph.add_subparsers(dest="graph_command", required=True)
    p_stats = graph_sub.add_parser("stats")
    add_state_args(p_stats)
    p_node = graph_sub.add_parser("node")
    p_node.add_argument("label")
    p_node.add_argument("key")
    add_state_args(p_node)
    p_gquery = graph_sub.add_parser("query")
    p_gquery.add_argument("--target", default="Case")
    p_gquery.add_argument(
        "--where",
        action="append",
        required=True,
        help='constraint "EDGE_TYPE direction ANCHOR_LABEL ANCHOR_KEY", e.g. "REFERS_TO out Article ART:14"',
    )
    add_state_args(p_gquery)
    p_comp = graph_sub.add_parser("competency")
    p_comp.add_argument("suite", help="competency suite JSON file")
    add_state_args(p_comp)

    p_eval = sub.add_parser("eval", help="run the benchmark over a dataset")
    add_state_args(p_eval)
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--modes", default="hybrid,rag_only")
    p_eval.add_argument("--out", help="write the machine-readable report here")
    p_eval.add_argument("--pass-threshold", type=float, default=5.0)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--config", help="ServiceConfig JSON file")
    add_state_args(p_serve)
    p_serve.add_argument("--host", default=None)
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--static-dir", default=None, help="directory of built UI assets")

    return parser


def _load_system(args, need_graph=True) -> LegalSearchSystem:
    config = ServiceConfig(
        manifest_path=args.manifest or "fixtures/manifest.json",
        index_dir=str(Path(args.state_dir) / "index"),
        graph_dir=str(Path(args.state_dir) / "graph"),
    )
    system = LegalSearchSystem(config)
    index_dir = Path(config.index_dir)
    if index_dir.is_dir() and any(index_dir.glob("*.index.json")):
        system.load()
        if need_graph and system.graph is None and args.manifest:
            system.build_all(args.manifest)
    elif args.manifest:
        system.build_all(args.manifest)
    else:
        raise LexHybridError(
            f"no saved state under {args.state_dir!r}; pass --manifest to build from a corpus"
        )
    return system


def _cmd_ingest(args) -> int:
    config = ServiceConfig(
        manifest_path=args.manifest,
        index_dir=str(Path(args.state_dir) / "index"),
        graph_dir=str(Path(args.state_dir) / "graph"),
    )
    system = LegalSearchSystem(config)
    report = system.ingest(args.manifest)
    system.save()
    print(f"ingested {len(report.documents)} documents into {len(report.chunks)} chunks")
    for name, col in sorted(system.collections.items()):
        print(f"  collection {name}: {len(col)} entries")
    if report.errors:
        print(f"{len(report.errors)} ingest errors:", file=sys.stderr)
        for err in report.errors:
            print(f"  {err}", file=sys.stderr)
    return EXIT_OK


def _cmd_build_graph(args) -> int:
    config = ServiceConfig(
        manifest_path=args.manifest,
        index_dir=str(Path(args.state_dir) / "index"),
        graph_dir=str(Path(args.state_dir) / "graph"),
    )
    system = LegalSearchSystem(config)
    system.ingest(args.manifest)
    build_report = system.build_graph()
    system.save()
    stats = system.graph.stats()
    print(f"graph: {stats.node_count} nodes, {stats.edge_count} edges")
    for warning in build_report.warnings:
        print(f"  warning: {warning}", file=sys.stderr)
    for error in build_report.errors:
        print(f"  error: {error}", file=sys.stderr)
    return EXIT_OK


def _print_answer(answer, as_json: bool) -> None:
    if as_json:
        print(json.dumps(answer_to_dict(answer), sort_keys=True, indent=2))
        return
    print(answer.text)
    if answer.citations:
        print("\nCitations:")
        for c in answer.citations:
            print(f"  [{c.kind}] {c.reference} ({c.snippet})")
    if answer.ungrounded:
        print("Ungrounded references: " + ", ".join(answer.ungrounded))


def _cmd_query(args) -> int:
    system = _load_system(args)
    if args.interactive:
        print("interactive mode; empty line exits")
        while True:
            try:
                question = input("? ").strip()
            except EOFError:
                break
            if not question:
                break
            answer = system.answer_query(question, AnswerMode(args.mode), k=args.k)
            _print_answer(answer, args.json)
        return EXIT_OK
    if not args.question:
        raise UsageError("question is required unless --interactive")
    answer = system.answer_query(args.question, AnswerMode(args.mode), k=args.k)
    _print_answer(answer, args.json)
    return EXIT_OK


def _cmd_graph(args) -> int:
    system = _load_system(args)
    store = system.graph
    if store is None:
        raise LexHybridError("graph is not built; run build-graph first")
    if args.graph_command == "stats":
        stats = store.stats()
        print(json.dumps(
            {
                "node_count": stats.node_count,
                "edge_count": stats.edge_count,
                "nodes_by_label": stats.nodes_by_label,
                "edges_by_type": stats.edges_by_type,
            },
            sort_keys=True,
            indent=2,
        ))
        return EXIT_OK
    if args.graph_command == "node":
        try:
            label = NodeLabel(args.label)
        except ValueError:
            raise UsageError(f"unknown label {args.label!r}")
        node = store.get_node(label, args.key)
        if node is None:
            raise LexHybridError(f"node not found: {args.label}:{args.key}")
        print(json.dumps({"label": node.label.value, "key": node.key, "properties": node.properties}, indent=2))
        for edge, other in store.neighbors((label, args.key), direction=Direction.BOTH):
            arrow = "->" if edge.from_ref == (label, args.key) else "<-"
            print(f"  {edge.type.value} {arrow} {other.label.value}:{other.key}")
        return EXIT_OK
    if args.graph_command == "competency":
        results = run_competency_suite(store, args.suite)
        failures = 0
        for result in results:
            status = "pass" if result.passed else "FAIL"
            print(f"{status}  {result.name}")
            if not result.passed:
                failures += 1
                print(f"      expected {result.expected}, got {result.actual}")
        return EXIT_OK if failures == 0 else EXIT_RUNTIME
    # conjunctive query
    try:
        target = NodeLabel(args.target)
    except ValueError:
        raise UsageError(f"unknown label {args.target!r}")
    constraints = []
    for raw in args.where:
        parts = raw.split()
        if len(parts) != 4:
            raise UsageError(f'bad constraint {raw!r}; expected "EDGE dir LABEL KEY"')
        edge_raw, direction_raw, label_raw, key = parts
        try:
            constraints.append(
                (EdgeType(edge_raw), Direction(direction_raw), (NodeLabel(label_raw), key))
            )
        except ValueError as exc:
            raise UsageError(f"bad constraint {raw!r}: {exc}")
    nodes = store.conjunctive_query(target, constraints)
    for node in nodes:
        print(node.key)
    return EXIT_OK


def _cmd_eval(args) -> int:
    system = _load_system(args)
    items = load_eval_items(args.dataset)
    modes = tuple(AnswerMode(m.strip()) for m in args.modes.split(",") if m.strip())
    report = run_benchmark(system, items, modes, JudgeConfig(pass_threshold=args.pass_threshold))
    print(render_comparison_table(report))
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
        print(f"\nreport written to {args.out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    if args.config:
        config = ServiceConfig.from_file(args.config)
    else:
        config = ServiceConfig(
            manifest_path=args.manifest or "fixtures/manifest.json",
            index_dir=str(Path(args.state_dir) / "index"),
            graph_dir=str(Path(args.state_dir) / "graph"),
        )
    if args.host:
        config.listen_host = args.host
    if args.port:
        config.listen_port = args.port
    system = LegalSearchSystem(config)
    index_dir = Path(config.index_dir)
    if index_dir.is_dir() and any(index_dir.glob("*.index.json")):
        system.load()
    else:
        system.build_all()
    serve(system, static_dir=args.static_dir)
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "build-graph": _cmd_build_graph,
    "query": _cmd_query,
    "graph": _cmd_graph,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LexHybridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
