"""Graph persistence and external-database export.

On disk the graph is two line-delimited JSON files (nodes, edges) plus
a manifest with counts and a checksum over both. Records are written
in canonical sorted order so replaying the same build produces
byte-identical files.

``upsert_statement`` renders the documented textual template used when
exporting to an external graph database; no live connection is ever
required.
"""

import hashlib
import json
from pathlib import Path

from ..errors import CorruptPayload, SchemaViolation
from .model import EdgeType, NodeLabel
from .store import GraphEdge, GraphNode, GraphStore

NODES_FILE = "nodes.jsonl"
EDGES_FILE = "edges.jsonl"
MANIFEST_FILE = "graph-manifest.json"


def _node_line(node: GraphNode) -> str:
    return json.dumps(
        {"label": node.label.value, "key": node.key, "properties": node.properties},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=True,
    )


def _edge_line(edge: GraphEdge) -> str:
    return json.dumps(
        {
            "type": edge.type.value,
            "from_label": edge.from_ref[0].value,
            "from_key": edge.from_ref[1],
            "to_label": edge.to_ref[0].value,
            "to_key": edge.to_ref[1],
            "properties": edge.properties,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=True,
    )


def persist_graph(store: GraphStore, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    nodes_text = "".join(_node_line(n) + "\n" for n in store.all_nodes())
    edges_text = "".join(_edge_line(e) + "\n" for e in store.all_edges())
    digest = hashlib.sha256()
    digest.update(nodes_text.encode("utf-8"))
    digest.update(edges_text.encode("utf-8"))
    stats = store.stats()
    manifest = {
        "node_count": stats.node_count,
        "edge_count": stats.edge_count,
        "sha256": digest.hexdigest(),
    }
    (directory / NODES_FILE).write_text(nodes_text, encoding="utf-8")
    (directory / EDGES_FILE).write_text(edges_text, encoding="utf-8")
    (directory / MANIFEST_FILE).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_graph(directory: str | Path) -> GraphStore:
    """Rebuild a store, re-validating checksum, schema, and uniqueness."""
    directory = Path(directory)
    try:
        nodes_text = (directory / NODES_FILE).read_text(encoding="utf-8")
        edges_text = (directory / EDGES_FILE).read_text(encoding="utf-8")
        manifest = json.loads((directory / MANIFEST_FILE).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CorruptPayload(f"missing graph file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptPayload(f"unreadable graph manifest: {exc}") from exc
    digest = hashlib.sha256()
    digest.update(nodes_text.encode("utf-8"))
    digest.update(edges_text.encode("utf-8"))
    if digest.hexdigest() != manifest.get("sha256"):
        raise CorruptPayload("graph checksum mismatch")
    store = GraphStore()
    for line_no, line in enumerate(nodes_text.splitlines(), start=1):
        try:
            record = json.loads(line)
            label = NodeLabel(record["label"])
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CorruptPayload(f"bad node record at line {line_no}: {exc}") from exc
        if store.has_node(label, record["key"]):
            raise SchemaViolation(f"duplicate node at line {line_no}: {line}")
        store.merge_node(label, record["key"], record.get("properties") or {})
    for line_no, line in enumerate(edges_text.splitlines(), start=1):
        try:
            record = json.loads(line)
            edge_type = EdgeType(record["type"])
            from_ref = (NodeLabel(record["from_label"]), record["from_key"])
            to_ref = (NodeLabel(record["to_label"]), record["to_key"])
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CorruptPayload(f"bad edge record at line {line_no}: {exc}") from exc
        if not store.has_node(*from_ref) or not store.has_node(*to_ref):
            raise SchemaViolation(f"edge references unknown node: {line}")
        store.merge_edge(edge_type, from_ref, to_ref, record.get("properties") or {})
    if store.stats().node_count != manifest.get("node_count") or store.stats().edge_count != manifest.get("edge_count"):
        raise CorruptPayload("graph manifest counts disagree with files")
    return store


def _props_literal(properties: dict[str, str]) -> str:
    parts = ", ".join(f"{k}: {json.dumps(v)}" for k, v in sorted(properties.items()))
    return "{" + parts + "}"


def node_upsert_statement(node: GraphNode) -> str:
    stmt = f"MERGE (n:{node.label.value} {{key: {json.dumps(node.key)}}})"
    if node.properties:
        stmt += f" SET n += {_props_literal(node.properties)}"
    return stmt + ";"


def edge_upsert_statement(edge: GraphEdge) -> str:
    return (
        f"MATCH (a:{edge.from_ref[0].value} {{key: {json.dumps(edge.from_ref[1])}}}), "
        f"(b:{edge.to_ref[0].value} {{key: {json.dumps(edge.to_ref[1])}}}) "
        f"MERGE (a)-[:{edge.type.value}]->(b);"
    )


def export_statements(store: GraphStore) -> list[str]:
    """Deterministic upsert statements for the whole store, nodes first."""
    statements = [node_upsert_statement(n) for n in store.all_nodes()]
    statements.extend(edge_upsert_statement(e) for e in store.all_edges())
    return statements
