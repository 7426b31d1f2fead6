"""Legal knowledge graph: schema, store, queries, persistence."""

from .model import (
    EDGE_SCHEMA,
    EdgeType,
    NodeLabel,
    article_key,
    canonical_key,
    case_key,
    ipc_key,
)
from .persist import (
    edge_upsert_statement,
    export_statements,
    load_graph,
    node_upsert_statement,
    persist_graph,
)
from .store import Direction, GraphEdge, GraphNode, GraphStats, GraphStore

__all__ = [
    "EDGE_SCHEMA",
    "Direction",
    "EdgeType",
    "GraphEdge",
    "GraphNode",
    "GraphStats",
    "GraphStore",
    "NodeLabel",
    "article_key",
    "canonical_key",
    "case_key",
    "edge_upsert_statement",
    "export_statements",
    "ipc_key",
    "load_graph",
    "node_upsert_statement",
    "persist_graph",
]
