"""In-process property graph with idempotent merges and traversal queries.

All query results come back sorted so repeated queries are
byte-identical. The store follows a readers-or-one-writer contract;
query methods never mutate state.
"""

from dataclasses import dataclass, field
from enum import Enum

from ..errors import EmptyKey, MissingEndpoint, NodeNotFound, SchemaViolation
from .model import EDGE_SCHEMA, EdgeType, NodeLabel

NodeRef = tuple[NodeLabel, str]


class Direction(str, Enum):
    OUT = "out"
    IN = "in"
    BOTH = "both"


@dataclass
class GraphNode:
    label: NodeLabel
    key: str
    properties: dict[str, str] = field(default_factory=dict)

    @property
    def ref(self) -> NodeRef:
        return (self.label, self.key)


@dataclass
class GraphEdge:
    type: EdgeType
    from_ref: NodeRef
    to_ref: NodeRef
    properties: dict[str, str] = field(default_factory=dict)

    @property
    def identity(self) -> tuple:
        return (self.type, self.from_ref, self.to_ref)


@dataclass
class GraphStats:
    node_count: int
    edge_count: int
    nodes_by_label: dict[str, int]
    edges_by_type: dict[str, int]


def _check_edge_schema(edge_type: EdgeType, from_label: NodeLabel, to_label: NodeLabel) -> None:
    source, targets = EDGE_SCHEMA[edge_type]
    if from_label is not source or to_label not in targets:
        allowed = ", ".join(sorted(t.value for t in targets))
        raise SchemaViolation(
            f"{edge_type.value} requires {source.value} -> {{{allowed}}}, "
            f"got {from_label.value} -> {to_label.value}"
        )


class GraphStore:
    def __init__(self):
        self._nodes: dict[NodeRef, GraphNode] = {}
        self._edges: dict[tuple, GraphEdge] = {}
        self._out: dict[NodeRef, set[tuple]] = {}
        self._in: dict[NodeRef, set[tuple]] = {}

    # -- mutation ---------------------------------------------------------------

    def merge_node(self, label: NodeLabel, key: str, properties: dict[str, str] | None = None) -> GraphNode:
        """Create the node or merge properties into the existing one."""
        if not key:
            raise EmptyKey(f"empty key for label {label.value}")
        ref = (label, key)
        node = self._nodes.get(ref)
        if node is None:
            node = GraphNode(label=label, key=key, properties=dict(properties or {}))
            self._nodes[ref] = node
            self._out[ref] = set()
            self._in[ref] = set()
        elif properties:
            node.properties.update(properties)
        return node

    def merge_edge(
        self,
        edge_type: EdgeType,
        from_ref: NodeRef,
        to_ref: NodeRef,
        properties: dict[str, str] | None = None,
    ) -> GraphEdge:
        """Idempotent on (type, from, to); both endpoints must exist."""
        for ref in (from_ref, to_ref):
            if ref not in self._nodes:
                raise MissingEndpoint(f"missing endpoint {ref[0].value}:{ref[1]}")
        _check_edge_schema(edge_type, from_ref[0], to_ref[0])
        identity = (edge_type, from_ref, to_ref)
        edge = self._edges.get(identity)
        if edge is None:
            edge = GraphEdge(type=edge_type, from_ref=from_ref, to_ref=to_ref,
                             properties=dict(properties or {}))
            self._edges[identity] = edge
            self._out[from_ref].add(identity)
            self._in[to_ref].add(identity)
        elif properties:
            edge.properties.update(properties)
        return edge

    # -- lookup -----------------------------------------------------------------

    def get_node(self, label: NodeLabel, key: str) -> GraphNode | None:
        return self._nodes.get((label, key))

    def has_node(self, label: NodeLabel, key: str) -> bool:
        return (label, key) in self._nodes

    def find_nodes(self, label: NodeLabel) -> list[GraphNode]:
        return sorted(
            (n for n in self._nodes.values() if n.label is label), key=lambda n: n.key
        )

    def _require(self, ref: NodeRef) -> GraphNode:
        node = self._nodes.get(ref)
        if node is None:
            raise NodeNotFound(f"{ref[0].value}:{ref[1]}")
        return node

    # -- queries ----------------------------------------------------------------

    def neighbors(
        self,
        ref: NodeRef,
        edge_type: EdgeType | None = None,
        direction: Direction = Direction.BOTH,
    ) -> list[tuple[GraphEdge, GraphNode]]:
        """Incident edges with the opposite endpoint, deterministically sorted."""
        self._require(ref)
        identities: set[tuple] = set()
        if direction in (Direction.OUT, Direction.BOTH):
            identities |= self._out[ref]
        if direction in (Direction.IN, Direction.BOTH):
            identities |= self._in[ref]
        results = []
        for identity in identities:
            edge = self._edges[identity]
            if edge_type is not None and edge.type is not edge_type:
                continue
            other_ref = edge.to_ref if edge.from_ref == ref else edge.from_ref
            results.append((edge, self._nodes[other_ref]))
        results.sort(key=lambda pair: (pair[0].type.value, pair[1].label.value, pair[1].key))
        return results

    def conjunctive_query(
        self,
        target_label: NodeLabel,
        constraints: list[tuple[EdgeType, Direction, NodeRef]],
    ) -> list[GraphNode]:
        """Nodes of ``target_label`` satisfying every constraint.

        A constraint (type, out, anchor) means the candidate has a
        type-edge pointing at the anchor; ``in`` means the anchor points
        at the candidate.
        """
        if not constraints:
            raise ValueError("conjunctive_query requires at least one constraint")
        candidate_sets: list[set[str]] = []
        for edge_type, direction, anchor in constraints:
            self._require(anchor)
            matched: set[str] = set()
            if direction in (Direction.OUT, Direction.BOTH):
                # candidate --edge--> anchor
                for identity in self._in[anchor]:
                    edge = self._edges[identity]
                    if edge.type is edge_type and edge.from_ref[0] is target_label:
                        matched.add(edge.from_ref[1])
            if direction in (Direction.IN, Direction.BOTH):
                # anchor --edge--> candidate
                for identity in self._out[anchor]:
                    edge = self._edges[identity]
                    if edge.type is edge_type and edge.to_ref[0] is target_label:
                        matched.add(edge.to_ref[1])
            candidate_sets.append(matched)
        keys = set.intersection(*candidate_sets)
        return [self._nodes[(target_label, key)] for key in sorted(keys)]

    def path_exists(
        self,
        from_ref: NodeRef,
        to_ref: NodeRef,
        edge_types: set[EdgeType],
        max_hops: int,
    ) -> list[tuple[GraphEdge, GraphNode]] | None:
        """Breadth-first shortest directed path within ``max_hops``.

        Returns the traversed (edge, node) steps or None. Expansion
        order is sorted so the returned path is deterministic among
        equal-length options.
        """
        self._require(from_ref)
        self._require(to_ref)
        if max_hops < 1:
            raise ValueError("max_hops must be >= 1")
        if from_ref == to_ref:
            return []
        frontier = [from_ref]
        parents: dict[NodeRef, tuple[NodeRef, tuple]] = {}
        seen = {from_ref}
        for _ in range(max_hops):
            next_frontier: list[NodeRef] = []
            for ref in frontier:
                steps = sorted(
                    (
                        self._edges[identity]
                        for identity in self._out[ref]
                        if self._edges[identity].type in edge_types
                    ),
                    key=lambda e: (e.type.value, e.to_ref[0].value, e.to_ref[1]),
                )
                for edge in steps:
                    target = edge.to_ref
                    if target in seen:
                        continue
                    seen.add(target)
                    parents[target] = (ref, edge.identity)
                    if target == to_ref:
                        return self._unwind(from_ref, to_ref, parents)
                    next_frontier.append(target)
            if not next_frontier:
                return None
            frontier = next_frontier
        return None

    def _unwind(self, from_ref, to_ref, parents) -> list[tuple[GraphEdge, GraphNode]]:
        path = []
        cursor = to_ref
        while cursor != from_ref:
            parent, identity = parents[cursor]
            path.append((self._edges[identity], self._nodes[cursor]))
            cursor = parent
        path.reverse()
        return path

    # -- stats ------------------------------------------------------------------

    def stats(self) -> GraphStats:
        by_label: dict[str, int] = {}
        for node in self._nodes.values():
            by_label[node.label.value] = by_label.get(node.label.value, 0) + 1
        by_type: dict[str, int] = {}
        for edge in self._edges.values():
            by_type[edge.type.value] = by_type.get(edge.type.value, 0) + 1
        return GraphStats(
            node_count=len(self._nodes),
            edge_count=len(self._edges),
            nodes_by_label=dict(sorted(by_label.items())),
            edges_by_type=dict(sorted(by_type.items())),
        )

    def all_nodes(self) -> list[GraphNode]:
        return sorted(self._nodes.values(), key=lambda n: (n.label.value, n.key))

    def all_edges(self) -> list[GraphEdge]:
        return sorted(
            self._edges.values(),
            key=lambda e: (e.type.value, e.from_ref[0].value, e.from_ref[1],
                           e.to_ref[0].value, e.to_ref[1]),
        )
