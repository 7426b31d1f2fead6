"""Approximate nearest-neighbor collection: a layered navigable
small-world graph over unit-norm vectors, searched under cosine
similarity.

Design notes:
- Levels are drawn from a seeded PRNG and the draw count is persisted,
  so rebuild and reload reproduce the same graph bit-for-bit.
- Collections at or below ``ef_search`` entries are searched by exact
  scan: a beam that wide would visit every node anyway, and the exact
  path guarantees small collections return exhaustive-scan results.
- Returned scores are exact cosines (vectors are unit-norm, so the dot
  product is the cosine); ties break by ascending chunk id.
- Vectors live in one contiguous row-per-node matrix so beam expansions
  score whole neighbor lists with a single matrix-vector product.

Insertion follows the usual two-phase scheme: greedy descent through
the upper layers to find an entry point, then a bounded beam search per
layer from the node's level down to layer 0, linking to the closest
``m`` candidates and pruning any neighbor that exceeds its degree
bound (2m at layer 0).
"""

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..embedding import DIM
from ..errors import DimensionMismatch


@dataclass(frozen=True)
class HnswParams:
    m: int = 16
    ef_construction: int = 200
    ef_search: int = 100
    level_lambda: float | None = None

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.ef_construction < self.m:
            raise ValueError("ef_construction must be >= m")
        if self.ef_search < 1:
            raise ValueError("ef_search must be >= 1")
        if self.level_lambda is None:
            object.__setattr__(self, "level_lambda", 1.0 / math.log(self.m))

    @property
    def max_degree_upper(self) -> int:
        return self.m

    @property
    def max_degree_base(self) -> int:
        return 2 * self.m


@dataclass(frozen=True)
class ScoredHit:
    chunk_id: str
    score: float
    collection: str


@dataclass
class _Node:
    node_id: int
    chunk_id: str
    level: int
    # neighbors[layer] is the out-neighbor set for 0 <= layer <= level
    neighbors: list[set[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.neighbors:
            self.neighbors = [set() for _ in range(self.level + 1)]


class VectorCollection:
    """One domain's vector collection with its proximity graph."""

    def __init__(self, name: str, params: HnswParams | None = None, rng_seed: int = 1337):
        self.name = name
        self.params = params or HnswParams()
        self.rng_seed = rng_seed
        self._rng = random.Random(rng_seed)
        self.rng_draws = 0
        self._nodes: dict[int, _Node] = {}
        self._id_by_chunk: dict[str, int] = {}
        self._matrix = np.zeros((0, DIM), dtype=np.float64)
        self._payloads: dict[str, Any] = {}
        self._entry_point: int | None = None
        self._next_id = 0

    def __len__(self) -> int:
        return len(self._id_by_chunk)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._id_by_chunk

    @property
    def chunk_ids(self) -> list[str]:
        return sorted(self._id_by_chunk)

    def payload(self, chunk_id: str) -> Any:
        return self._payloads.get(chunk_id)

    def vector(self, chunk_id: str) -> np.ndarray:
        return self._matrix[self._id_by_chunk[chunk_id]].copy()

    # -- construction ---------------------------------------------------------

    def _draw_level(self) -> int:
        # (0, 1] avoids log(0); one draw per insert keeps the stream
        # alignment stable for persistence.
        u = 1.0 - self._rng.random()
        self.rng_draws += 1
        return int(-math.log(u) * self.params.level_lambda)

    def _check_vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (DIM,):
            raise DimensionMismatch(f"expected {DIM} dims, got shape {v.shape}")
        return v

    def _grow_matrix(self, rows: int) -> None:
        if rows <= self._matrix.shape[0]:
            return
        capacity = max(rows, int(self._matrix.shape[0] * 1.5) + 8)
        grown = np.zeros((capacity, DIM), dtype=np.float64)
        grown[: self._matrix.shape[0]] = self._matrix
        self._matrix = grown

    def _distances(self, q: np.ndarray, node_ids: list[int]) -> np.ndarray:
        """Negated dot products (smaller = more similar) for a batch."""
        return -(self._matrix[node_ids] @ q)

    def insert(self, chunk_id: str, vector, payload: Any = None) -> None:
        """Insert or replace one entry (re-insert replaces the vector)."""
        v = self._check_vector(vector)
        if chunk_id in self._id_by_chunk:
            node_id = self._id_by_chunk[chunk_id]
            self._matrix[node_id] = v
            self._payloads[chunk_id] = payload
            self._link(self._nodes[node_id], v)
            return
        node_id = self._next_id
        self._next_id += 1
        self._grow_matrix(node_id + 1)
        self._matrix[node_id] = v
        node = _Node(node_id=node_id, chunk_id=chunk_id, level=self._draw_level())
        self._nodes[node_id] = node
        self._id_by_chunk[chunk_id] = node_id
        self._payloads[chunk_id] = payload
        if self._entry_point is None:
            self._entry_point = node_id
            return
        self._link(node, v)
        if node.level > self._nodes[self._entry_point].level:
            self._entry_point = node_id

    def _link(self, node: _Node, v: np.ndarray) -> None:
        entry = self._entry_point
        if entry is None or (entry == node.node_id and len(self._nodes) == 1):
            return
        top_level = self._nodes[entry].level
        entry_points = [entry]
        for layer in range(top_level, node.level, -1):
            entry_points = [nid for _, nid in self._search_layer(v, entry_points, layer, ef=1)]
        for layer in range(min(node.level, top_level), -1, -1):
            candidates = self._search_layer(
                v, entry_points, layer, ef=self.params.ef_construction
            )
            bound = self.params.max_degree_base if layer == 0 else self.params.max_degree_upper
            chosen = [nid for _, nid in candidates[: self.params.m] if nid != node.node_id]
            for nid in chosen:
                node.neighbors[layer].add(nid)
                other = self._nodes[nid]
                other.neighbors[layer].add(node.node_id)
                if len(other.neighbors[layer]) > bound:
                    self._prune(other, layer, bound)
            if len(node.neighbors[layer]) > bound:
                self._prune(node, layer, bound)
            entry_points = [nid for _, nid in candidates] or entry_points

    def _prune(self, node: _Node, layer: int, bound: int) -> None:
        if len(node.neighbors[layer]) <= bound:
            return
        anchor = self._matrix[node.node_id]
        ids = sorted(node.neighbors[layer])
        dists = self._distances(anchor, ids)
        ranked = sorted(zip(dists, ids))
        node.neighbors[layer] = {nid for _, nid in ranked[:bound]}

    # -- search ---------------------------------------------------------------

    def _search_layer(
        self, q: np.ndarray, entry_points: list[int], layer: int, ef: int
    ) -> list[tuple[float, int]]:
        """Beam search on one layer; returns (distance, node_id) ascending.

        Distance is the negated dot product, so smaller means more
        similar; node ids break heap ties deterministically.
        """
        visited: set[int] = set()
        candidates: list[tuple[float, int]] = []
        best: list[tuple[float, int]] = []  # max-heap via negated distance
        seeds = [nid for nid in entry_points if nid not in visited and nid in self._nodes]
        if not seeds:
            return []
        visited.update(seeds)
        for d, nid in zip(self._distances(q, seeds), seeds):
            heapq.heappush(candidates, (float(d), nid))
            heapq.heappush(best, (-float(d), nid))
        while len(best) > ef:
            heapq.heappop(best)
        while candidates:
            d, nid = heapq.heappop(candidates)
            if len(best) >= ef and d > -best[0][0]:
                break
            node = self._nodes[nid]
            if layer > node.level:
                continue
            fresh = [n for n in node.neighbors[layer] if n not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            for nd, neighbor in zip(self._distances(q, fresh), fresh):
                nd = float(nd)
                if len(best) < ef or nd < -best[0][0]:
                    heapq.heappush(candidates, (nd, neighbor))
                    heapq.heappush(best, (-nd, neighbor))
                    if len(best) > ef:
                        heapq.heappop(best)
        out = [(-nd, nid) for nd, nid in best]
        out.sort()
        return out

    def search_top_k(self, query, k: int) -> list[ScoredHit]:
        """Top-k hits by cosine, ties by ascending chunk id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q = self._check_vector(query)
        if not self._nodes:
            return []
        if len(self._nodes) <= self.params.ef_search:
            ids = sorted(self._nodes)
            scores = self._matrix[ids] @ q
            scored = [
                (float(score), self._nodes[nid].chunk_id)
                for score, nid in zip(scores, ids)
            ]
        else:
            entry = self._entry_point
            top_level = self._nodes[entry].level
            entry_points = [entry]
            for layer in range(top_level, 0, -1):
                entry_points = [nid for _, nid in self._search_layer(q, entry_points, layer, ef=1)]
            ef = max(self.params.ef_search, k)
            found = self._search_layer(q, entry_points, 0, ef=ef)
            scored = [(-d, self._nodes[nid].chunk_id) for d, nid in found]
        scored.sort(key=lambda item: (-item[0], item[1]))
        return [
            ScoredHit(chunk_id=cid, score=score, collection=self.name)
            for score, cid in scored[:k]
        ]

    # -- structural introspection (tests, persistence) --------------------------

    @property
    def entry_point_chunk(self) -> str | None:
        if self._entry_point is None:
            return None
        return self._nodes[self._entry_point].chunk_id

    def layer_adjacency(self, layer: int) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {}
        for node in self._nodes.values():
            if node.level >= layer:
                adj[node.chunk_id] = sorted(
                    self._nodes[nid].chunk_id for nid in node.neighbors[layer]
                )
        return adj

    def degree_bounds_ok(self) -> bool:
        for node in self._nodes.values():
            for layer, neighbors in enumerate(node.neighbors):
                bound = (
                    self.params.max_degree_base if layer == 0 else self.params.max_degree_upper
                )
                if len(neighbors) > bound:
                    return False
        return True

    def to_state(self) -> dict:
        """Plain-data snapshot used by persistence; canonical ordering."""
        return {
            "name": self.name,
            "params": {
                "m": self.params.m,
                "ef_construction": self.params.ef_construction,
                "ef_search": self.params.ef_search,
                "level_lambda": self.params.level_lambda,
            },
            "rng_seed": self.rng_seed,
            "rng_draws": self.rng_draws,
            "next_id": self._next_id,
            "entry_point": self._entry_point,
            "nodes": [
                {
                    "id": node.node_id,
                    "chunk_id": node.chunk_id,
                    "level": node.level,
                    "vector": [float(x) for x in self._matrix[node.node_id]],
                    "neighbors": [sorted(layer) for layer in node.neighbors],
                    "payload": self._payloads.get(node.chunk_id),
                }
                for _, node in sorted(self._nodes.items())
            ],
        }

    @classmethod
    def from_state(cls, state: dict) -> "VectorCollection":
        params = HnswParams(
            m=state["params"]["m"],
            ef_construction=state["params"]["ef_construction"],
            ef_search=state["params"]["ef_search"],
            level_lambda=state["params"]["level_lambda"],
        )
        col = cls(state["name"], params=params, rng_seed=state["rng_seed"])
        for _ in range(state["rng_draws"]):
            col._rng.random()
        col.rng_draws = state["rng_draws"]
        col._next_id = state["next_id"]
        col._entry_point = state["entry_point"]
        col._grow_matrix(state["next_id"])
        for raw in state["nodes"]:
            node = _Node(
                node_id=raw["id"],
                chunk_id=raw["chunk_id"],
                level=raw["level"],
                neighbors=[set(layer) for layer in raw["neighbors"]],
            )
            col._nodes[node.node_id] = node
            col._id_by_chunk[node.chunk_id] = node.node_id
            col._matrix[node.node_id] = np.asarray(raw["vector"], dtype=np.float64)
            col._payloads[node.chunk_id] = raw["payload"]
        return col
