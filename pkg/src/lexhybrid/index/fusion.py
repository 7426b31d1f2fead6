"""Weighted score fusion across vector collections.

Each collection contributes a candidate pool of size k; fused score is
weight x cosine, and the global top-k is taken over all pools. Linear
weighting means scaling every weight by a positive constant never
changes the returned ranking.
"""

from ..errors import NoCollections
from .hnsw import ScoredHit, VectorCollection


def hybrid_search(
    collections: list[tuple[VectorCollection, float]],
    query,
    k: int,
) -> list[ScoredHit]:
    """Global top-k over per-collection top-k pools, by weighted cosine.

    Ties break by (collection name, chunk id) ascending so results are
    reproducible.
    """
    if not collections:
        raise NoCollections("hybrid_search requires at least one collection")
    weights = [w for _, w in collections]
    if any(w < 0 for w in weights):
        raise ValueError("fusion weights must be >= 0")
    if all(w == 0 for w in weights):
        raise ValueError("at least one fusion weight must be > 0")
    fused: list[ScoredHit] = []
    for col, weight in collections:
        for hit in col.search_top_k(query, k):
            fused.append(
                ScoredHit(
                    chunk_id=hit.chunk_id,
                    score=weight * hit.score,
                    collection=col.name,
                )
            )
    fused.sort(key=lambda h: (-h.score, h.collection, h.chunk_id))
    return fused[:k]
