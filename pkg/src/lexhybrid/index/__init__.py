"""Per-domain vector collections and cross-collection fusion."""

from .fusion import hybrid_search
from .hnsw import HnswParams, ScoredHit, VectorCollection
from .persist import FORMAT_VERSION, load_collection, save_collection

__all__ = [
    "FORMAT_VERSION",
    "HnswParams",
    "ScoredHit",
    "VectorCollection",
    "hybrid_search",
    "load_collection",
    "save_collection",
]
