"""Domain-partitioned hybrid retrieval for legal research.

Three vector collections (statutes, penal code, case law), a legal
knowledge graph, and an orchestrator that routes queries, fuses
evidence, and produces grounded, citation-bearing answers, plus the
evaluation harness comparing the hybrid configuration against a
retrieval-only baseline.
"""

__version__ = "0.1.0"

from .system import LegalSearchSystem, ServiceConfig

__all__ = ["LegalSearchSystem", "ServiceConfig", "__version__"]
