"""Assembled retrieval system: configuration, build, persistence, and
the end-to-end answer path shared by the CLI, the HTTP service, and the
evaluation harness.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from .embedding import Embedder, EmbedderConfig, EmbedderProvider
from .errors import EmptyQuery
from .extraction import ExtractorConfig, build_graph_from_corpus
from .graph.persist import load_graph, persist_graph
from .graph.store import GraphStore
from .index.hnsw import HnswParams, VectorCollection
from .index.persist import load_collection, save_collection
from .ingest.chunking import ChunkingConfig
from .ingest.manifest import IngestReport, ingest_corpus_from_manifest
from .orchestrator import (
    ALL_COLLECTIONS,
    DOMAIN_TO_COLLECTION,
    AnswerMode,
    ExtractiveStubGenerator,
    GroundedAnswer,
    build_prompt,
    classify_query,
    extract_citations,
    gather_evidence,
    generate_answer,
    route,
)
from .providers import GenerationClient, GeneratorConfig, generator_endpoint

INDEX_SEED = 20240601


@dataclass
class ServiceConfig:
    manifest_path: str = "fixtures/manifest.json"
    index_dir: str = "state/index"
    graph_dir: str = "state/graph"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    k: int = 5
    fusion_weights: dict[str, float] = field(default_factory=dict)
    pass_threshold: float = 5.0
    default_mode: str = "hybrid"
    chunk_size: int = 1000
    overlap_size: int = 200
    embedder_provider: str = "builtin_hash"
    embedder_endpoint: str | None = None
    generator_endpoint: str | None = None
    hnsw: HnswParams = field(default_factory=HnswParams)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        hnsw = HnswParams(**raw.pop("hnsw")) if "hnsw" in raw else HnswParams()
        return cls(**raw, hnsw=hnsw)


class LegalSearchSystem:
    """Shared read-only state plus the query pipeline over it."""

    def __init__(self, config: ServiceConfig | None = None, generator=None, embed_transport=None):
        self.config = config or ServiceConfig()
        embedder_cfg = EmbedderConfig(
            provider=EmbedderProvider(self.config.embedder_provider),
            endpoint=self.config.embedder_endpoint,
        )
        self.embedder = Embedder(embedder_cfg, transport=embed_transport)
        self.collections: dict[str, VectorCollection] = {}
        self.graph: GraphStore | None = None
        self.ingest_report: IngestReport | None = None
        if generator is not None:
            self.generator = generator
        else:
            endpoint = generator_endpoint(self.config.generator_endpoint)
            if endpoint:
                self.generator = GenerationClient(GeneratorConfig(endpoint=endpoint))
            else:
                self.generator = ExtractiveStubGenerator()

    # -- build ------------------------------------------------------------------

    def ingest(self, manifest_path: str | Path | None = None) -> IngestReport:
        """Chunk the corpus and build one vector collection per domain group."""
        manifest_path = manifest_path or self.config.manifest_path
        cfg = ChunkingConfig(self.config.chunk_size, self.config.overlap_size)
        report = ingest_corpus_from_manifest(manifest_path, cfg)
        self.ingest_report = report
        collections = {
            name: VectorCollection(name, params=self.config.hnsw, rng_seed=INDEX_SEED)
            for name in ALL_COLLECTIONS
        }
        # Embed label-prefixed text so a segment is findable by its own
        # heading (the header text lives in the label, not the chunk);
        # the stored payload keeps the pure chunk text.
        texts = [
            f"{chunk.section_label}. {chunk.text}" if chunk.section_label else chunk.text
            for chunk in report.chunks
        ]
        vectors = self.embedder.embed_batch(texts)
        for chunk, vector in zip(report.chunks, vectors):
            name = DOMAIN_TO_COLLECTION[chunk.domain.value]
            collections[name].insert(
                chunk.chunk_id,
                vector,
                payload={
                    "text": chunk.text,
                    "doc_id": chunk.doc_id,
                    "domain": chunk.domain.value,
                    "section_label": chunk.section_label,
                },
            )
        self.collections = collections
        return report

    def build_graph(self, extractor: ExtractorConfig | None = None):
        if self.ingest_report is None:
            self.ingest()
        store, report = build_graph_from_corpus(self.ingest_report.documents, extractor)
        self.graph = store
        return report

    def build_all(self, manifest_path: str | Path | None = None) -> None:
        self.ingest(manifest_path)
        self.build_graph()

    # -- persistence --------------------------------------------------------------

    def save(self, index_dir: str | Path | None = None, graph_dir: str | Path | None = None) -> None:
        index_dir = Path(index_dir or self.config.index_dir)
        index_dir.mkdir(parents=True, exist_ok=True)
        for name, col in sorted(self.collections.items()):
            (index_dir / f"{name}.index.json").write_bytes(save_collection(col))
        if self.graph is not None:
            persist_graph(self.graph, graph_dir or self.config.graph_dir)

    def load(self, index_dir: str | Path | None = None, graph_dir: str | Path | None = None) -> None:
        index_dir = Path(index_dir or self.config.index_dir)
        self.collections = {}
        for name in ALL_COLLECTIONS:
            path = index_dir / f"{name}.index.json"
            if path.exists():
                self.collections[name] = load_collection(path.read_bytes())
        graph_dir = Path(graph_dir or self.config.graph_dir)
        if (graph_dir / "nodes.jsonl").exists():
            self.graph = load_graph(graph_dir)

    # -- status -------------------------------------------------------------------

    def readiness(self) -> dict[str, bool]:
        return {
            "indexes": bool(self.collections)
            and all(len(col) > 0 for col in self.collections.values()),
            "graph": self.graph is not None,
            "embedder": True,
            "generator": self.generator is not None,
        }

    # -- query --------------------------------------------------------------------

    def answer_query(self, question: str, mode: str | AnswerMode = AnswerMode.HYBRID,
                     k: int | None = None) -> GroundedAnswer:
        """classify -> route -> gather -> prompt -> generate -> cite."""
        if not question or not question.strip():
            raise EmptyQuery("question is empty")
        mode = AnswerMode(mode)
        query_class = classify_query(question)
        decision = route(query_class, question, mode, self.config.fusion_weights)
        bundle = gather_evidence(
            decision,
            question,
            self.embedder.embed_text,
            self.collections,
            self.graph,
            k=k or self.config.k,
        )
        prompt = build_prompt(bundle, question)
        text = generate_answer(prompt, generator=self.generator)
        citations, ungrounded = extract_citations(text, bundle)
        return GroundedAnswer(
            text=text,
            citations=citations,
            ungrounded=ungrounded,
            evidence=bundle,
            mode=mode,
            prompt=prompt,
        )
