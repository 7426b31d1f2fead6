"""Corpus parsing, normalization, segmentation, and chunking."""

from .chunking import (
    ChunkingConfig,
    DocumentChunk,
    DomainTag,
    RawDocument,
    chunk_document_segments,
    chunk_text,
    make_chunk_id,
)
from .manifest import (
    IngestReport,
    ManifestEntry,
    document_segments,
    ingest_corpus,
    ingest_corpus_from_manifest,
    load_manifest,
)
from .normalize import TRANSLITERATION_TABLE, normalize_text
from .segment import ARTICLE_HEADER, CASE_HEADER, segment_case_document, segment_constitution
from .sources import (
    parse_acts_csv,
    parse_case_file,
    parse_constitution_file,
    parse_ipc_csv,
    read_csv_rows,
    serialize_ipc_record,
)

__all__ = [
    "ARTICLE_HEADER",
    "CASE_HEADER",
    "ChunkingConfig",
    "DocumentChunk",
    "DomainTag",
    "IngestReport",
    "ManifestEntry",
    "RawDocument",
    "TRANSLITERATION_TABLE",
    "chunk_document_segments",
    "chunk_text",
    "document_segments",
    "ingest_corpus",
    "ingest_corpus_from_manifest",
    "load_manifest",
    "make_chunk_id",
    "normalize_text",
    "parse_acts_csv",
    "parse_case_file",
    "parse_constitution_file",
    "parse_ipc_csv",
    "read_csv_rows",
    "segment_case_document",
    "segment_constitution",
    "serialize_ipc_record",
]
