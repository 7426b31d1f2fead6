"""Corpus manifest loading and the end-to-end ingestion pipeline.

A manifest is a JSON file of {"path", "domain"} entries; paths are
resolved relative to the manifest's directory. Ingestion is
deterministic: chunks come out sorted by (doc_id, seq) no matter how
the files are scheduled, and per-file or per-row failures are collected
in a report instead of aborting the run.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import LexHybridError, RowError
from .chunking import ChunkingConfig, DocumentChunk, RawDocument, chunk_document_segments
from .segment import segment_case_document, segment_constitution
from .sources import (
    parse_acts_csv,
    parse_case_file,
    parse_constitution_file,
    parse_ipc_csv,
    read_csv_rows,
)
from .chunking import DomainTag


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    domain: DomainTag


@dataclass
class IngestReport:
    """Chunks plus everything that went wrong while producing them."""

    chunks: list[DocumentChunk] = field(default_factory=list)
    documents: list[RawDocument] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    entries = []
    for item in data:
        entry_path = Path(item["path"])
        if not entry_path.is_absolute():
            entry_path = path.parent / entry_path
        entries.append(ManifestEntry(path=entry_path, domain=DomainTag(item["domain"])))
    return entries


def document_segments(doc: RawDocument) -> list[tuple[str, str]]:
    """Segment a document according to its domain.

    Acts and penal-code records are compact, so they index as a single
    segment; a penal-code record longer than the chunk window still
    chunks normally downstream.
    """
    if doc.domain is DomainTag.CONSTITUTION:
        return segment_constitution(doc.body)
    if doc.domain is DomainTag.CASES:
        return segment_case_document(doc.body)
    return [(doc.title or "Body", doc.body)] if doc.body else []


def parse_manifest_entry(entry: ManifestEntry) -> tuple[list[RawDocument], list[str]]:
    """Parse one manifest file into documents plus row-level error strings."""
    text = entry.path.read_text(encoding="utf-8")
    source_id = entry.path.stem
    errors: list[str] = []
    if entry.domain is DomainTag.CONSTITUTION:
        return [parse_constitution_file(text, source_id)], errors
    if entry.domain is DomainTag.CASES:
        return [parse_case_file(text, source_id)], errors
    rows = read_csv_rows(text)
    if entry.domain is DomainTag.ACTS:
        return parse_acts_csv(rows, source_id=source_id), errors
    docs, row_errors = parse_ipc_csv(rows, source_id=source_id)
    errors.extend(f"{entry.path}: {exc}" for exc in row_errors)
    return docs, errors


def ingest_corpus(
    entries: list[ManifestEntry],
    cfg: ChunkingConfig | None = None,
) -> IngestReport:
    """Parse, segment, and chunk every manifest entry.

    Files are independent, so per-file parse failures only mark the
    report; remaining files are still processed.
    """
    cfg = cfg or ChunkingConfig()
    report = IngestReport()
    for entry in entries:
        try:
            docs, errors = parse_manifest_entry(entry)
        except (OSError, LexHybridError, RowError, json.JSONDecodeError) as exc:
            report.errors.append(f"{entry.path}: {exc}")
            continue
        report.errors.extend(errors)
        report.documents.extend(docs)
    report.documents.sort(key=lambda d: d.doc_id)
    seen_ids: set[str] = set()
    for doc in report.documents:
        if doc.doc_id in seen_ids:
            report.errors.append(f"duplicate doc_id: {doc.doc_id}")
            continue
        seen_ids.add(doc.doc_id)
        try:
            segments = document_segments(doc)
        except LexHybridError as exc:
            report.errors.append(f"{doc.doc_id}: {exc}")
            continue
        report.chunks.extend(chunk_document_segments(doc, segments, cfg))
    report.chunks.sort(key=lambda c: (c.doc_id, c.seq))
    return report


def ingest_corpus_from_manifest(
    manifest_path: str | Path,
    cfg: ChunkingConfig | None = None,
) -> IngestReport:
    return ingest_corpus(load_manifest(manifest_path), cfg)
