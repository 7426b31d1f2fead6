"""Core ingestion types and the overlapping-window chunker.

Chunk windows are computed over characters of the normalized segment
text; spans recorded on a chunk index into the segment it came from,
never across segment boundaries.
"""

from dataclasses import dataclass, field
from enum import Enum


class DomainTag(str, Enum):
    """Source domain of a document; every chunk carries exactly one."""

    CONSTITUTION = "constitution"
    ACTS = "acts"
    IPC = "ipc"
    CASES = "cases"


@dataclass(frozen=True)
class ChunkingConfig:
    chunk_size: int = 1000
    overlap_size: int = 200

    def __post_init__(self):
        if not (0 <= self.overlap_size < self.chunk_size):
            raise ValueError(
                f"overlap_size must satisfy 0 <= overlap < chunk_size, "
                f"got ({self.chunk_size}, {self.overlap_size})"
            )

    @property
    def stride(self) -> int:
        return self.chunk_size - self.overlap_size


@dataclass
class RawDocument:
    """A parsed source document prior to chunking."""

    doc_id: str
    domain: DomainTag
    title: str
    body: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class DocumentChunk:
    """A domain-tagged window of one segment of a document.

    ``char_start``/``char_end`` are offsets into the normalized text of
    the segment named by ``section_label``, so ``text`` always equals
    that segment's substring at the recorded span.
    """

    chunk_id: str
    doc_id: str
    domain: DomainTag
    seq: int
    text: str
    char_start: int
    char_end: int
    section_label: str | None = None


def make_chunk_id(doc_id: str, seq: int) -> str:
    """Chunk ids are a pure function of (doc_id, seq)."""
    return f"{doc_id}#{seq}"


def chunk_text(segment: str, cfg: ChunkingConfig) -> list[tuple[int, int]]:
    """Return [start, end) windows over ``segment``.

    Windows advance by ``cfg.stride``; the final window ends at the text
    length and may be shorter. A trailing window that would duplicate
    text fully covered by its predecessor is suppressed, so an
    exact-fit text yields no redundant tail. Empty text yields no
    windows (a chunk span must be non-empty).
    """
    n = len(segment)
    if n == 0:
        return []
    spans: list[tuple[int, int]] = []
    start = 0
    while True:
        end = min(start + cfg.chunk_size, n)
        spans.append((start, end))
        if end >= n:
            break
        start += cfg.stride
    return spans


def chunk_document_segments(
    doc: RawDocument,
    segments: list[tuple[str, str]],
    cfg: ChunkingConfig,
) -> list[DocumentChunk]:
    """Chunk each (label, text) segment of one document.

    Sequence numbers run across the whole document in segment order, so
    chunk ids stay unique per document.
    """
    chunks: list[DocumentChunk] = []
    seq = 0
    for label, text in segments:
        for start, end in chunk_text(text, cfg):
            chunks.append(
                DocumentChunk(
                    chunk_id=make_chunk_id(doc.doc_id, seq),
                    doc_id=doc.doc_id,
                    domain=doc.domain,
                    seq=seq,
                    text=text[start:end],
                    char_start=start,
                    char_end=end,
                    section_label=label,
                )
            )
            seq += 1
    return chunks
