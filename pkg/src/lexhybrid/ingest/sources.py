"""Parsers for the four source formats.

Acts and IPC data arrive as CSV; the constitution and each case are
plain-text files. Row-level problems raise RowError so callers can
collect them without losing the rest of the file.
"""

import csv
import io

from ..errors import RowError, SchemaError
from .chunking import DomainTag, RawDocument
from .normalize import normalize_text

ACTS_REQUIRED_COLUMNS = ("act_number", "enactment_year", "entity_name", "text")
IPC_REQUIRED_COLUMNS = ("section", "offense", "punishment")
IPC_OPTIONAL_COLUMNS = ("cognizable", "bailable", "court")


def parse_acts_csv(rows: list[dict[str, str]], source_id: str = "acts") -> list[RawDocument]:
    """One RawDocument per act row; raises SchemaError on a missing column."""
    if rows:
        for col in ACTS_REQUIRED_COLUMNS:
            if col not in rows[0]:
                raise SchemaError(col)
    docs = []
    for i, row in enumerate(rows):
        body = normalize_text(row.get("text", ""))
        if not body:
            raise RowError(i, "empty text")
        docs.append(
            RawDocument(
                doc_id=f"{source_id}:{i}",
                domain=DomainTag.ACTS,
                title=normalize_text(row.get("entity_name", "")) or f"Act {i}",
                body=body,
                metadata={
                    "act_number": row.get("act_number", "").strip(),
                    "enactment_year": row.get("enactment_year", "").strip(),
                    "entity_name": row.get("entity_name", "").strip(),
                },
            )
        )
    return docs


def serialize_ipc_record(record: dict[str, str], row_index: int = 0, source_id: str = "ipc") -> RawDocument:
    """Render one penal-code row into its templated text document.

    The body follows "Section {n}: {offense} — Punishment: {punishment}",
    with procedural classification appended when the row carries it.
    """
    section = record.get("section", "").strip()
    if not section:
        raise RowError(row_index, "empty section")
    offense = normalize_text(record.get("offense", ""))
    if not offense:
        raise RowError(row_index, "empty offense")
    punishment = normalize_text(record.get("punishment", ""))
    body = f"Section {section}: {offense} — Punishment: {punishment}"
    extras = []
    if record.get("cognizable", "").strip():
        extras.append(f"Cognizable: {normalize_text(record['cognizable'])}.")
    if record.get("bailable", "").strip():
        extras.append(f"Bailable: {normalize_text(record['bailable'])}.")
    if record.get("court", "").strip():
        extras.append(f"Court: {normalize_text(record['court'])}.")
    if extras:
        body = body.rstrip(".") + ". " + " ".join(extras)
    return RawDocument(
        doc_id=f"{source_id}:{section}",
        domain=DomainTag.IPC,
        title=f"Section {section}",
        body=body,
        metadata={
            "section": section,
            "offense": offense,
            "punishment": punishment,
            **{k: record[k].strip() for k in IPC_OPTIONAL_COLUMNS if record.get(k, "").strip()},
        },
    )


def parse_ipc_csv(rows: list[dict[str, str]], source_id: str = "ipc") -> tuple[list[RawDocument], list[RowError]]:
    """Serialize every IPC row, collecting row errors instead of aborting."""
    if rows:
        for col in IPC_REQUIRED_COLUMNS:
            if col not in rows[0]:
                raise SchemaError(col)
    docs: list[RawDocument] = []
    errors: list[RowError] = []
    seen: set[str] = set()
    for i, row in enumerate(rows):
        try:
            doc = serialize_ipc_record(row, row_index=i, source_id=source_id)
        except RowError as exc:
            errors.append(exc)
            continue
        section = doc.metadata["section"]
        if section in seen:
            errors.append(RowError(i, f"duplicate section {section}"))
            continue
        seen.add(section)
        docs.append(doc)
    return docs, errors


def read_csv_rows(text: str) -> list[dict[str, str]]:
    reader = csv.DictReader(io.StringIO(text))
    return [dict(row) for row in reader]


def parse_constitution_file(text: str, source_id: str) -> RawDocument:
    body = normalize_text(text)
    return RawDocument(
        doc_id=source_id,
        domain=DomainTag.CONSTITUTION,
        title="Constitution",
        body=body,
        metadata={},
    )


def parse_case_file(text: str, source_id: str) -> RawDocument:
    """One case document per file; its title is the first non-empty line."""
    title = ""
    for line in text.splitlines():
        if line.strip():
            title = normalize_text(line)
            break
    body = normalize_text(text)
    return RawDocument(
        doc_id=source_id,
        domain=DomainTag.CASES,
        title=title or source_id,
        body=body,
        metadata={"case_title": title} if title else {},
    )
