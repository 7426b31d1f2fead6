"""Entity and relation extraction feeding the knowledge graph.

Two paths share one output schema: a deterministic rule-based extractor
(the offline default and test backbone) and an external-LLM path that
issues a summarization call followed by a structured extraction call.
Invalid extractor output is dropped with a warning rather than failing
the build.

Graph construction is global and order-independent: every document is
extracted first, then nodes are merged before edges in sorted order.
A cited case title that does not resolve to any corpus document's own
case node is stored as a Citation node (edges to it are dropped, since
citations are only legal between Case nodes).
"""

import json
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import LexHybridError, MalformedExtraction, SchemaViolation
from .graph.model import EdgeType, NodeLabel, article_key, canonical_key, case_key, ipc_key
from .graph.persist import edge_upsert_statement, node_upsert_statement
from .graph.store import GraphEdge, GraphNode, GraphStore
from .ingest.chunking import DomainTag, RawDocument
from .ingest.segment import segment_constitution

# Shared extraction patterns. Compiled case-insensitively; note the
# penal-code pattern requires the code name after the section number.
IPC_PATTERN = re.compile(
    r"\bSection\s+(\d+[A-Z]?)\s*(?:of\s+the\s+)?(?:IPC|Indian Penal Code)"
    r"|\bS\.\s*(\d+[A-Z]?)\s+IPC",
    re.IGNORECASE,
)
ARTICLE_PATTERN = re.compile(r"\bArticle\s+(\d+[A-Z]?)\b", re.IGNORECASE)
CASE_TITLE_PATTERN = re.compile(
    r"\b([A-Z][\w.'&\- ]+?)\s+v(?:s)?\.\s+([A-Z][\w.'&\- ]+?)\b", re.IGNORECASE
)
JUDGE_PATTERN = re.compile(r"\bJustice\s+([A-Z][a-zA-Z.\- ]+?)\b", re.IGNORECASE)

# Sentence boundaries skip the abbreviation periods common in legal
# text: "v.", "vs.", and single-letter initials.
SENTENCE_BOUNDARY = re.compile(
    r"(?<=[.!?])(?<!\bv\.)(?<!\bvs\.)(?<!\b[A-Z]\.)\s+"
)

EXTRACTION_PROMPT_VERSION = "v1"

SUMMARIZE_PROMPT_TEMPLATE = (
    "Summarize the following legal document in two sentences.\n\n{body}"
)

EXTRACTION_PROMPT_TEMPLATE = (
    "Extract legal entities and relations from the document below.\n"
    "Entity labels: Case, Court, Judge, IPCSection, Article, LegalAct, "
    "LegalPrinciple, Party, Offense, Punishment, Citation.\n"
    "Relation types: HEARD_IN (Case->Court), DECIDED_BY (Case->Judge), "
    "GOVERNED_BY (Case->IPCSection), REFERS_TO (Case->Article|LegalAct), "
    "CITES (Case->Case), APPLIES_TO (IPCSection->Offense|Punishment).\n"
    "Respond with JSON only: {{\"summary\": str, "
    "\"entities\": [{{\"label\": str, \"text\": str, \"key\": str}}], "
    "\"relations\": [{{\"type\": str, \"from_key\": str, \"from_label\": str, "
    "\"to_key\": str, \"to_label\": str}}]}}\n\n{body}"
)


class ExtractorMode(str, Enum):
    LLM = "llm"
    RULES = "rules"


@dataclass(frozen=True)
class ExtractorConfig:
    mode: ExtractorMode = ExtractorMode.RULES
    max_retries: int = 1
    generate: "callable | None" = None  # prompt -> text, required for llm mode

    def __post_init__(self):
        if self.mode is ExtractorMode.LLM and self.generate is None:
            raise ValueError("llm extraction requires a generate callable")


@dataclass(frozen=True)
class ExtractedEntity:
    label: NodeLabel
    text: str
    key: str


@dataclass(frozen=True)
class ExtractedRelation:
    type: EdgeType
    from_label: NodeLabel
    from_key: str
    to_label: NodeLabel
    to_key: str


@dataclass
class ExtractionResult:
    doc_id: str
    summary: str
    entities: list[ExtractedEntity] = field(default_factory=list)
    relations: list[ExtractedRelation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def summarize_leading_sentences(text: str, count: int = 2) -> str:
    sentences = [s for s in SENTENCE_BOUNDARY.split(text.strip()) if s]
    return " ".join(sentences[:count])


def entity_key_for(label: NodeLabel, raw: str) -> str:
    """Canonicalize an identity per its label's key scheme."""
    if label is NodeLabel.IPC_SECTION:
        m = re.search(r"(\d+[A-Za-z]?)", raw)
        return ipc_key(m.group(1)) if m else canonical_key(raw)
    if label is NodeLabel.ARTICLE:
        m = re.search(r"(\d+[A-Za-z]?)", raw)
        return article_key(m.group(1)) if m else canonical_key(raw)
    return canonical_key(raw)


def self_case_key(doc: RawDocument) -> str:
    key = case_key(doc.title)
    return key or canonical_key(doc.doc_id) or doc.doc_id


class _ResultBuilder:
    def __init__(self, doc_id: str, summary: str):
        self.result = ExtractionResult(doc_id=doc_id, summary=summary)
        self._entity_keys: set[tuple[NodeLabel, str]] = set()
        self._relation_ids: set[tuple] = set()

    def add_entity(self, label: NodeLabel, text: str, key: str) -> None:
        if not key or (label, key) in self._entity_keys:
            return
        self._entity_keys.add((label, key))
        self.result.entities.append(ExtractedEntity(label=label, text=text, key=key))

    def has_entity(self, label: NodeLabel, key: str) -> bool:
        return (label, key) in self._entity_keys

    def add_relation(self, rel: ExtractedRelation) -> None:
        identity = (rel.type, rel.from_label, rel.from_key, rel.to_label, rel.to_key)
        if identity in self._relation_ids:
            return
        if not self.has_entity(rel.from_label, rel.from_key) or not self.has_entity(
            rel.to_label, rel.to_key
        ):
            self.result.warnings.append(
                f"relation {rel.type.value} {rel.from_key}->{rel.to_key} "
                "references an absent entity; dropped"
            )
            return
        self._relation_ids.add(identity)
        self.result.relations.append(rel)


def extract_entities_rules(doc: RawDocument) -> ExtractionResult:
    """Deterministic pattern-based extraction for one case document."""
    own_key = self_case_key(doc)
    builder = _ResultBuilder(doc.doc_id, summarize_leading_sentences(doc.body))
    builder.add_entity(NodeLabel.CASE, doc.title or doc.doc_id, own_key)
    own = (NodeLabel.CASE, own_key)

    for m in IPC_PATTERN.finditer(doc.body):
        section = m.group(1) or m.group(2)
        key = ipc_key(section)
        builder.add_entity(NodeLabel.IPC_SECTION, m.group(0), key)
        builder.add_relation(
            ExtractedRelation(EdgeType.GOVERNED_BY, *own, NodeLabel.IPC_SECTION, key)
        )
    for m in ARTICLE_PATTERN.finditer(doc.body):
        key = article_key(m.group(1))
        builder.add_entity(NodeLabel.ARTICLE, m.group(0), key)
        builder.add_relation(
            ExtractedRelation(EdgeType.REFERS_TO, *own, NodeLabel.ARTICLE, key)
        )
    for m in CASE_TITLE_PATTERN.finditer(doc.body):
        title = f"{m.group(1)} v. {m.group(2)}"
        key = case_key(title)
        if key == own_key:
            continue
        builder.add_entity(NodeLabel.CASE, title, key)
        builder.add_relation(ExtractedRelation(EdgeType.CITES, *own, NodeLabel.CASE, key))
    for m in JUDGE_PATTERN.finditer(doc.body):
        key = canonical_key(m.group(1))
        builder.add_entity(NodeLabel.JUDGE, m.group(1), key)
        builder.add_relation(
            ExtractedRelation(EdgeType.DECIDED_BY, *own, NodeLabel.JUDGE, key)
        )
    return builder.result


def _parse_json_block(text: str) -> dict:
    start = text.find("{")
    end = text.rfind("}")
    if start == -1 or end <= start:
        raise ValueError("no JSON object in response")
    return json.loads(text[start: end + 1])


def extract_entities_llm(doc: RawDocument, cfg: ExtractorConfig) -> ExtractionResult:
    """Two-call extraction via the generation provider.

    Call one summarizes; call two returns structured entities and
    relations, validated and canonicalized before use. Unparseable
    output is retried up to cfg.max_retries, then raises.
    """
    if cfg.mode is not ExtractorMode.LLM:
        raise ValueError("extract_entities_llm requires llm mode")
    summary = cfg.generate(SUMMARIZE_PROMPT_TEMPLATE.format(body=doc.body)).strip()
    prompt = EXTRACTION_PROMPT_TEMPLATE.format(body=doc.body)
    payload = None
    last_error: Exception | None = None
    for _ in range(cfg.max_retries + 1):
        raw = cfg.generate(prompt)
        try:
            payload = _parse_json_block(raw)
            break
        except (ValueError, json.JSONDecodeError) as exc:
            last_error = exc
    if payload is None:
        raise MalformedExtraction(f"{doc.doc_id}: {last_error}")

    builder = _ResultBuilder(doc.doc_id, str(payload.get("summary") or summary))
    for raw_entity in payload.get("entities") or []:
        raw_label = str(raw_entity.get("label", ""))
        try:
            label = NodeLabel(raw_label)
        except ValueError:
            builder.result.warnings.append(f"unknown entity label {raw_label!r}; dropped")
            continue
        text = str(raw_entity.get("text", ""))
        key = entity_key_for(label, str(raw_entity.get("key") or text))
        if not key:
            builder.result.warnings.append(f"entity with empty key ({raw_label}); dropped")
            continue
        builder.add_entity(label, text, key)
    for raw_rel in payload.get("relations") or []:
        raw_type = str(raw_rel.get("type", ""))
        try:
            edge_type = EdgeType(raw_type)
            from_label = NodeLabel(str(raw_rel.get("from_label", "")))
            to_label = NodeLabel(str(raw_rel.get("to_label", "")))
        except ValueError:
            builder.result.warnings.append(f"unknown relation shape {raw_rel!r}; dropped")
            continue
        builder.add_relation(
            ExtractedRelation(
                edge_type,
                from_label,
                entity_key_for(from_label, str(raw_rel.get("from_key", ""))),
                to_label,
                entity_key_for(to_label, str(raw_rel.get("to_key", ""))),
            )
        )
    return builder.result


def extract_structured(doc: RawDocument) -> ExtractionResult:
    """Deterministic extraction for the structured (non-case) sources."""
    builder = _ResultBuilder(doc.doc_id, summarize_leading_sentences(doc.body))
    if doc.domain is DomainTag.IPC:
        section_key = ipc_key(doc.metadata["section"])
        builder.add_entity(NodeLabel.IPC_SECTION, doc.title, section_key)
        offense = doc.metadata.get("offense", "")
        if offense:
            key = canonical_key(offense)
            builder.add_entity(NodeLabel.OFFENSE, offense, key)
            builder.add_relation(
                ExtractedRelation(
                    EdgeType.APPLIES_TO, NodeLabel.IPC_SECTION, section_key,
                    NodeLabel.OFFENSE, key,
                )
            )
        punishment = doc.metadata.get("punishment", "")
        if punishment:
            key = canonical_key(punishment)
            builder.add_entity(NodeLabel.PUNISHMENT, punishment, key)
            builder.add_relation(
                ExtractedRelation(
                    EdgeType.APPLIES_TO, NodeLabel.IPC_SECTION, section_key,
                    NodeLabel.PUNISHMENT, key,
                )
            )
    elif doc.domain is DomainTag.ACTS:
        name = doc.metadata.get("entity_name") or doc.title
        builder.add_entity(NodeLabel.LEGAL_ACT, name, canonical_key(name))
    elif doc.domain is DomainTag.CONSTITUTION:
        for label, _text in segment_constitution(doc.body):
            m = ARTICLE_PATTERN.search(label)
            if m:
                builder.add_entity(NodeLabel.ARTICLE, label, article_key(m.group(1)))
    return builder.result


def extract_document(doc: RawDocument, cfg: ExtractorConfig) -> ExtractionResult:
    if doc.domain is DomainTag.CASES:
        if cfg.mode is ExtractorMode.LLM:
            return extract_entities_llm(doc, cfg)
        return extract_entities_rules(doc)
    return extract_structured(doc)


@dataclass
class BuildReport:
    per_doc: dict[str, dict[str, int]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def build_graph_from_corpus(
    docs: list[RawDocument],
    cfg: ExtractorConfig | None = None,
    store: GraphStore | None = None,
) -> tuple[GraphStore, BuildReport]:
    """Extract every document, then merge nodes before edges.

    Rerunning the build over the same corpus leaves the graph stats
    unchanged. One bad document never aborts the build.
    """
    cfg = cfg or ExtractorConfig()
    store = store or GraphStore()
    report = BuildReport()
    ordered = sorted(docs, key=lambda d: d.doc_id)
    self_keys = {
        self_case_key(doc) for doc in ordered if doc.domain is DomainTag.CASES
    }
    extractions: list[ExtractionResult] = []
    for doc in ordered:
        try:
            result = extract_document(doc, cfg)
        except LexHybridError as exc:
            report.errors.append(f"{doc.doc_id}: {exc}")
            continue
        extractions.append(result)
        report.per_doc[result.doc_id] = {
            "entities": len(result.entities),
            "relations": len(result.relations),
        }
        report.warnings.extend(f"{result.doc_id}: {w}" for w in result.warnings)

    # Cited cases that are not corpus documents become Citation nodes.
    demoted: set[str] = set()
    for result in extractions:
        for entity in sorted(result.entities, key=lambda e: (e.label.value, e.key)):
            if entity.label is NodeLabel.CASE and entity.key not in self_keys:
                store.merge_node(
                    NodeLabel.CITATION, entity.key, {"raw": entity.text}
                )
                demoted.add(entity.key)
                report.warnings.append(
                    f"{result.doc_id}: unresolved case citation {entity.key!r} "
                    "stored as Citation node"
                )
                continue
            properties = {"title": entity.text} if entity.text else {}
            store.merge_node(entity.label, entity.key, properties)
    for result in extractions:
        for rel in sorted(
            result.relations,
            key=lambda r: (r.type.value, r.from_key, r.to_label.value, r.to_key),
        ):
            if rel.type is EdgeType.CITES and rel.to_key in demoted:
                report.warnings.append(
                    f"{result.doc_id}: CITES to unresolved citation {rel.to_key!r}; dropped"
                )
                continue
            if (rel.from_label is NodeLabel.CASE and rel.from_key in demoted) or not (
                store.has_node(rel.from_label, rel.from_key)
                and store.has_node(rel.to_label, rel.to_key)
            ):
                report.warnings.append(
                    f"{result.doc_id}: relation {rel.type.value} "
                    f"{rel.from_key}->{rel.to_key} has no surviving endpoints; dropped"
                )
                continue
            try:
                store.merge_edge(
                    rel.type,
                    (rel.from_label, rel.from_key),
                    (rel.to_label, rel.to_key),
                    {"source": result.doc_id},
                )
            except SchemaViolation as exc:
                report.warnings.append(f"{result.doc_id}: {exc}; dropped")
    return store, report


def emit_upsert_statements(result: ExtractionResult) -> list[str]:
    """Textual upsert statements for one extraction, nodes before edges."""
    statements = []
    for entity in sorted(result.entities, key=lambda e: (e.label.value, e.key)):
        node = GraphNode(label=entity.label, key=entity.key, properties={})
        statements.append(node_upsert_statement(node))
    for rel in sorted(
        result.relations,
        key=lambda r: (r.type.value, r.from_key, r.to_label.value, r.to_key),
    ):
        edge = GraphEdge(
            type=rel.type,
            from_ref=(rel.from_label, rel.from_key),
            to_ref=(rel.to_label, rel.to_key),
        )
        statements.append(edge_upsert_statement(edge))
    return statements
