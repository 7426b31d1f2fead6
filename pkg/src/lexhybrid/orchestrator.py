"""Query orchestration: classify, route, gather evidence, build the
grounded prompt, generate, and bind citations.

Classification is a deterministic keyword/pattern cascade; the
knowledge graph participates only in hybrid mode, either for
multi-domain questions or when a relational trigger phrase appears
alongside an extractable anchor. The default generator is extractive:
it re-reads the rendered prompt and returns the evidence sentences that
carry the question's anchors, which keeps the full pipeline
deterministic and offline.
"""

import math
import re
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    AllSourcesFailed,
    ContextOverflow,
    EmptyQuery,
    LexHybridError,
)
from .extraction import (
    ARTICLE_PATTERN,
    CASE_TITLE_PATTERN,
    IPC_PATTERN,
    JUDGE_PATTERN,
    SENTENCE_BOUNDARY,
)
from .graph.model import NodeLabel, EdgeType, article_key, canonical_key, case_key, ipc_key
from .graph.store import Direction, GraphStore
from .index.hnsw import ScoredHit, VectorCollection
from .providers import CONTEXT_BUDGET_TOKENS

# Collection names; constitution and acts share one collection.
STATUTES_COLLECTION = "statutes"
IPC_COLLECTION = "ipc"
CASES_COLLECTION = "cases"
ALL_COLLECTIONS = (CASES_COLLECTION, IPC_COLLECTION, STATUTES_COLLECTION)

DOMAIN_TO_COLLECTION = {
    "constitution": STATUTES_COLLECTION,
    "acts": STATUTES_COLLECTION,
    "ipc": IPC_COLLECTION,
    "cases": CASES_COLLECTION,
}

# Query-side complement: questions often write "IPC Section 302", which
# the shared extraction pattern (code name after the number) misses.
IPC_QUERY_PATTERN = re.compile(r"\bIPC\s+Section\s+(\d+[A-Z]?)\b", re.IGNORECASE)

GROUNDING_PROMPT_HEADER = (
    "Base your answer strictly on the provided legal documents and cite "
    "Articles, Acts, or Sections where possible."
)
PROMPT_TEMPLATE_VERSION = "v1"
NO_EVIDENCE_BLOCK = "No evidence was retrieved for this question."
NO_ANSWER_TEXT = "No grounded answer is available for this question."

TOKEN_SAFETY_FACTOR = 1.3

_KG_TRIGGERS = ("cite", "cites", "decided by", "judge", "cases involving", "heard in")
_IPC_KEYWORDS = ("IPC", "penal code", "punishment", "offence", "offense")
_STATUTE_KEYWORDS = ("constitution", "fundamental right", "act of")
_CASE_KEYWORDS = ("case", "judgment", "precedent", "held")

def _phrase_pattern(phrases) -> re.Pattern:
    alternatives = "|".join(re.escape(p) for p in phrases)
    return re.compile(rf"\b(?:{alternatives})\b", re.IGNORECASE)

_IPC_KEYWORD_RE = _phrase_pattern(_IPC_KEYWORDS)
_STATUTE_KEYWORD_RE = _phrase_pattern(_STATUTE_KEYWORDS)
_CASE_KEYWORD_RE = _phrase_pattern(_CASE_KEYWORDS)
_KG_TRIGGER_RE = _phrase_pattern(_KG_TRIGGERS)


class QueryClass(str, Enum):
    STATUTES = "statutes"
    IPC = "ipc"
    CASE_LAW = "case_law"
    MULTI_DOMAIN = "multi_domain"


class AnswerMode(str, Enum):
    HYBRID = "hybrid"
    RAG_ONLY = "rag_only"


class AnchorKind(str, Enum):
    ARTICLE = "article"
    IPC_SECTION = "ipc_section"
    CASE = "case"
    JUDGE = "judge"


@dataclass(frozen=True)
class Anchor:
    """A legal identity mentioned in a question or answer."""

    kind: AnchorKind
    key: str
    surface: str

    def matches(self, text: str) -> bool:
        """Loose sentence-level matcher used by the extractive stub."""
        low = text.lower()
        if self.kind is AnchorKind.ARTICLE:
            number = self.key.split(":", 1)[1].lower()
            return re.search(rf"\barticle\s+{re.escape(number)}\b", low) is not None
        if self.kind is AnchorKind.IPC_SECTION:
            number = self.key.split(":", 1)[1].lower()
            return re.search(rf"\bsection\s+{re.escape(number)}\b", low) is not None
        if self.kind is AnchorKind.JUDGE:
            return re.search(rf"\b{re.escape(self.key)}\b", low) is not None
        return re.sub(r"\s+", " ", self.surface.lower()) in re.sub(r"\s+", " ", low)


def extract_anchors(text: str) -> list[Anchor]:
    """All legal anchors in ``text``, deduplicated, in a fixed kind order."""
    anchors: list[Anchor] = []
    seen: set[tuple[AnchorKind, str]] = set()

    def add(kind: AnchorKind, key: str, surface: str) -> None:
        if key and (kind, key) not in seen:
            seen.add((kind, key))
            anchors.append(Anchor(kind=kind, key=key, surface=surface))

    for m in ARTICLE_PATTERN.finditer(text):
        add(AnchorKind.ARTICLE, article_key(m.group(1)), m.group(0))
    for m in IPC_PATTERN.finditer(text):
        add(AnchorKind.IPC_SECTION, ipc_key(m.group(1) or m.group(2)), m.group(0))
    for m in IPC_QUERY_PATTERN.finditer(text):
        add(AnchorKind.IPC_SECTION, ipc_key(m.group(1)), m.group(0))
    for m in CASE_TITLE_PATTERN.finditer(text):
        title = f"{m.group(1)} v. {m.group(2)}"
        add(AnchorKind.CASE, case_key(title), title)
    for m in JUDGE_PATTERN.finditer(text):
        add(AnchorKind.JUDGE, canonical_key(m.group(1)), m.group(0))
    return anchors


def classify_query(question: str) -> QueryClass:
    """Deterministic rule cascade over three signal groups.

    Two or more firing groups mean multi-domain; none firing defaults to
    case law, the broadest corpus.
    """
    if not question or not question.strip():
        raise EmptyQuery("question is empty")
    ipc_fires = bool(IPC_PATTERN.search(question)) or bool(_IPC_KEYWORD_RE.search(question))
    statutes_fires = bool(ARTICLE_PATTERN.search(question)) or bool(
        _STATUTE_KEYWORD_RE.search(question)
    )
    case_fires = bool(CASE_TITLE_PATTERN.search(question)) or bool(
        _CASE_KEYWORD_RE.search(question)
    )
    fired = [
        cls
        for cls, fires in (
            (QueryClass.IPC, ipc_fires),
            (QueryClass.STATUTES, statutes_fires),
            (QueryClass.CASE_LAW, case_fires),
        )
        if fires
    ]
    if len(fired) >= 2:
        return QueryClass.MULTI_DOMAIN
    if len(fired) == 1:
        return fired[0]
    return QueryClass.CASE_LAW


@dataclass(frozen=True)
class ConjunctiveStep:
    target_label: NodeLabel
    constraints: tuple  # of (EdgeType, Direction, (NodeLabel, key))


@dataclass(frozen=True)
class PathStep:
    from_ref: tuple
    to_ref: tuple
    edge_types: frozenset
    max_hops: int = 4


@dataclass
class RoutingDecision:
    query_class: QueryClass
    selected_collections: list[str]
    use_kg: bool
    kg_query_plan: list
    fusion_weights: dict[str, float]
    anchors: list[Anchor] = field(default_factory=list)


_ANCHOR_CONSTRAINT = {
    AnchorKind.ARTICLE: (EdgeType.REFERS_TO, NodeLabel.ARTICLE),
    AnchorKind.IPC_SECTION: (EdgeType.GOVERNED_BY, NodeLabel.IPC_SECTION),
    AnchorKind.JUDGE: (EdgeType.DECIDED_BY, NodeLabel.JUDGE),
    AnchorKind.CASE: (EdgeType.CITES, NodeLabel.CASE),
}


def build_kg_plan(anchors: list[Anchor]) -> list:
    """Graph query plan from question anchors.

    Two or more case anchors read as a citation-chain question and plan
    a path search between the first two; every other anchor becomes one
    constraint of a single conjunctive query over cases.
    """
    plan: list = []
    case_anchors = [a for a in anchors if a.kind is AnchorKind.CASE]
    constraint_anchors = anchors if len(case_anchors) < 2 else [
        a for a in anchors if a.kind is not AnchorKind.CASE
    ]
    constraints = tuple(
        (
            _ANCHOR_CONSTRAINT[a.kind][0],
            Direction.OUT,
            (_ANCHOR_CONSTRAINT[a.kind][1], a.key),
        )
        for a in constraint_anchors
    )
    if constraints:
        plan.append(ConjunctiveStep(target_label=NodeLabel.CASE, constraints=constraints))
    if len(case_anchors) >= 2:
        plan.append(
            PathStep(
                from_ref=(NodeLabel.CASE, case_anchors[0].key),
                to_ref=(NodeLabel.CASE, case_anchors[1].key),
                edge_types=frozenset({EdgeType.CITES}),
            )
        )
    return plan


def route(
    query_class: QueryClass,
    question: str,
    mode: AnswerMode,
    fusion_weights: dict[str, float] | None = None,
) -> RoutingDecision:
    """Pick collections, decide graph participation, and plan KG queries."""
    if query_class is QueryClass.STATUTES:
        selected = [STATUTES_COLLECTION]
    elif query_class is QueryClass.IPC:
        selected = [IPC_COLLECTION]
    elif query_class is QueryClass.CASE_LAW:
        selected = [CASES_COLLECTION]
    else:
        selected = list(ALL_COLLECTIONS)
    anchors = extract_anchors(question)
    triggered = bool(_KG_TRIGGER_RE.search(question)) and bool(anchors)
    use_kg = mode is AnswerMode.HYBRID and (
        query_class is QueryClass.MULTI_DOMAIN or triggered
    )
    plan = build_kg_plan(anchors) if use_kg else []
    weights = {name: 1.0 for name in selected}
    if fusion_weights:
        for name in selected:
            if name in fusion_weights:
                weights[name] = float(fusion_weights[name])
    return RoutingDecision(
        query_class=query_class,
        selected_collections=selected,
        use_kg=use_kg and bool(plan),
        kg_query_plan=plan,
        fusion_weights=weights,
        anchors=anchors,
    )


@dataclass(frozen=True)
class EvidenceHit:
    chunk_id: str
    collection: str
    score: float
    text: str
    doc_id: str
    section_label: str | None


@dataclass(frozen=True)
class GraphFact:
    rendering: str
    node_keys: tuple


@dataclass
class EvidenceBundle:
    hits: list[EvidenceHit] = field(default_factory=list)
    graph_facts: list[GraphFact] = field(default_factory=list)
    routing: RoutingDecision | None = None
    timings: dict[str, float] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.hits and not self.graph_facts


def _anchor_phrase(label: NodeLabel, key: str, store: GraphStore) -> str:
    if label is NodeLabel.ARTICLE:
        return f"Article {key.split(':', 1)[1]}"
    if label is NodeLabel.IPC_SECTION:
        return f"Section {key.split(':', 1)[1]} IPC"
    node = store.get_node(label, key)
    title = (node.properties.get("title") if node else None) or key
    if label is NodeLabel.JUDGE:
        return f"Justice {title}"
    # Case titles are quoted: the quote keeps the greedy title pattern
    # from absorbing surrounding words when answers are re-scanned.
    return f'"{title}"'


_CONSTRAINT_VERB = {
    EdgeType.REFERS_TO: "refer to",
    EdgeType.GOVERNED_BY: "are governed by",
    EdgeType.DECIDED_BY: "were decided by",
    EdgeType.CITES: "cite",
    EdgeType.HEARD_IN: "were heard in",
    EdgeType.APPLIES_TO: "apply to",
}


def _node_title(store: GraphStore, label: NodeLabel, key: str) -> str:
    node = store.get_node(label, key)
    return (node.properties.get("title") if node else None) or key


def render_conjunctive_fact(step: ConjunctiveStep, results, store: GraphStore) -> GraphFact:
    parts = [
        f"{_CONSTRAINT_VERB[edge_type]} {_anchor_phrase(anchor[0], anchor[1], store)}"
        for edge_type, _direction, anchor in step.constraints
    ]
    description = " and ".join(parts)
    if results:
        names = "; ".join(
            f'"{_node_title(store, step.target_label, n.key)}"' for n in results
        )
    else:
        names = "none found"
    return GraphFact(
        rendering=f"Cases that {description}: {names}.",
        node_keys=tuple(n.key for n in results),
    )


def render_path_fact(step: PathStep, path, store: GraphStore) -> GraphFact:
    start = _node_title(store, *step.from_ref)
    end = _node_title(store, *step.to_ref)
    if path is None:
        return GraphFact(
            rendering=(
                f'No citation path within {step.max_hops} hops links '
                f'"{start}" to "{end}".'
            ),
            node_keys=(),
        )
    names = [f'"{start}"'] + [
        f'"{_node_title(store, node.label, node.key)}"' for _, node in path
    ]
    return GraphFact(
        rendering="Citation path: " + " -> ".join(names) + ".",
        node_keys=tuple(node.key for _, node in path),
    )


def execute_kg_plan(plan: list, store: GraphStore) -> list[GraphFact]:
    facts = []
    for step in plan:
        if isinstance(step, ConjunctiveStep):
            results = store.conjunctive_query(step.target_label, list(step.constraints))
            facts.append(render_conjunctive_fact(step, results, store))
        else:
            path = store.path_exists(
                step.from_ref, step.to_ref, set(step.edge_types), step.max_hops
            )
            facts.append(render_path_fact(step, path, store))
    return facts


def fuse_pools(
    pools: list[tuple[str, float, list[ScoredHit]]], k: int
) -> list[tuple[str, float, ScoredHit]]:
    """Order (collection, fused score, hit) triples like hybrid_search."""
    fused = [
        (name, weight * hit.score, hit)
        for name, weight, hits in pools
        for hit in hits
    ]
    fused.sort(key=lambda item: (-item[1], item[0], item[2].chunk_id))
    return fused[:k]


def gather_evidence(
    decision: RoutingDecision,
    question: str,
    embed,
    collections: dict[str, VectorCollection],
    store: GraphStore | None,
    k: int = 5,
) -> EvidenceBundle:
    """Run every selected source, degrading gracefully per source.

    The question is embedded once; each collection contributes a pool of
    k candidates fused by weighted cosine, and the KG plan contributes
    rendered facts. Only when every selected source fails does the
    gather itself fail.
    """
    bundle = EvidenceBundle(routing=decision)
    query_vector = np.asarray(embed(question), dtype=float)
    attempted = 0
    failed = 0
    pools: list[tuple[str, float, list[ScoredHit]]] = []
    for name in decision.selected_collections:
        attempted += 1
        started = time.perf_counter()
        try:
            col = collections[name]
            pools.append((name, decision.fusion_weights[name], col.search_top_k(query_vector, k)))
        except (LexHybridError, KeyError) as exc:
            failed += 1
            bundle.failures.append(f"{name}: {exc}")
        finally:
            bundle.timings[name] = time.perf_counter() - started
    for name, fused_score, hit in fuse_pools(pools, k):
        payload = collections[name].payload(hit.chunk_id) or {}
        bundle.hits.append(
            EvidenceHit(
                chunk_id=hit.chunk_id,
                collection=name,
                score=fused_score,
                text=payload.get("text", ""),
                doc_id=payload.get("doc_id", ""),
                section_label=payload.get("section_label"),
            )
        )
    if decision.use_kg and decision.kg_query_plan:
        attempted += 1
        started = time.perf_counter()
        try:
            if store is None:
                raise LexHybridError("graph store not loaded")
            bundle.graph_facts = execute_kg_plan(decision.kg_query_plan, store)
        except LexHybridError as exc:
            failed += 1
            bundle.failures.append(f"kg: {exc}")
        finally:
            bundle.timings["kg"] = time.perf_counter() - started
    if attempted and failed == attempted:
        raise AllSourcesFailed("; ".join(bundle.failures))
    return bundle


def count_tokens(text: str) -> int:
    """Whitespace tokens times a fixed 1.3 safety factor, rounded up."""
    return math.ceil(len(text.split()) * TOKEN_SAFETY_FACTOR)


def _hit_block(index: int, hit: EvidenceHit) -> str:
    label = hit.section_label or "Body"
    return f"[{index}] ({hit.collection} | {hit.chunk_id} | {label}) {hit.text}"


def build_prompt(
    bundle: EvidenceBundle,
    question: str,
    budget_tokens: int = CONTEXT_BUDGET_TOKENS,
) -> str:
    """Render the fixed grounding template within the token budget.

    Lowest-scored hits are dropped first when over budget; graph facts
    are retained preferentially.
    """
    hits = list(bundle.hits)
    facts = list(bundle.graph_facts)

    def render(current_hits, current_facts) -> str:
        lines = [GROUNDING_PROMPT_HEADER, "", "Evidence:"]
        if current_hits:
            lines.extend(_hit_block(i + 1, h) for i, h in enumerate(current_hits))
        else:
            lines.append(NO_EVIDENCE_BLOCK)
        lines.append("")
        lines.append("Graph facts:")
        if current_facts:
            lines.extend(f"- {fact.rendering}" for fact in current_facts)
        else:
            lines.append("- none")
        lines.extend(["", f"Question: {question}", "Answer:"])
        return "\n".join(lines)

    prompt = render(hits, facts)
    while count_tokens(prompt) > budget_tokens and hits:
        hits.pop()  # hits are sorted by fused score, so the tail is lowest
        prompt = render(hits, facts)
    while count_tokens(prompt) > budget_tokens and facts:
        facts.pop()
        prompt = render(hits, facts)
    return prompt


_BLOCK_RE = re.compile(r"^\[(\d+)\] \(([^|]+) \| ([^|]+) \| ([^)]*)\) (.*)$")


def parse_prompt_blocks(prompt: str) -> tuple[list[tuple[str, str]], list[str], str]:
    """Recover (label, text) evidence blocks, fact lines, and the question.

    The extractive stub works from the rendered prompt alone, so it sees
    exactly what a hosted model would see.
    """
    blocks: list[tuple[str, str]] = []
    facts: list[str] = []
    question = ""
    in_facts = False
    for line in prompt.splitlines():
        m = _BLOCK_RE.match(line)
        if m:
            blocks.append((m.group(4).strip(), m.group(5)))
            continue
        if line.startswith("Graph facts:"):
            in_facts = True
            continue
        if in_facts and line.startswith("- ") and line != "- none":
            facts.append(line[2:])
            continue
        if line.startswith("Question: "):
            question = line[len("Question: "):]
            in_facts = False
    return blocks, facts, question


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in SENTENCE_BOUNDARY.split(text.strip()) if s.strip()]


def extractive_answer(prompt: str) -> str:
    """Deterministic stand-in for the hosted generator.

    Selects, in evidence order, the sentences that carry the question's
    anchors; a block whose source label matches an anchor contributes
    its leading sentences when none of its own sentences match. Falls
    back to the top block's opening sentences when the question has no
    anchors.
    """
    blocks, fact_lines, question = parse_prompt_blocks(prompt)
    ordered: list[tuple[str, str]] = blocks + [("graph", line) for line in fact_lines]
    if not ordered:
        return NO_ANSWER_TEXT
    anchors = extract_anchors(question)
    selected: list[str] = []
    if anchors:
        for label, text in ordered:
            sentences = split_sentences(text)
            matched = [s for s in sentences if any(a.matches(s) for a in anchors)]
            if not matched and any(a.matches(label) for a in anchors):
                matched = sentences[:2]
            selected.extend(matched)
    if not selected:
        selected = split_sentences(ordered[0][1])[:2]
    if not selected:
        return NO_ANSWER_TEXT
    # Newline joins keep the greedy title pattern from absorbing text
    # across sentence boundaries when the answer is re-scanned.
    return "\n".join(selected)


class ExtractiveStubGenerator:
    """Default offline generator; a pure function of the prompt."""

    def generate(self, prompt: str) -> str:
        return extractive_answer(prompt)


def generate_answer(
    prompt: str,
    generator=None,
    budget_tokens: int = CONTEXT_BUDGET_TOKENS,
) -> str:
    """Invoke the generator after enforcing the context budget."""
    if count_tokens(prompt) > budget_tokens:
        raise ContextOverflow(
            f"prompt is {count_tokens(prompt)} tokens; budget is {budget_tokens}"
        )
    if generator is None:
        generator = ExtractiveStubGenerator()
    return generator.generate(prompt)


@dataclass(frozen=True)
class Citation:
    kind: str  # article | act | ipc_section | case
    reference: str
    snippet: str


_ANCHOR_CITATION_KIND = {
    AnchorKind.ARTICLE: "article",
    AnchorKind.IPC_SECTION: "ipc_section",
    AnchorKind.CASE: "case",
}


def _evidence_anchor_index(bundle: EvidenceBundle) -> dict[tuple[AnchorKind, str], str]:
    """Map every anchor appearing in evidence to its first source id."""
    index: dict[tuple[AnchorKind, str], str] = {}
    for hit in bundle.hits:
        for anchor in extract_anchors(f"{hit.section_label or ''}. {hit.text}"):
            index.setdefault((anchor.kind, anchor.key), hit.chunk_id)
    for fact in bundle.graph_facts:
        for anchor in extract_anchors(fact.rendering):
            index.setdefault((anchor.kind, anchor.key), "graph")
        for key in fact.node_keys:
            index.setdefault((AnchorKind.CASE, key), key)
    return index


def extract_citations(
    answer: str, bundle: EvidenceBundle
) -> tuple[list[Citation], list[str]]:
    """Bind answer mentions to evidence; unmatched mentions are flagged.

    Returns (citations, ungrounded references).
    """
    evidence_index = _evidence_anchor_index(bundle)
    citations: list[Citation] = []
    ungrounded: list[str] = []
    for anchor in extract_anchors(answer):
        kind = _ANCHOR_CITATION_KIND.get(anchor.kind)
        if kind is None:
            continue
        source = evidence_index.get((anchor.kind, anchor.key))
        if source is None:
            ungrounded.append(anchor.key)
        else:
            citations.append(Citation(kind=kind, reference=anchor.key, snippet=source))
    return citations, ungrounded


@dataclass
class GroundedAnswer:
    text: str
    citations: list[Citation]
    ungrounded: list[str]
    evidence: EvidenceBundle
    mode: AnswerMode
    prompt: str = ""
