"""Evaluation harness: retrieval and generation metrics, the
four-dimension judge, the two-configuration benchmark, and the
graph competency suite.

The default judge is a deterministic stub with fixed, documented
formulas (each dimension scaled to 0..10):

  correctness     10 x unique-token overlap of answer vs ground truth
  completeness    10 x coverage of the ground truth's key phrases
                  (its legal anchors; content tokens when it has none)
  relevance       10 x coverage of the tokens shared by question and
                  ground truth (vacuously 10 when they share none)
  legal_reasoning 10 x ROUGE-L F measure vs ground truth

The stub exists so the benchmark runs offline and orders answers
sensibly; it does not imitate any hosted judge.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .embedding import cosine_similarity, tokenize
from .errors import (
    EmptyRetrieval,
    MalformedJudgment,
    NoGroundTruth,
)
from .orchestrator import AnswerMode, GroundedAnswer, extract_anchors
from .graph.model import EdgeType, NodeLabel
from .graph.store import Direction, GraphStore

JUDGE_PROMPT_VERSION = "v1"
JUDGE_PROMPT_TEMPLATE = (
    "You are an impartial legal evaluator. Score the candidate answer "
    "against the ground truth on four dimensions, each an integer or "
    "decimal from 0 to 10: Correctness (factual agreement with the "
    "ground truth), Completeness (coverage of every point in the ground "
    "truth), Relevance (focus on what the question asks), and Legal "
    "Reasoning Quality (soundness of the legal reasoning).\n"
    "Respond with JSON only: {{\"correctness\": n, \"completeness\": n, "
    "\"relevance\": n, \"legal_reasoning\": n}}\n\n"
    "Question: {question}\n"
    "Ground truth: {ground_truth}\n"
    "Candidate answer: {answer}\n"
)

DEFAULT_PASS_THRESHOLD = 5.0
DEFAULT_SIMILARITY_THRESHOLD = 0.7


# -- sequence metrics -----------------------------------------------------------


def lcs_length(a, b) -> int:
    """Longest common subsequence length via the standard DP."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


@dataclass(frozen=True)
class GenerationMetrics:
    rouge_l_f: float
    rouge_l_precision: float
    rouge_l_recall: float
    token_overlap: float
    lcs_len: int


def rouge_l(candidate: str, reference: str) -> GenerationMetrics:
    """ROUGE-L over lowercase alphanumeric tokens.

    Both empty scores F=1 by convention; exactly one empty scores 0.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        return GenerationMetrics(1.0, 1.0, 1.0, token_overlap(candidate, reference), 0)
    if not cand or not ref:
        return GenerationMetrics(0.0, 0.0, 0.0, token_overlap(candidate, reference), 0)
    lcs = lcs_length(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    f_measure = (
        2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    )
    return GenerationMetrics(
        rouge_l_f=f_measure,
        rouge_l_precision=precision,
        rouge_l_recall=recall,
        token_overlap=token_overlap(candidate, reference),
        lcs_len=lcs,
    )


def token_overlap(candidate: str, reference: str) -> float:
    """|unique(candidate) intersect unique(reference)| / |unique(reference)|."""
    ref = set(tokenize(reference))
    cand = set(tokenize(candidate))
    if not ref:
        return 1.0 if not cand else 0.0
    return len(cand & ref) / len(ref)


# -- retrieval metrics ----------------------------------------------------------


@dataclass(frozen=True)
class RetrievalMetrics:
    precision_at_k: float
    recall_at_k: float
    f1_at_k: float
    k: int
    threshold: float


def _harmonic(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def retrieval_metrics(
    retrieved_texts: list[str],
    gt_contexts: list[str],
    k: int,
    embed,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> RetrievalMetrics:
    """Embedding-thresholded precision/recall over the first k chunks.

    Precision keeps k in the denominator even when fewer chunks came
    back; a context counts as covered when some retrieved chunk matches
    it at or above the threshold.
    """
    if not gt_contexts:
        raise NoGroundTruth("retrieval metrics need at least one ground-truth context")
    if k < 1:
        raise ValueError("k must be >= 1")
    top = retrieved_texts[:k]
    chunk_vectors = [embed(text) for text in top]
    context_vectors = [embed(ctx) for ctx in gt_contexts]
    relevant = 0
    covered = [False] * len(gt_contexts)
    for vec in chunk_vectors:
        best = 0.0
        for i, ctx_vec in enumerate(context_vectors):
            score = cosine_similarity(vec, ctx_vec)
            if score >= threshold:
                covered[i] = True
            best = max(best, score)
        if best >= threshold:
            relevant += 1
    precision = relevant / k
    recall = sum(covered) / len(gt_contexts)
    return RetrievalMetrics(
        precision_at_k=precision,
        recall_at_k=recall,
        f1_at_k=_harmonic(precision, recall),
        k=k,
        threshold=threshold,
    )


def coherence_diversity(retrieved_texts: list[str], embed) -> tuple[float, float]:
    """Mean pairwise cosine (coherence) and its complement (diversity).

    A single chunk is perfectly coherent by definition.
    """
    if not retrieved_texts:
        raise EmptyRetrieval("coherence requires at least one retrieved chunk")
    if len(retrieved_texts) == 1:
        return 1.0, 0.0
    vectors = [embed(text) for text in retrieved_texts]
    total = 0.0
    pairs = 0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            total += cosine_similarity(vectors[i], vectors[j])
            pairs += 1
    coherence = total / pairs
    return coherence, 1.0 - coherence


# -- judge ----------------------------------------------------------------------


class JudgeVerdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"


@dataclass(frozen=True)
class JudgeScore:
    correctness: float
    completeness: float
    relevance: float
    legal_reasoning: float
    overall: float
    verdict: JudgeVerdict

    def to_dict(self) -> dict:
        return {
            "correctness": self.correctness,
            "completeness": self.completeness,
            "relevance": self.relevance,
            "legal_reasoning": self.legal_reasoning,
            "overall": self.overall,
            "verdict": self.verdict.value,
        }


def score_from_dimensions(
    correctness: float,
    completeness: float,
    relevance: float,
    legal_reasoning: float,
    pass_threshold: float = DEFAULT_PASS_THRESHOLD,
) -> JudgeScore:
    """Overall is the arithmetic mean; the verdict is threshold-based."""
    dims = (correctness, completeness, relevance, legal_reasoning)
    for value in dims:
        if not (0.0 <= value <= 10.0):
            raise ValueError(f"dimension out of range: {value}")
    overall = sum(dims) / 4.0
    verdict = JudgeVerdict.PASS if overall >= pass_threshold else JudgeVerdict.FAIL
    return JudgeScore(*dims, overall=overall, verdict=verdict)


class JudgeMode(str, Enum):
    STUB = "stub"
    LLM = "llm"


@dataclass(frozen=True)
class JudgeConfig:
    mode: JudgeMode = JudgeMode.STUB
    pass_threshold: float = DEFAULT_PASS_THRESHOLD
    max_retries: int = 1
    generate: "callable | None" = None  # prompt -> text, required for llm

    def __post_init__(self):
        if self.mode is JudgeMode.LLM and self.generate is None:
            raise ValueError("llm judge requires a generate callable")


def _key_phrase_coverage(answer: str, ground_truth: str) -> float:
    anchors = extract_anchors(ground_truth)
    if anchors:
        covered = sum(1 for a in anchors if a.matches(answer))
        return covered / len(anchors)
    answer_tokens = set(tokenize(answer))
    content = [t for t in set(tokenize(ground_truth)) if len(t) > 3]
    if not content:
        return 1.0
    return sum(1 for t in content if t in answer_tokens) / len(content)


def _question_anchored_coverage(answer: str, question: str, ground_truth: str) -> float:
    shared = set(tokenize(question)) & set(tokenize(ground_truth))
    if not shared:
        return 1.0
    answer_tokens = set(tokenize(answer))
    return len(shared & answer_tokens) / len(shared)


def stub_judge_scores(question: str, ground_truth: str, answer: str) -> tuple[float, float, float, float]:
    correctness = 10.0 * token_overlap(answer, ground_truth)
    completeness = 10.0 * _key_phrase_coverage(answer, ground_truth)
    relevance = 10.0 * _question_anchored_coverage(answer, question, ground_truth)
    legal_reasoning = 10.0 * rouge_l(answer, ground_truth).rouge_l_f
    return correctness, completeness, relevance, legal_reasoning


def _parse_judge_json(text: str) -> tuple[float, float, float, float]:
    start = text.find("{")
    end = text.rfind("}")
    if start == -1 or end <= start:
        raise ValueError("no JSON object in judgment")
    payload = json.loads(text[start: end + 1])
    dims = []
    for name in ("correctness", "completeness", "relevance", "legal_reasoning"):
        value = float(payload[name])
        if math.isnan(value) or not (0.0 <= value <= 10.0):
            raise ValueError(f"{name} out of range: {value}")
        dims.append(value)
    return tuple(dims)


def judge_answer(
    question: str,
    ground_truth: str,
    answer: str,
    cfg: JudgeConfig | None = None,
) -> JudgeScore:
    cfg = cfg or JudgeConfig()
    if cfg.mode is JudgeMode.STUB:
        dims = stub_judge_scores(question, ground_truth, answer)
        return score_from_dimensions(*dims, pass_threshold=cfg.pass_threshold)
    prompt = JUDGE_PROMPT_TEMPLATE.format(
        question=question, ground_truth=ground_truth, answer=answer
    )
    last_error: Exception | None = None
    for _ in range(cfg.max_retries + 1):
        raw = cfg.generate(prompt)
        try:
            dims = _parse_judge_json(raw)
            return score_from_dimensions(*dims, pass_threshold=cfg.pass_threshold)
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            last_error = exc
    raise MalformedJudgment(str(last_error))


# -- benchmark ------------------------------------------------------------------


class EvalDomain(str, Enum):
    CONSTITUTIONAL = "constitutional"
    CRIMINAL_IPC = "criminal_ipc"
    CASE_CITATION = "case_citation"
    STATUTORY_INTERPRETATION = "statutory_interpretation"
    MULTI_HOP = "multi_hop"


class ExpectedSource(str, Enum):
    RAG = "rag"
    KG = "kg"
    BOTH = "both"


@dataclass(frozen=True)
class EvalItem:
    id: str
    question: str
    ground_truth_answer: str
    ground_truth_contexts: tuple
    expected_source: ExpectedSource
    domain: EvalDomain

    def __post_init__(self):
        if not self.ground_truth_answer:
            raise ValueError(f"item {self.id}: empty ground-truth answer")
        if not self.ground_truth_contexts:
            raise ValueError(f"item {self.id}: needs at least one context")


def load_eval_items(path: str | Path) -> list[EvalItem]:
    items = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            items.append(
                EvalItem(
                    id=str(raw["id"]),
                    question=raw["question"],
                    ground_truth_answer=raw["ground_truth_answer"],
                    ground_truth_contexts=tuple(raw["ground_truth_contexts"]),
                    expected_source=ExpectedSource(raw["expected_source"]),
                    domain=EvalDomain(raw["domain"]),
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"{path}:{line_no}: bad eval item: {exc}") from exc
    return items


@dataclass
class ItemResult:
    item_id: str
    mode: str
    expected_source: str
    domain: str
    answer_text: str
    retrieval: RetrievalMetrics | None
    generation: GenerationMetrics | None
    judge: JudgeScore
    graph_fact_count: int
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "mode": self.mode,
            "expected_source": self.expected_source,
            "domain": self.domain,
            "answer_text": self.answer_text,
            "retrieval": None
            if self.retrieval is None
            else {
                "precision_at_k": self.retrieval.precision_at_k,
                "recall_at_k": self.retrieval.recall_at_k,
                "f1_at_k": self.retrieval.f1_at_k,
                "k": self.retrieval.k,
                "threshold": self.retrieval.threshold,
            },
            "generation": None
            if self.generation is None
            else {
                "rouge_l_f": self.generation.rouge_l_f,
                "token_overlap": self.generation.token_overlap,
                "lcs_len": self.generation.lcs_len,
            },
            "judge": self.judge.to_dict(),
            "graph_fact_count": self.graph_fact_count,
            "error": self.error,
        }


@dataclass
class ModeAggregate:
    mode: str
    items: int
    mean_overall: float
    pass_rate: float
    mean_correctness: float
    mean_completeness: float
    mean_relevance: float
    mean_legal_reasoning: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


@dataclass
class BenchmarkReport:
    rows: list[ItemResult] = field(default_factory=list)
    aggregates: dict[str, ModeAggregate] = field(default_factory=dict)
    deltas: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "aggregates": {mode: agg.to_dict() for mode, agg in sorted(self.aggregates.items())},
            "deltas": dict(sorted(self.deltas.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def compute_aggregates(rows: list[ItemResult]) -> dict[str, ModeAggregate]:
    by_mode: dict[str, list[ItemResult]] = {}
    for row in rows:
        by_mode.setdefault(row.mode, []).append(row)
    aggregates = {}
    for mode, mode_rows in by_mode.items():
        n = len(mode_rows)
        aggregates[mode] = ModeAggregate(
            mode=mode,
            items=n,
            mean_overall=sum(r.judge.overall for r in mode_rows) / n if n else 0.0,
            pass_rate=sum(1 for r in mode_rows if r.judge.verdict is JudgeVerdict.PASS) / n
            if n
            else 0.0,
            mean_correctness=sum(r.judge.correctness for r in mode_rows) / n if n else 0.0,
            mean_completeness=sum(r.judge.completeness for r in mode_rows) / n if n else 0.0,
            mean_relevance=sum(r.judge.relevance for r in mode_rows) / n if n else 0.0,
            mean_legal_reasoning=sum(r.judge.legal_reasoning for r in mode_rows) / n
            if n
            else 0.0,
        )
    return aggregates


FAILED_SCORE = JudgeScore(
    correctness=0.0,
    completeness=0.0,
    relevance=0.0,
    legal_reasoning=0.0,
    overall=0.0,
    verdict=JudgeVerdict.FAIL,
)


def run_benchmark(
    system,
    items: list[EvalItem],
    modes: tuple = (AnswerMode.HYBRID, AnswerMode.RAG_ONLY),
    judge_cfg: JudgeConfig | None = None,
    k: int | None = None,
) -> BenchmarkReport:
    """Answer every item under every mode and score the results.

    Failures become FAIL rows with the error recorded; the run never
    aborts. Rows are sorted by (item id, mode) and timings are excluded
    so reports are byte-identical across runs.
    """
    judge_cfg = judge_cfg or JudgeConfig()
    report = BenchmarkReport()
    k = k or getattr(system.config, "k", 5)
    for item in sorted(items, key=lambda i: i.id):
        for mode in sorted(modes, key=lambda m: AnswerMode(m).value):
            mode = AnswerMode(mode)
            try:
                answer: GroundedAnswer = system.answer_query(item.question, mode, k=k)
                retrieved = [hit.text for hit in answer.evidence.hits]
                retrieval = (
                    retrieval_metrics(
                        retrieved, list(item.ground_truth_contexts), k,
                        system.embedder.embed_text,
                    )
                    if retrieved
                    else RetrievalMetrics(0.0, 0.0, 0.0, k, DEFAULT_SIMILARITY_THRESHOLD)
                )
                generation = rouge_l(answer.text, item.ground_truth_answer)
                judge = judge_answer(
                    item.question, item.ground_truth_answer, answer.text, judge_cfg
                )
                report.rows.append(
                    ItemResult(
                        item_id=item.id,
                        mode=mode.value,
                        expected_source=item.expected_source.value,
                        domain=item.domain.value,
                        answer_text=answer.text,
                        retrieval=retrieval,
                        generation=generation,
                        judge=judge,
                        graph_fact_count=len(answer.evidence.graph_facts),
                    )
                )
            except Exception as exc:  # noqa: BLE001 - row-level isolation
                report.rows.append(
                    ItemResult(
                        item_id=item.id,
                        mode=mode.value,
                        expected_source=item.expected_source.value,
                        domain=item.domain.value,
                        answer_text="",
                        retrieval=None,
                        generation=None,
                        judge=FAILED_SCORE,
                        graph_fact_count=0,
                        error=str(exc),
                    )
                )
    report.aggregates = compute_aggregates(report.rows)
    modes_present = sorted(report.aggregates)
    if AnswerMode.HYBRID.value in report.aggregates and AnswerMode.RAG_ONLY.value in report.aggregates:
        hybrid = report.aggregates[AnswerMode.HYBRID.value]
        rag = report.aggregates[AnswerMode.RAG_ONLY.value]
        report.deltas = {
            "mean_overall": hybrid.mean_overall - rag.mean_overall,
            "pass_rate": hybrid.pass_rate - rag.pass_rate,
            "mean_correctness": hybrid.mean_correctness - rag.mean_correctness,
            "mean_completeness": hybrid.mean_completeness - rag.mean_completeness,
            "mean_relevance": hybrid.mean_relevance - rag.mean_relevance,
            "mean_legal_reasoning": hybrid.mean_legal_reasoning - rag.mean_legal_reasoning,
        }
    del modes_present
    return report


def render_comparison_table(report: BenchmarkReport) -> str:
    """Human-readable two-configuration comparison."""
    lines = []
    header = f"{'configuration':<12} {'overall':>8} {'pass rate':>10} {'correct':>8} {'complete':>9} {'relevant':>9} {'reasoning':>10}"
    lines.append(header)
    lines.append("-" * len(header))
    for mode in sorted(report.aggregates):
        agg = report.aggregates[mode]
        lines.append(
            f"{mode:<12} {agg.mean_overall:>8.2f} {agg.pass_rate:>10.2%} "
            f"{agg.mean_correctness:>8.2f} {agg.mean_completeness:>9.2f} "
            f"{agg.mean_relevance:>9.2f} {agg.mean_legal_reasoning:>10.2f}"
        )
    if report.deltas:
        lines.append("")
        lines.append(
            "hybrid - rag_only: overall {mean_overall:+.2f}, pass rate {pass_rate:+.2%}".format(
                **report.deltas
            )
        )
    return "\n".join(lines)


# -- graph competency -----------------------------------------------------------


@dataclass
class CompetencyResult:
    name: str
    passed: bool
    expected: list
    actual: list

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def run_competency_suite(store: GraphStore, suite_path: str | Path) -> list[CompetencyResult]:
    """Run curated relational queries and compare exact result sets."""
    suite = json.loads(Path(suite_path).read_text(encoding="utf-8"))
    results = []
    for query in suite:
        if query["kind"] == "conjunctive":
            constraints = [
                (
                    EdgeType(c["edge_type"]),
                    Direction(c["direction"]),
                    (NodeLabel(c["anchor_label"]), c["anchor_key"]),
                )
                for c in query["constraints"]
            ]
            nodes = store.conjunctive_query(NodeLabel(query["target_label"]), constraints)
            actual = [n.key for n in nodes]
            expected = list(query["expected_keys"])
        else:
            path = store.path_exists(
                (NodeLabel(query["from_label"]), query["from_key"]),
                (NodeLabel(query["to_label"]), query["to_key"]),
                {EdgeType(t) for t in query["edge_types"]},
                query["max_hops"],
            )
            actual = [None if path is None else len(path)]
            expected = [query["expected_hops"]]
        results.append(
            CompetencyResult(
                name=query["name"],
                passed=actual == expected,
                expected=expected,
                actual=actual,
            )
        )
    return results
