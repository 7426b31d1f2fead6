"""HTTP service over shared read-only system state.

All endpoints speak JSON; error bodies carry a machine-readable code.
Evaluation runs as a single background job at a time; queries are
stateless and safe to issue concurrently.
"""

import threading
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import (
    AllSourcesFailed,
    EmptyQuery,
    LexHybridError,
    NodeNotFound,
    ProviderUnavailable,
)
from .evaluation import JudgeConfig, load_eval_items, run_benchmark
from .graph.model import NodeLabel
from .graph.store import Direction
from .orchestrator import AnswerMode, GroundedAnswer
from .system import LegalSearchSystem


class QueryRequest(BaseModel):
    question: str
    mode: str | None = None
    k: int | None = None


class EvalRequest(BaseModel):
    dataset_path: str
    modes: list[str] | None = None


def answer_to_dict(answer: GroundedAnswer) -> dict:
    routing = answer.evidence.routing
    return {
        "answer": answer.text,
        "mode": answer.mode.value,
        "citations": [
            {"kind": c.kind, "reference": c.reference, "snippet": c.snippet}
            for c in answer.citations
        ],
        "ungrounded": list(answer.ungrounded),
        "evidence": {
            "hits": [
                {
                    "chunk_id": h.chunk_id,
                    "collection": h.collection,
                    "score": h.score,
                    "text": h.text,
                    "doc_id": h.doc_id,
                    "section_label": h.section_label,
                }
                for h in answer.evidence.hits
            ],
            "graph_facts": [
                {"rendering": f.rendering, "node_keys": list(f.node_keys)}
                for f in answer.evidence.graph_facts
            ],
            "failures": list(answer.evidence.failures),
        },
        "routing": {
            "query_class": routing.query_class.value,
            "selected_collections": list(routing.selected_collections),
            "use_kg": routing.use_kg,
            "fusion_weights": dict(routing.fusion_weights),
            "kg_plan_size": len(routing.kg_query_plan),
            "anchors": [
                {"kind": a.kind.value, "key": a.key, "surface": a.surface}
                for a in routing.anchors
            ],
        },
        "timings": dict(answer.evidence.timings),
    }


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


class EvalJobRunner:
    """Single-job policy: one benchmark at a time, results kept by id."""

    def __init__(self):
        self._lock = threading.Lock()
        self._running = False
        self._jobs: dict[str, dict] = {}
        self._next_id = 1

    def start(self, target, *args) -> str | None:
        with self._lock:
            if self._running:
                return None
            self._running = True
            job_id = f"job-{self._next_id}"
            self._next_id += 1
            self._jobs[job_id] = {"status": "running", "summary": None}

        def run():
            try:
                summary = target(*args)
                self._jobs[job_id].update(status="done", summary=summary)
            except Exception as exc:  # noqa: BLE001 - reported via job status
                self._jobs[job_id].update(status="error", summary={"error": str(exc)})
            finally:
                with self._lock:
                    self._running = False

        threading.Thread(target=run, daemon=True).start()
        return job_id

    def get(self, job_id: str) -> dict | None:
        return self._jobs.get(job_id)


def create_app(system: LegalSearchSystem, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="lexhybrid")
    jobs = EvalJobRunner()

    @app.get("/health")
    def health():
        return {"components": system.readiness()}

    @app.post("/query")
    def query(request: QueryRequest):
        mode = request.mode or system.config.default_mode
        try:
            answer = system.answer_query(request.question, AnswerMode(mode), k=request.k)
        except EmptyQuery as exc:
            return _error(400, "empty_query", str(exc))
        except ValueError as exc:
            return _error(400, "bad_request", str(exc))
        except AllSourcesFailed as exc:
            return _error(503, "all_sources_failed", str(exc))
        except ProviderUnavailable as exc:
            return _error(503, "provider_unavailable", str(exc))
        return answer_to_dict(answer)

    @app.get("/graph/node/{label}/{key}")
    def graph_node(label: str, key: str):
        if system.graph is None:
            return _error(503, "graph_unavailable", "graph is not loaded")
        try:
            node_label = NodeLabel(label)
        except ValueError:
            return _error(404, "node_not_found", f"unknown label {label!r}")
        node = system.graph.get_node(node_label, key)
        if node is None:
            return _error(404, "node_not_found", f"{label}:{key}")
        neighbors = system.graph.neighbors((node_label, key), direction=Direction.BOTH)
        return {
            "node": {"label": node.label.value, "key": node.key, "properties": node.properties},
            "neighbors": [
                {
                    "edge_type": edge.type.value,
                    "direction": "out" if edge.from_ref == (node_label, key) else "in",
                    "label": other.label.value,
                    "key": other.key,
                    "properties": other.properties,
                }
                for edge, other in neighbors
            ],
        }

    @app.get("/graph/stats")
    def graph_stats():
        if system.graph is None:
            return _error(503, "graph_unavailable", "graph is not loaded")
        stats = system.graph.stats()
        return {
            "node_count": stats.node_count,
            "edge_count": stats.edge_count,
            "nodes_by_label": stats.nodes_by_label,
            "edges_by_type": stats.edges_by_type,
        }

    @app.post("/eval/run")
    def eval_run(request: EvalRequest):
        dataset = Path(request.dataset_path)
        if not dataset.exists():
            return _error(400, "bad_dataset", f"no such dataset: {dataset}")
        try:
            items = load_eval_items(dataset)
        except ValueError as exc:
            return _error(400, "bad_dataset", str(exc))
        modes = tuple(AnswerMode(m) for m in (request.modes or ["hybrid", "rag_only"]))

        def run():
            report = run_benchmark(
                system, items, modes, JudgeConfig(pass_threshold=system.config.pass_threshold)
            )
            return {
                "aggregates": {
                    mode: {
                        "mean_overall": agg.mean_overall,
                        "pass_rate": agg.pass_rate,
                    }
                    for mode, agg in report.aggregates.items()
                },
                "deltas": report.deltas,
                "rows": len(report.rows),
            }

        job_id = jobs.start(run)
        if job_id is None:
            return _error(409, "job_already_running", "an evaluation job is already running")
        return JSONResponse(status_code=202, content={"job_id": job_id, "status": "running"})

    @app.get("/eval/jobs/{job_id}")
    def eval_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return _error(404, "job_not_found", job_id)
        return job

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def serve(system: LegalSearchSystem, static_dir: str | Path | None = None) -> None:
    import uvicorn

    app = create_app(system, static_dir=static_dir)
    uvicorn.run(app, host=system.config.listen_host, port=system.config.listen_port, log_level="warning")
