"""HTTP facade: asynchronous explanation jobs over the attribution pipeline.

Explanations of real boards take seconds to minutes at engine time limits, so
requests enqueue a job and clients poll ``/jobs/{id}`` for progress (completed
subset evaluations out of the total budget) until the explanation document is
ready. A single worker drains the queue in submission order; subset
evaluations inside one job still fan out across the engine pool.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from chesshap.attribution import (
    SamplingConfig,
    compare_explanations,
    explain,
)
from chesshap.engine import (
    DEFAULT_PERTURB_LIMIT_MS,
    DEFAULT_ROOT_LIMIT_MS,
    EngineRegistry,
    EvalLimit,
)
from chesshap.position import PositionError, non_king_indexing, parse_fen
from chesshap.render import to_document

DEFAULT_QUEUE_DEPTH = 64


@dataclass
class ServiceConfig:
    registry: EngineRegistry = field(default_factory=EngineRegistry)
    pool_size: Optional[int] = None
    queue_depth: int = DEFAULT_QUEUE_DEPTH
    static_dir: Optional[str] = None
    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def from_file(cls, path: str) -> "ServiceConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        registry = (
            EngineRegistry.from_file(doc["engine_registry"])
            if "engine_registry" in doc
            else EngineRegistry()
        )
        return cls(
            registry=registry,
            pool_size=doc.get("pool_size"),
            queue_depth=doc.get("queue_depth", DEFAULT_QUEUE_DEPTH),
            static_dir=doc.get("static_dir"),
            host=doc.get("host", "127.0.0.1"),
            port=doc.get("port", 8000),
        )


class ExplainRequest(BaseModel):
    fen: str
    evaluator_id: str = "material"
    root_limit: Optional[dict] = None
    perturb_limit: Optional[dict] = None
    max_evaluations: int = 10_000
    seed: Optional[int] = None
    exact_threshold: int = 14


class CompareRequest(BaseModel):
    fen: str
    evaluator_a: str = "material"
    evaluator_b: str = "material"
    root_limit: Optional[dict] = None
    perturb_limit: Optional[dict] = None
    max_evaluations: int = 10_000
    seed: Optional[int] = None
    exact_threshold: int = 14


@dataclass
class JobRecord:
    """One queued explanation or comparison; states only ever move forward."""

    id: str
    kind: str  # "explain" | "compare"
    params: dict
    state: str = "queued"  # queued -> running -> done | failed
    progress_done: int = 0
    progress_total: Optional[int] = None
    result: Optional[dict] = None
    error: Optional[str] = None

    def snapshot(self) -> dict:
        doc = {
            "id": self.id,
            "kind": self.kind,
            "state": self.state,
            "params": self.params,
            "progress": {"done": self.progress_done, "total": self.progress_total},
        }
        if self.state == "done":
            doc["result"] = self.result
        if self.state == "failed":
            doc["error"] = self.error
        return doc


class JobStore:
    def __init__(self) -> None:
        self._jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()

    def add(self, record: JobRecord) -> None:
        with self._lock:
            self._jobs[record.id] = record

    def get(self, job_id: str) -> Optional[JobRecord]:
        with self._lock:
            return self._jobs.get(job_id)

    def update(self, job_id: str, **changes) -> None:
        with self._lock:
            record = self._jobs[job_id]
            for key, value in changes.items():
                setattr(record, key, value)


class ExplanationService:
    """Job queue plus the evaluator plumbing behind the HTTP surface."""

    def __init__(self, config: Optional[ServiceConfig] = None):
        self.config = config or ServiceConfig()
        self.registry = self.config.registry
        self.store = JobStore()
        self._queue: "queue.Queue[Optional[str]]" = queue.Queue(
            maxsize=self.config.queue_depth
        )
        self._worker = threading.Thread(target=self._drain, daemon=True)
        self._worker.start()

    # -- submission ---------------------------------------------------------

    def submit_explain(self, request: ExplainRequest) -> JobRecord:
        self._validate_position(request.fen)
        self._validate_evaluators(request.evaluator_id)
        return self._enqueue("explain", request.model_dump())

    def submit_compare(self, request: CompareRequest) -> JobRecord:
        self._validate_position(request.fen)
        self._validate_evaluators(request.evaluator_a, request.evaluator_b)
        return self._enqueue("compare", request.model_dump())

    def _validate_position(self, fen: str) -> None:
        try:
            parse_fen(fen)
        except PositionError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    def _validate_evaluators(self, *ids: str) -> None:
        for evaluator_id in ids:
            if evaluator_id not in self.registry:
                raise HTTPException(
                    status_code=404, detail=f"unknown evaluator {evaluator_id!r}"
                )

    def _enqueue(self, kind: str, params: dict) -> JobRecord:
        record = JobRecord(id=uuid.uuid4().hex, kind=kind, params=params)
        try:
            self._queue.put_nowait(record.id)
        except queue.Full:
            raise HTTPException(status_code=429, detail="job queue is full") from None
        self.store.add(record)
        return record

    # -- worker ---------------------------------------------------------------

    def _drain(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            record = self.store.get(job_id)
            if record is None:
                continue
            try:
                self.store.update(job_id, state="running")
                result = self._execute(record)
                self.store.update(job_id, state="done", result=result)
            except Exception as exc:  # job failures land in the record
                self.store.update(job_id, state="failed", error=str(exc))

    def _execute(self, record: JobRecord) -> dict:
        params = record.params
        position = parse_fen(params["fen"])
        config = SamplingConfig(
            max_evaluations=params["max_evaluations"],
            seed=params["seed"],
            exact_threshold=params["exact_threshold"],
        )
        n = len(non_king_indexing(position))
        total = 2 ** n if n <= config.exact_threshold else config.max_evaluations
        self.store.update(record.id, progress_total=total)

        def on_progress(done: int) -> None:
            self.store.update(record.id, progress_done=done)

        if record.kind == "explain":
            explanation = self._run_one(
                params["evaluator_id"], position, params, config, on_progress
            )
            return to_document(explanation)

        a = self._run_one(params["evaluator_a"], position, params, config, on_progress)
        b = self._run_one(params["evaluator_b"], position, params, config, None)
        deltas = [
            {
                "square": row.piece.square_name,
                "piece": row.piece.kind_name,
                "color": row.piece.color_name,
                "phi_a": row.phi_a,
                "phi_b": row.phi_b,
                "delta": row.delta,
            }
            for row in compare_explanations(a, b)
        ]
        return {"a": to_document(a), "b": to_document(b), "deltas": deltas}

    def _run_one(self, evaluator_id, position, params, config, on_progress):
        descriptor = self.registry.descriptor(evaluator_id)
        root_limit = (
            EvalLimit.from_json(params["root_limit"])
            if params.get("root_limit")
            else descriptor.root_limit
        )
        perturb_limit = (
            EvalLimit.from_json(params["perturb_limit"])
            if params.get("perturb_limit")
            else descriptor.perturb_limit
        )
        evaluator = descriptor.create_pool(self.config.pool_size)
        try:
            return explain(
                position,
                evaluator,
                config=config,
                root_limit=root_limit,
                perturb_limit=perturb_limit,
                on_progress=on_progress,
            )
        finally:
            evaluator.close()

    def close(self) -> None:
        self._queue.put(None)
        self._worker.join(timeout=5)


def build_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    service = ExplanationService(config)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        service.close()

    app = FastAPI(title="chesshap", version="0.1.0", lifespan=lifespan)
    app.state.service = service

    @app.post("/explain", status_code=202)
    def post_explain(request: ExplainRequest):
        record = service.submit_explain(request)
        return {"job_id": record.id}

    @app.post("/compare", status_code=202)
    def post_compare(request: CompareRequest):
        record = service.submit_compare(request)
        return {"job_id": record.id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        record = service.store.get(job_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id!r}")
        return JSONResponse(record.snapshot())

    @app.get("/engines")
    def get_engines():
        return {
            "engines": [
                service.registry.descriptor(engine_id).to_json()
                for engine_id in service.registry.ids()
            ]
        }

    if service.config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=service.config.static_dir, html=True))

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(build_app(config), host=config.host, port=config.port, log_level="warning")
