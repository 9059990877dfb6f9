"""HTTP API backing the pipeline-builder UI.

Uploads are held in an in-memory store; runs and searches execute as
asynchronous jobs on a bounded FIFO worker pool and are observed by
polling. Job status only moves queued -> running -> succeeded | failed,
and results never mutate after a terminal status. With --persist, jobs
and datasets snapshot to JSON on shutdown and reload on startup.
"""

from __future__ import annotations

import json
import logging
import math
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Form, Request, Response, UploadFile
from fastapi.responses import JSONResponse

from . import errors
from .dataset import TimeSeriesDataset, generate_dataset
from .engine import execute_steps, last_scores, validate
from .evaluation import METRIC_NAMES, Holdout, KFold, combine_reports, evaluate_pipeline
from .pipeline import parse_pipeline, serialize_pipeline
from .registry import registry_list
from .search import default_space, parse_space, search

MAX_UPLOAD_BYTES = 50 * 1024 * 1024

log = logging.getLogger("tods.service")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Job:
    id: str
    kind: str  # run | search
    status: str = "queued"  # queued | running | succeeded | failed
    submitted_at: str = field(default_factory=_now)
    finished_at: str | None = None
    result: dict | None = None
    error: str | None = None

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "kind": self.kind,
            "status": self.status,
            "submitted_at": self.submitted_at,
            "finished_at": self.finished_at,
        }
        if self.result is not None:
            out["result"] = self.result
        if self.error is not None:
            out["error"] = self.error
        return out


class Store:
    """Datasets and jobs behind one lock; safe under concurrent requests."""

    def __init__(self):
        self._lock = threading.Lock()
        self._datasets: dict[str, TimeSeriesDataset] = {}
        self._jobs: dict[str, Job] = {}
        self._scores: dict[str, list] = {}  # job id -> per-point score curve

    def add_dataset(self, ds: TimeSeriesDataset) -> str:
        handle = str(uuid.uuid4())
        with self._lock:
            self._datasets[handle] = ds
        return handle

    def get_dataset(self, handle: str) -> TimeSeriesDataset | None:
        with self._lock:
            return self._datasets.get(handle)

    def new_job(self, kind: str) -> Job:
        job = Job(id=str(uuid.uuid4()), kind=kind)
        with self._lock:
            self._jobs[job.id] = job
        return job

    def get_job(self, job_id: str, kind: str | None = None) -> Job | None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or (kind is not None and job.kind != kind):
                return None
            return job

    def mark_running(self, job_id: str):
        with self._lock:
            self._jobs[job_id].status = "running"

    def finish(self, job_id: str, result: dict | None, error: str | None,
               scores: list | None = None):
        with self._lock:
            job = self._jobs[job_id]
            job.status = "failed" if error is not None else "succeeded"
            job.result = result
            job.error = error
            job.finished_at = _now()
            if scores is not None:
                self._scores[job_id] = scores

    def get_scores(self, job_id: str) -> list | None:
        with self._lock:
            return self._scores.get(job_id)

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "jobs": [j.to_json() for j in self._jobs.values()],
                "scores": dict(self._scores),
                "datasets": {
                    handle: {
                        "name": ds.name,
                        "timestamps": ds.timestamps.tolist(),
                        "features": {c: _jsonable(v) for c, v in ds.features.items()},
                        "labels": None if ds.labels is None else ds.labels.tolist(),
                    }
                    for handle, ds in self._datasets.items()
                },
            }

    def load_snapshot(self, doc: dict):
        with self._lock:
            for handle, raw in doc.get("datasets", {}).items():
                self._datasets[handle] = TimeSeriesDataset(
                    timestamps=np.array(raw["timestamps"], dtype=np.int64),
                    features={
                        c: np.array([math.nan if v is None else v for v in vals])
                        for c, vals in raw["features"].items()
                    },
                    labels=None if raw["labels"] is None else np.array(raw["labels"]),
                    name=raw["name"],
                )
            for raw in doc.get("jobs", []):
                job = Job(
                    id=raw["id"], kind=raw["kind"], status=raw["status"],
                    submitted_at=raw["submitted_at"], finished_at=raw.get("finished_at"),
                    result=raw.get("result"), error=raw.get("error"),
                )
                if job.status in ("queued", "running"):
                    # the computation did not survive the restart
                    job.status = "failed"
                    job.error = "server stopped before the job finished"
                    job.finished_at = job.finished_at or _now()
                self._jobs[job.id] = job
            self._scores.update(doc.get("scores", {}))


def _jsonable(vec: np.ndarray) -> list:
    return [None if math.isnan(v) else float(v) for v in vec.tolist()]


def _dataset_handle(handle: str, ds: TimeSeriesDataset) -> dict:
    return {
        "id": handle,
        "name": ds.name,
        "n": ds.n,
        "feature_names": ds.feature_names,
        "has_labels": ds.labels is not None,
    }


def _parse_scheme(raw) -> KFold | Holdout:
    if raw is None:
        return KFold(5)
    if not isinstance(raw, dict) or "kind" not in raw:
        raise errors.BadScheme("scheme must be {kind: kfold|holdout, ...}")
    if raw["kind"] == "kfold":
        return KFold(int(raw.get("k", 5)))
    if raw["kind"] == "holdout":
        return Holdout(float(raw.get("train_fraction", 0.8)))
    raise errors.BadScheme(f"unknown scheme kind {raw['kind']!r}")


def _diag(exc: Exception) -> str:
    name = exc.name if isinstance(exc, errors.TodsError) else type(exc).__name__
    return f"{name}: {exc}"


def create_app(
    workers: int | None = None,
    cors_origin: str | None = None,
    ui_dir: str | None = None,
    persist_dir: str | None = None,
    max_upload_bytes: int = MAX_UPLOAD_BYTES,
) -> FastAPI:
    store = Store()
    pool = ThreadPoolExecutor(max_workers=workers or os.cpu_count() or 2)
    snapshot_path = Path(persist_dir) / "tods_state.json" if persist_dir else None

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        if snapshot_path is not None:
            snapshot_path.parent.mkdir(parents=True, exist_ok=True)
            snapshot_path.write_text(json.dumps(store.snapshot()))
        pool.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="tods", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.store = store

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    if snapshot_path is not None and snapshot_path.exists():
        try:
            store.load_snapshot(json.loads(snapshot_path.read_text()))
            log.info("restored state from %s", snapshot_path)
        except (OSError, ValueError, KeyError) as exc:
            log.warning("could not restore %s: %s", snapshot_path, exc)

    def submit(job: Job, fn):
        def task():
            store.mark_running(job.id)
            try:
                result, scores = fn()
            except Exception as exc:
                store.finish(job.id, result=None, error=_diag(exc))
            else:
                store.finish(job.id, result=result, error=None, scores=scores)

        pool.submit(task)

    # --- registry -----------------------------------------------------------

    @app.get("/api/primitives")
    def primitives():
        grouped: dict[str, list] = {}
        for descriptor in registry_list():
            grouped.setdefault(descriptor.family.value, []).append(descriptor.to_json())
        return {"families": grouped}

    # --- datasets -----------------------------------------------------------

    @app.post("/api/datasets", status_code=201)
    async def upload_dataset(
        file: UploadFile,
        target_index: str | None = Form(default=None),
        timestamp_column: str | None = Form(default=None),
    ):
        # form fields arrive as strings; empty string means "not given"
        body = await file.read()
        if len(body) > max_upload_bytes:
            return JSONResponse(status_code=413, content={"error": "PayloadTooLarge"})
        try:
            target = int(target_index) if target_index not in (None, "") else None
            ts_col = int(timestamp_column) if timestamp_column not in (None, "") else None
        except ValueError:
            return JSONResponse(
                status_code=400,
                content={"error": "BadTargetIndex", "detail": "indices must be integers"})
        try:
            ds = generate_dataset(
                body.decode("utf-8", errors="replace"),
                target_index=target,
                timestamp_column=ts_col,
                name=file.filename or "upload",
            )
        except errors.TodsError as exc:
            return JSONResponse(status_code=400,
                                content={"error": exc.name, "detail": str(exc)})
        handle = store.add_dataset(ds)
        return _dataset_handle(handle, ds)

    # --- validation ---------------------------------------------------------

    @app.post("/api/pipelines/validate")
    async def validate_pipeline(request: Request):
        body = await request.body()
        try:
            json.loads(body)
        except ValueError:
            return JSONResponse(status_code=400, content={"error": "MalformedJson"})
        try:
            pipeline = parse_pipeline(body.decode("utf-8"))
        except errors.TodsError as exc:
            return {"diagnostics": [_diag(exc)]}
        return {"diagnostics": validate(pipeline)}

    # --- runs ---------------------------------------------------------------

    @app.post("/api/runs", status_code=202)
    async def submit_run(request: Request):
        try:
            doc = json.loads(await request.body())
        except ValueError:
            return JSONResponse(status_code=400, content={"error": "MalformedJson"})
        if not isinstance(doc, dict):
            return JSONResponse(status_code=400, content={"error": "MalformedJson"})
        ds = store.get_dataset(str(doc.get("dataset_id")))
        if ds is None:
            return JSONResponse(status_code=404, content={"error": "UnknownDataset"})
        try:
            pipeline = parse_pipeline(json.dumps(doc.get("pipeline")))
        except errors.TodsError as exc:
            return JSONResponse(status_code=422, content={"diagnostics": [_diag(exc)]})
        diagnostics = validate(pipeline)
        if diagnostics:
            return JSONResponse(status_code=422, content={"diagnostics": diagnostics})
        metric = doc.get("metric", "f1")
        if metric not in METRIC_NAMES:
            return JSONResponse(
                status_code=422,
                content={"diagnostics": [f"unknown metric {metric!r}"]})
        try:
            scheme = _parse_scheme(doc.get("scheme"))
        except errors.BadScheme as exc:
            return JSONResponse(status_code=422, content={"diagnostics": [_diag(exc)]})
        seed = int(doc.get("seed", 42))

        job = store.new_job("run")

        def work():
            reports, aggregate = evaluate_pipeline(
                ds, pipeline, primary_metric=metric, scheme=scheme, seed=seed)
            pooled = combine_reports(reports, primary_metric=metric)
            values, trace = execute_steps(pipeline, ds)
            curve = last_scores(values)
            result = {
                "steps": trace.to_json(),
                **pooled.to_json(),
                "aggregate": aggregate,
                "metric": metric,
                "folds": [r.to_json()["scores"] for r in reports],
            }
            return result, None if curve is None else _jsonable(curve)

        submit(job, work)
        return {"job_id": job.id}

    @app.get("/api/runs/{job_id}")
    def poll_run(job_id: str):
        job = store.get_job(job_id, kind="run")
        if job is None:
            return JSONResponse(status_code=404, content={"error": "UnknownJob"})
        return job.to_json()

    @app.get("/api/runs/{job_id}/scores")
    def run_scores(job_id: str):
        job = store.get_job(job_id, kind="run")
        if job is None:
            return JSONResponse(status_code=404, content={"error": "UnknownJob"})
        if job.status != "succeeded":
            return JSONResponse(status_code=409,
                                content={"error": "JobNotFinished", "status": job.status})
        scores = store.get_scores(job_id)
        return {"job_id": job_id, "scores": scores}

    # --- search -------------------------------------------------------------

    @app.post("/api/search", status_code=202)
    async def submit_search(request: Request):
        try:
            doc = json.loads(await request.body())
        except ValueError:
            return JSONResponse(status_code=400, content={"error": "MalformedJson"})
        if not isinstance(doc, dict):
            return JSONResponse(status_code=400, content={"error": "MalformedJson"})
        ds = store.get_dataset(str(doc.get("dataset_id")))
        if ds is None:
            return JSONResponse(status_code=404, content={"error": "UnknownDataset"})
        if ds.labels is None:
            return JSONResponse(status_code=422,
                                content={"diagnostics": ["NoLabels: dataset has no label column"]})
        budget = doc.get("budget", 20)
        if not isinstance(budget, int) or budget < 1:
            return JSONResponse(status_code=422, content={"error": "BudgetZero"})
        try:
            space = (default_space() if doc.get("space") is None
                     else parse_space(json.dumps(doc["space"])))
        except errors.TodsError as exc:
            return JSONResponse(status_code=422, content={"diagnostics": [_diag(exc)]})
        metric = doc.get("metric", "f1")
        if metric not in METRIC_NAMES:
            return JSONResponse(
                status_code=422,
                content={"diagnostics": [f"unknown metric {metric!r}"]})
        try:
            scheme = _parse_scheme(doc.get("scheme"))
        except errors.BadScheme as exc:
            return JSONResponse(status_code=422, content={"diagnostics": [_diag(exc)]})
        seed = int(doc.get("seed", 42))

        job = store.new_job("search")

        def work():
            outcome = search(ds, space, strategy="random", budget=budget,
                             seed=seed, scheme=scheme, primary_metric=metric)
            best_json = (serialize_pipeline(outcome.best.pipeline)
                         if outcome.best.status == "ok" else None)
            result = {
                "space_size": outcome.space_size,
                "evaluated": outcome.evaluated,
                "best": outcome.best.to_json(),
                "best_pipeline": None if best_json is None else json.loads(best_json),
                "leaderboard": [r.to_json() for r in outcome.leaderboard],
            }
            return result, None

        submit(job, work)
        return {"job_id": job.id}

    @app.get("/api/search/{job_id}")
    def poll_search(job_id: str):
        job = store.get_job(job_id, kind="search")
        if job is None:
            return JSONResponse(status_code=404, content={"error": "UnknownJob"})
        return job.to_json()

    # --- static UI ----------------------------------------------------------

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/")
        def index() -> Response:
            return JSONResponse({"service": "tods", "api": "/api"})

    return app
