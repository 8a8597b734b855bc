"""The HTTP service: pipeline operations plus the annotation protocol.

Pipeline endpoints run synchronously and return the same summaries the core
functions produce. Annotation state lives in an event-log-backed store, so a
restarted server (or a fresh in-process client) resumes exactly where the
log left off.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Query, Request
from fastapi.responses import FileResponse, JSONResponse

from .. import __version__
from ..annotation import AnnotationError, AnnotationStore, create_batch
from ..gors import GorsError
from ..metrics import ImageIndex, MetricError
from ..pipeline import (
    ConfigError,
    GorsRunConfig,
    RunConfig,
    UnknownNameError,
    run_correlate,
    run_evaluate,
    run_gors_select,
)
from ..report import load_fixture, render_table, table_from_summaries
from ..stats import StatsError
from ..suite import SuiteError, build_suite, load_manifest, save_manifest, validate_suite
from ..suite.io import write_prompt_file
from ..backends.base import BackendError
from . import schemas

ANNOTATION_LOG_ENV_VAR = "COMPBENCH_ANNOTATION_LOG"

_ERROR_STATUS = {
    "config": 400,
    "unknown_name": 400,
    "suite": 400,
    "metric": 400,
    "stats": 400,
    "gors": 400,
    "backend": 409,
    "annotation": 409,
    "not_found": 404,
}


def _error(code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=_ERROR_STATUS.get(code, 400),
        content={"code": code, "message": message},
    )


def create_app(annotation_log: Optional[Union[str, Path]] = None) -> FastAPI:
    app = FastAPI(title="compbench", version=__version__)

    log_path = annotation_log or os.environ.get(ANNOTATION_LOG_ENV_VAR)
    app.state.annotation = AnnotationStore(log_path)

    @app.exception_handler(UnknownNameError)
    async def _unknown_name_error(request: Request, err: UnknownNameError):
        return _error("unknown_name", str(err))

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, err: ConfigError):
        return _error("config", str(err))

    @app.exception_handler(SuiteError)
    async def _suite_error(request: Request, err: SuiteError):
        return _error("suite", str(err))

    @app.exception_handler(MetricError)
    async def _metric_error(request: Request, err: MetricError):
        return _error("metric", str(err))

    @app.exception_handler(StatsError)
    async def _stats_error(request: Request, err: StatsError):
        return _error("stats", str(err))

    @app.exception_handler(GorsError)
    async def _gors_error(request: Request, err: GorsError):
        return _error("gors", str(err))

    @app.exception_handler(BackendError)
    async def _backend_error(request: Request, err: BackendError):
        return _error("backend", str(err))

    @app.exception_handler(AnnotationError)
    async def _annotation_error(request: Request, err: AnnotationError):
        return _error("annotation", str(err))

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(request: Request, err: FileNotFoundError):
        return _error("not_found", str(err))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    # -- suite ---------------------------------------------------------------

    @app.post("/suite/generate", response_model=schemas.SuiteGenerateResponse)
    def suite_generate(body: schemas.SuiteGenerateRequest):
        manifest = build_suite(seed=body.seed, per_category=body.per_category)
        out = Path(body.out_path)
        save_manifest(manifest, out)
        if body.write_prompt_files:
            by_cat_split: dict[tuple[str, str], list] = {}
            for record in manifest.records:
                by_cat_split.setdefault((record.category, record.split), []).append(record)
            for (category, split), records in sorted(by_cat_split.items()):
                write_prompt_file(records, out.parent / "prompts" / f"{category}_{split}.txt")
        report = validate_suite(manifest)
        return schemas.SuiteGenerateResponse(
            suite_path=str(out),
            ok=report.ok,
            record_count=len(manifest.records),
            category_counts=report.category_counts,
        )

    @app.post("/suite/validate", response_model=schemas.SuiteValidateResponse)
    def suite_validate(body: schemas.SuiteValidateRequest):
        manifest = load_manifest(body.suite_path)
        report = validate_suite(manifest)
        return schemas.SuiteValidateResponse(**report.to_dict())

    # -- evaluation ----------------------------------------------------------

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(body: schemas.EvaluateRequest):
        cfg = RunConfig(
            suite=body.suite,
            images=body.images,
            metrics=body.metrics,
            backend_mode=body.backend_mode,
            replay_cache=body.replay_cache,
            record_cache=body.record_cache,
            out=body.out,
            seed=body.seed,
            workers=body.workers,
            categories=body.categories,
            split=body.split,
            limit_per_category=body.limit_per_category,
            images_per_prompt=body.images_per_prompt,
        )
        return schemas.EvaluateResponse(**run_evaluate(cfg))

    @app.post("/correlate", response_model=schemas.CorrelateResponse)
    def correlate(body: schemas.CorrelateRequest):
        return schemas.CorrelateResponse(
            **run_correlate(body.scores, body.ratings, body.include_incomplete)
        )

    @app.post("/gors/select", response_model=schemas.GorsSelectResponse)
    def gors_select(body: schemas.GorsSelectRequest):
        cfg = GorsRunConfig(
            suite=body.suite,
            out=body.out,
            backend_mode=body.backend_mode,
            replay_cache=body.replay_cache,
            record_cache=body.record_cache,
            seed=body.seed,
            k_per_prompt=body.k_per_prompt,
            threshold=body.threshold,
            thresholds=body.thresholds,
            ablation=body.ablation,
            categories=body.categories,
            split=body.split,
            limit_per_category=body.limit_per_category,
        )
        return schemas.GorsSelectResponse(**run_gors_select(cfg))

    @app.post("/report", response_model=schemas.ReportResponse)
    def report(body: schemas.ReportRequest):
        import json as _json

        if body.summaries:
            summaries = {}
            for model, path in body.summaries.items():
                summaries[model] = _json.loads(Path(path).read_text(encoding="utf-8"))
            table = table_from_summaries(summaries)
        else:
            table = load_fixture(body.fixture)
        return schemas.ReportResponse(table=render_table(table), rankings=table.rankings())

    # -- annotation ----------------------------------------------------------

    def _progress(worker_id: str, batch_id: Optional[str]) -> schemas.ProgressBody:
        return schemas.ProgressBody(**app.state.annotation.worker_progress(worker_id, batch_id))

    @app.post("/batches", response_model=schemas.BatchCreateResponse)
    def create_annotation_batch(body: schemas.BatchCreateRequest):
        manifest = load_manifest(body.suite)
        indexes = {model: ImageIndex.load(path) for model, path in body.images.items()}
        tasks = create_batch(
            body.batch_id,
            manifest.records,
            indexes,
            images_per_prompt=body.images_per_prompt,
            prompts_per_cell=body.prompts_per_cell,
            seed=body.seed,
            ratings_needed=body.ratings_needed,
            categories=body.categories,
        )
        app.state.annotation.add_tasks(tasks)
        return schemas.BatchCreateResponse(batch_id=body.batch_id, task_count=len(tasks))

    @app.get("/tasks/next", response_model=schemas.NextTaskResponse)
    def next_task(worker: str = Query(...), batch: Optional[str] = Query(None)):
        task = app.state.annotation.next_task(worker, batch)
        progress = _progress(worker, batch)
        if task is None:
            return schemas.NextTaskResponse(task=None, done=True, progress=progress)
        return schemas.NextTaskResponse(
            task=schemas.TaskBody(
                task_id=task.task_id,
                batch_id=task.batch_id,
                model=task.model,
                prompt_id=task.prompt_id,
                image_id=task.image_id,
                category=task.category,
                prompt_text=task.prompt_text,
                image_url=f"/images/{task.image_id}",
                ratings_needed=task.ratings_needed,
            ),
            done=False,
            progress=progress,
        )

    @app.post("/ratings", response_model=schemas.RatingSubmitResponse)
    def submit_rating(body: schemas.RatingSubmitRequest):
        store: AnnotationStore = app.state.annotation
        if body.task_id not in store.tasks:
            return _error("not_found", f"unknown task: {body.task_id}")
        batch_id = store.tasks[body.task_id].batch_id
        store.submit_rating(body.task_id, body.worker_id, body.score)
        return schemas.RatingSubmitResponse(
            accepted=True,
            task_complete=store.is_complete(body.task_id),
            progress=_progress(body.worker_id, batch_id),
        )

    @app.get("/export", response_model=schemas.ExportResponse)
    def export(batch: Optional[str] = Query(None)):
        entries = app.state.annotation.export_ratings(batch)
        return schemas.ExportResponse(entries=[schemas.ExportEntry(**e) for e in entries])

    @app.get("/images/{image_id}")
    def serve_image(image_id: str):
        store: AnnotationStore = app.state.annotation
        for task in store.tasks.values():
            if task.image_id == image_id:
                path = Path(task.image_locator)
                if path.is_file():
                    return FileResponse(path)
                return _error("not_found", f"image file missing: {task.image_locator}")
        return _error("not_found", f"unknown image: {image_id}")

    return app
