"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str


class SuiteGenerateRequest(BaseModel):
    out_path: str
    seed: int = 0
    per_category: int = 1000
    write_prompt_files: bool = False


class SuiteGenerateResponse(BaseModel):
    suite_path: str
    ok: bool
    record_count: int
    category_counts: dict[str, int]


class SuiteValidateRequest(BaseModel):
    suite_path: str


class SuiteValidateResponse(BaseModel):
    ok: bool
    category_counts: dict[str, int]
    split_counts: dict[str, dict[str, int]]
    novelty_counts: dict[str, dict[str, int]]
    duplicate_texts: list[str]
    contrastive_orphans: list[str]
    structure_missing: int
    problems: list[str]


class EvaluateRequest(BaseModel):
    suite: str
    images: Optional[str] = None
    metrics: list[str] = Field(default_factory=lambda: ["b_vqa"])
    backend_mode: str = "fake"
    replay_cache: Optional[str] = None
    record_cache: Optional[str] = None
    out: str = "runs/run"
    seed: int = 0
    workers: int = 0
    categories: Optional[list[str]] = None
    split: Optional[str] = None
    limit_per_category: Optional[int] = None
    images_per_prompt: int = 10


class EvaluateResponse(BaseModel):
    out_dir: str
    score_store: str
    summary: dict[str, Any]


class CorrelateRequest(BaseModel):
    scores: str
    ratings: str
    include_incomplete: bool = False


class CorrelateResponse(BaseModel):
    rows: list[dict[str, Any]]
    skipped: list[dict[str, Any]]
    table: str


class GorsSelectRequest(BaseModel):
    suite: str
    out: str = "runs/gors"
    backend_mode: str = "fake"
    replay_cache: Optional[str] = None
    record_cache: Optional[str] = None
    seed: int = 0
    k_per_prompt: int = 10
    threshold: Optional[float] = None
    thresholds: Optional[dict[str, float]] = None
    ablation: str = "none"
    categories: Optional[list[str]] = None
    split: Optional[str] = None
    limit_per_category: Optional[int] = None


class GorsSelectResponse(BaseModel):
    out_dir: str
    sample_count: int
    selected_count: int
    thresholds: dict[str, float]
    failures: list[dict[str, str]]
    empty_selection: bool
    manifest_path: Optional[str] = None


class ReportRequest(BaseModel):
    fixture: Optional[str] = None  # path; None with no summaries = packaged fixture
    summaries: Optional[dict[str, str]] = None  # model name -> summary.json path


class ReportResponse(BaseModel):
    table: str
    rankings: dict[str, dict[str, str]]


class BatchCreateRequest(BaseModel):
    batch_id: str
    suite: str
    images: dict[str, str]  # model name -> image index path
    images_per_prompt: int = 2
    prompts_per_cell: int = 25
    seed: int = 0
    ratings_needed: int = 3
    categories: Optional[list[str]] = None


class BatchCreateResponse(BaseModel):
    batch_id: str
    task_count: int


class ProgressBody(BaseModel):
    done: int
    total: int


class TaskBody(BaseModel):
    task_id: str
    batch_id: str
    model: str
    prompt_id: str
    image_id: str
    category: str
    prompt_text: str
    image_url: str
    ratings_needed: int


class NextTaskResponse(BaseModel):
    task: Optional[TaskBody] = None
    done: bool = False
    progress: ProgressBody


class RatingSubmitRequest(BaseModel):
    task_id: str
    worker_id: str
    score: int


class RatingSubmitResponse(BaseModel):
    accepted: bool
    task_complete: bool
    progress: ProgressBody


class ExportEntry(BaseModel):
    task_id: str
    batch_id: str
    model: str
    prompt_id: str
    image_id: str
    category: str
    ratings: list[int]
    complete: bool
    human_score: Optional[float]


class ExportResponse(BaseModel):
    entries: list[ExportEntry]
