"""Request/response models for the pipeline service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class SynthRequest(BaseModel):
    n_cases: int = Field(ge=1)
    seed: int = 0
    out_dir: str
    compliance_target: float = Field(default=0.70, ge=0.0, le=1.0)


class SynthResponse(BaseModel):
    snapshot_path: str
    law_path: str
    n_cases: int
    n_commits: int
    n_runs: int


class FetchRequest(BaseModel):
    owner: str
    repo: str
    out_path: str
    branch: str | None = None
    token: str | None = None
    fixture_dir: str | None = None
    filetype_workers: int = Field(default=4, ge=1, le=32)


class FetchResponse(BaseModel):
    snapshot_path: str
    pulls: int
    details: int
    commits: int
    runs: int


class TransformRequest(BaseModel):
    snapshot_path: str
    out_csv: str
    rejects_path: str | None = None


class TransformResponse(BaseModel):
    csv_path: str
    rejects_path: str
    events: int
    cases: int
    rejects: int
    unmatched_runs: int


class MineRequest(BaseModel):
    log_csv: str
    out_path: str
    snapshot_path: str | None = None
    format: str = "json"
    deploy_pattern: str = "(?i)deploy"
    window_start: int | None = None
    window_end: int | None = None
    plots_dir: str | None = None


class MineResponse(BaseModel):
    report_path: str
    format: str
    n_cases: int
    n_variants: int
    deploy_runs: int
    plots: list[str]


class FeaturizeRequest(BaseModel):
    log_csv: str
    snapshot_path: str
    out_dir: str
    seed: int = 0
    train_fraction: float = Field(default=0.70, gt=0.0, lt=1.0)
    val_fraction: float = Field(default=0.15, ge=0.0, lt=1.0)
    test_fraction: float = Field(default=0.15, ge=0.0, lt=1.0)
    samples_per_trace: int = Field(default=1, ge=1, le=16)


class FeaturizeResponse(BaseModel):
    dataset_dir: str
    files: list[str]
    samples: int
    skipped_short_traces: int
    split_rows: dict[str, int]
    max_len: int
    static_dim: int


class ReportRequest(BaseModel):
    report_json: str
    out_path: str
    format: str = "markdown"


class ReportResponse(BaseModel):
    report_path: str
    format: str


class ErrorDetail(BaseModel):
    code: str
    message: str
