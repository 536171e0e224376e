"""FastAPI service wrapping the pipeline stages.

One endpoint per stage; request bodies name input/output paths on the
service host. Stage errors surface as structured {code, message} details so
thin clients can print a single machine-parseable line.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException

from .. import __version__, pipeline
from ..features import SplitFractions
from ..ingestion import CredentialError, IngestionError, NotFoundError, RateLimitError
from ..ingestion.store import SnapshotFormatError
from . import schemas

TOKEN_ENV_VAR = "CODESIGHT_GITHUB_TOKEN"


def _error_code(exc: Exception) -> str:
    if isinstance(exc, RateLimitError):
        return "rate_limited"
    if isinstance(exc, CredentialError):
        return "credentials"
    if isinstance(exc, NotFoundError):
        return "not_found"
    if isinstance(exc, pipeline.StageInputError):
        return "missing_input"
    if isinstance(exc, SnapshotFormatError):
        return "bad_snapshot"
    if isinstance(exc, IngestionError):
        return "ingestion"
    return "invalid"


def _http_error(exc: Exception) -> HTTPException:
    status = 400
    if isinstance(exc, pipeline.StageInputError):
        status = 404
    elif isinstance(exc, RateLimitError):
        status = 429
    elif isinstance(exc, CredentialError):
        status = 401
    elif isinstance(exc, NotFoundError):
        status = 404
    return HTTPException(
        status_code=status,
        detail={"code": _error_code(exc), "message": str(exc)},
    )


def create_app() -> FastAPI:
    app = FastAPI(title="codesight", version=__version__)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/synth", response_model=schemas.SynthResponse)
    def synth_stage(req: schemas.SynthRequest) -> schemas.SynthResponse:
        try:
            result = pipeline.run_synth(
                n_cases=req.n_cases,
                seed=req.seed,
                out_dir=req.out_dir,
                compliance_target=req.compliance_target,
            )
        except (ValueError, OSError) as exc:
            raise _http_error(exc) from exc
        return schemas.SynthResponse(**result)

    @app.post("/fetch", response_model=schemas.FetchResponse)
    def fetch_stage(req: schemas.FetchRequest) -> schemas.FetchResponse:
        token = req.token or os.environ.get(TOKEN_ENV_VAR)
        try:
            result = pipeline.run_fetch(
                owner=req.owner,
                repo=req.repo,
                out_path=req.out_path,
                branch=req.branch,
                token=token,
                fixture_dir=req.fixture_dir,
                filetype_workers=req.filetype_workers,
            )
        except (IngestionError, ValueError, OSError) as exc:
            raise _http_error(exc) from exc
        return schemas.FetchResponse(**result)

    @app.post("/transform", response_model=schemas.TransformResponse)
    def transform_stage(req: schemas.TransformRequest) -> schemas.TransformResponse:
        try:
            result = pipeline.run_transform(
                snapshot_path=req.snapshot_path,
                out_csv=req.out_csv,
                rejects_path=req.rejects_path,
            )
        except (ValueError, OSError) as exc:
            raise _http_error(exc) from exc
        return schemas.TransformResponse(**result)

    @app.post("/mine", response_model=schemas.MineResponse)
    def mine_stage(req: schemas.MineRequest) -> schemas.MineResponse:
        window = None
        if req.window_start is not None and req.window_end is not None:
            window = (req.window_start, req.window_end)
        try:
            result = pipeline.run_mine(
                log_csv=req.log_csv,
                out_path=req.out_path,
                snapshot_path=req.snapshot_path,
                format=req.format,
                deploy_pattern=req.deploy_pattern,
                window=window,
                plots_dir=req.plots_dir,
            )
        except (ValueError, OSError, RuntimeError) as exc:
            raise _http_error(exc) from exc
        return schemas.MineResponse(**result)

    @app.post("/featurize", response_model=schemas.FeaturizeResponse)
    def featurize_stage(req: schemas.FeaturizeRequest) -> schemas.FeaturizeResponse:
        try:
            fractions = SplitFractions(
                train=req.train_fraction, val=req.val_fraction, test=req.test_fraction
            )
            result = pipeline.run_featurize(
                log_csv=req.log_csv,
                snapshot_path=req.snapshot_path,
                out_dir=req.out_dir,
                seed=req.seed,
                fractions=fractions,
                samples_per_trace=req.samples_per_trace,
            )
        except (ValueError, OSError) as exc:
            raise _http_error(exc) from exc
        return schemas.FeaturizeResponse(**result)

    @app.post("/report", response_model=schemas.ReportResponse)
    def report_stage(req: schemas.ReportRequest) -> schemas.ReportResponse:
        try:
            result = pipeline.run_report(
                report_json=req.report_json, out_path=req.out_path, format=req.format
            )
        except (ValueError, OSError) as exc:
            raise _http_error(exc) from exc
        return schemas.ReportResponse(**result)

    return app


app = create_app()
