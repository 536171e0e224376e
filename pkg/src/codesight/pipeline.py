"""Stage orchestration shared by the service endpoints.

Each stage reads only prior-stage artifacts from disk and writes its own,
so reruns are idempotent for identical inputs and seeds. Nothing here talks
to the network except the fetch stage, and only when given an HTTP backend.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Mapping

from . import eventlog as el
from . import mining, report, synth
from .features import (
    SplitFractions,
    build_prefix_samples,
    encode_activities,
    encode_dataset,
    export_dataset,
    split_dataset,
)
from .ingestion import (
    FixtureBackend,
    GitHubClient,
    HttpBackend,
    RepoRef,
    fetch_snapshot,
    load_snapshot,
    save_snapshot,
)
from .ingestion.store import write_json_atomic
from .mining import SECONDS_PER_WEEK

DEFAULT_DEPLOY_PATTERN = "(?i)deploy"


class StageInputError(ValueError):
    """A stage input file is missing or unreadable."""


def _require_file(path: Path | str, what: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise StageInputError(f"{what} not found: {path}")
    return path


def run_synth(
    n_cases: int,
    seed: int,
    out_dir: Path | str,
    compliance_target: float = 0.70,
) -> dict[str, Any]:
    out_dir = Path(out_dir)
    spec = synth.SynthSpec(n_cases=n_cases, seed=seed, compliance_target=compliance_target)
    snapshot, law = synth.generate(spec)
    snapshot_path = out_dir / "snapshot.json"
    law_path = out_dir / "law.json"
    save_snapshot(snapshot, snapshot_path)
    write_json_atomic(law_path, law)
    return {
        "snapshot_path": str(snapshot_path),
        "law_path": str(law_path),
        "n_cases": n_cases,
        "n_commits": len(snapshot.commits),
        "n_runs": len(snapshot.runs),
    }


def run_fetch(
    owner: str,
    repo: str,
    out_path: Path | str,
    branch: str | None = None,
    token: str | None = None,
    fixture_dir: Path | str | None = None,
    filetype_workers: int = 4,
) -> dict[str, Any]:
    repo_ref = RepoRef(owner=owner, repo=repo, branch=branch)
    if fixture_dir is not None:
        backend: FixtureBackend | HttpBackend = FixtureBackend(fixture_dir)
    else:
        backend = HttpBackend(token=token)
    client = GitHubClient(backend)
    snapshot = fetch_snapshot(client, repo_ref, filetype_workers=filetype_workers)
    out_path = Path(out_path)
    save_snapshot(snapshot, out_path)
    return {
        "snapshot_path": str(out_path),
        "pulls": len(snapshot.pulls),
        "details": len(snapshot.details),
        "commits": len(snapshot.commits),
        "runs": len(snapshot.runs),
    }


def run_transform(
    snapshot_path: Path | str,
    out_csv: Path | str,
    rejects_path: Path | str | None = None,
) -> dict[str, Any]:
    snapshot = load_snapshot(_require_file(snapshot_path, "snapshot"))
    build = el.build_event_log(snapshot)
    out_csv = Path(out_csv)
    el.export_csv(build.log, out_csv)
    rejects_path = Path(rejects_path) if rejects_path else out_csv.with_suffix(".rejects.jsonl")
    el.write_rejects(build.rejects, rejects_path)
    return {
        "csv_path": str(out_csv),
        "rejects_path": str(rejects_path),
        "events": len(build.log),
        "cases": len(build.log.case_index),
        "rejects": len(build.rejects),
        "unmatched_runs": len(build.unmatched_runs),
    }


def _window_from_log(log: el.EventLog) -> tuple[int, int]:
    if not log.events:
        return (0, SECONDS_PER_WEEK)
    stamps = [e.date for e in log.events]
    start, end = min(stamps), max(stamps)
    if start == end:
        end = start + SECONDS_PER_WEEK
    return (start, end)


def run_mine(
    log_csv: Path | str,
    out_path: Path | str,
    snapshot_path: Path | str | None = None,
    format: str = "json",
    deploy_pattern: str = DEFAULT_DEPLOY_PATTERN,
    window: tuple[int, int] | None = None,
    plots_dir: Path | str | None = None,
) -> dict[str, Any]:
    log_csv = _require_file(log_csv, "event log CSV")
    snapshot = None
    run_meta: Mapping[str, Mapping[str, str]] | None = None
    extra_runs: tuple = ()
    if snapshot_path is not None:
        snapshot = load_snapshot(_require_file(snapshot_path, "snapshot"))
        run_meta = el.run_metadata_from_snapshot(snapshot)
        extra_runs = tuple(el.match_runs(snapshot)[1])

    log = el.load_csv(log_csv, run_metadata=run_meta)
    traces = mining.build_traces(log)
    variants = mining.discover_variants(traces)
    summ = mining.summary(traces)
    dora = mining.dora_metrics(
        log,
        window or _window_from_log(log),
        deploy_pattern,
        extra_runs=extra_runs,
    )
    activity = mining.pr_activity_report(traces, snapshot.details if snapshot else ())
    out_path = Path(out_path)
    report.emit_report(summ, variants, dora, activity, out_path, format, traces=traces, log=log)
    plots: list[str] = []
    if plots_dir is not None:
        plots = [str(p) for p in report.write_plots(traces, plots_dir)]
    return {
        "report_path": str(out_path),
        "format": format,
        "n_cases": summ.n_cases,
        "n_variants": summ.n_variants,
        "deploy_runs": dora.deploy_runs,
        "plots": plots,
    }


def run_featurize(
    log_csv: Path | str,
    snapshot_path: Path | str,
    out_dir: Path | str,
    seed: int,
    fractions: SplitFractions | None = None,
    samples_per_trace: int = 1,
) -> dict[str, Any]:
    log_csv = _require_file(log_csv, "event log CSV")
    snapshot = load_snapshot(_require_file(snapshot_path, "snapshot"))
    log = el.load_csv(log_csv)
    vocab = encode_activities([log])
    samples, skipped = build_prefix_samples(
        log, snapshot, seed, samples_per_trace=samples_per_trace
    )
    split = split_dataset(samples, seed, fractions)
    encoded = encode_dataset(split, vocab, seed=seed)
    files = export_dataset(encoded, out_dir)
    return {
        "dataset_dir": str(Path(out_dir)),
        "files": [str(f) for f in files],
        "samples": len(samples),
        "skipped_short_traces": skipped,
        "split_rows": {name: int(len(arr.pr_ids)) for name, arr in encoded.splits.items()},
        "max_len": encoded.params.max_len,
        "static_dim": len(encoded.static_columns),
    }


def run_report(
    report_json: Path | str,
    out_path: Path | str,
    format: str = "markdown",
) -> dict[str, Any]:
    """Re-render an existing mining report JSON into another format."""
    report_json = _require_file(report_json, "mining report")
    payload = json.loads(Path(report_json).read_text(encoding="utf-8"))
    out_path = Path(out_path)
    if format == "json":
        write_json_atomic(out_path, payload)
    elif format == "markdown":
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(report.render_markdown(payload), encoding="utf-8")
    else:
        raise ValueError(f"unsupported report format {format!r}")
    return {"report_path": str(out_path), "format": format}


def parse_window(value: str) -> tuple[int, int]:
    """Parse "START..END" (RFC 3339 or epoch seconds) into a window tuple."""
    parts = value.split("..")
    if len(parts) != 2:
        raise ValueError(f"window must look like START..END, got {value!r}")

    def _one(text: str) -> int:
        text = text.strip()
        if re.fullmatch(r"-?\d+", text):
            return int(text)
        from .timestamps import parse_rfc3339

        return parse_rfc3339(text)

    return (_one(parts[0]), _one(parts[1]))
