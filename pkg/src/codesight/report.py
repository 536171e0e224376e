"""Mining report emitter: versioned JSON, markdown rendering, optional plots.

The report carries seven fixed sections; rendering is deterministic so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .eventlog import ActivityKind, EventLog
from .ingestion.store import write_json_atomic
from .mining import (
    DoraReport,
    ProcessSummary,
    Trace,
    TransitionStats,
    Variant,
    bottleneck_transitions,
    case_duration,
    detect_rework,
    transition_stats,
)
from .timestamps import format_utc

REPORT_SCHEMA_VERSION = 1

SECTION_DORA = "DORA Metrics"
SECTION_GENERAL = "General Development Indicators"
SECTION_PR_ACTIVITY = "Pull Request Activity"
SECTION_VARIANTS = "Process Variants and Visualization"
SECTION_USERS = "User-based Analysis"
SECTION_TEMPORAL = "Temporal Evolution of PRs"
SECTION_DEPLOYMENT = "Deployment and Incident Metrics"

REPORT_SECTIONS = (
    SECTION_DORA,
    SECTION_GENERAL,
    SECTION_PR_ACTIVITY,
    SECTION_VARIANTS,
    SECTION_USERS,
    SECTION_TEMPORAL,
    SECTION_DEPLOYMENT,
)


def _month_of(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m")


def _dora_section(dora: DoraReport) -> dict[str, object]:
    return {
        "window": [format_utc(dora.window[0]), format_utc(dora.window[1])],
        "deployment_frequency_per_week": dora.deployment_frequency,
        "lead_time_for_changes_s": dora.lead_time_for_changes,
        "lead_time_mean_s": dora.lead_time_mean,
        "change_failure_rate": dora.change_failure_rate,
        "mttr_s": dora.mttr,
        "mttr_mean_s": dora.mttr_mean,
        "deploy_runs": dora.deploy_runs,
        "deploy_failures": dora.deploy_failures,
        "deploy_successes": dora.deploy_successes,
    }


def _general_section(
    summary: ProcessSummary,
    traces: Sequence[Trace],
    transitions: Mapping[tuple[ActivityKind, ActivityKind], TransitionStats],
    bottleneck_factor: float,
) -> dict[str, object]:
    open_traces = [t for t in traces if ActivityKind.PR_CLOSURE not in t.sequence]
    closed_traces = [t for t in traces if ActivityKind.PR_CLOSURE in t.sequence]
    open_durations = sorted(case_duration(t) for t in open_traces)
    rework_cases = sum(1 for t in traces if detect_rework(t).has_rework)
    return {
        "n_cases": summary.n_cases,
        "n_variants": summary.n_variants,
        "time_range": [format_utc(summary.time_range[0]), format_utc(summary.time_range[1])]
        if summary.time_range
        else None,
        "mean_case_duration_s": summary.mean_case_duration,
        "median_case_duration_s": summary.median_case_duration,
        "open_cases": len(open_traces),
        "closed_cases": len(closed_traces),
        "open_case_observed_duration_s": {
            "mean": sum(open_durations) / len(open_durations) if open_durations else None,
            "max": open_durations[-1] if open_durations else None,
        },
        "cases_with_rework": rework_cases,
        "transitions": [
            {
                "from": pair[0].value,
                "to": pair[1].value,
                "count": s.count,
                "mean_s": s.mean_s,
                "median_s": s.median_s,
                "max_s": s.max_s,
            }
            for pair, s in sorted(
                transitions.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)
            )
        ],
        "bottlenecks": bottleneck_transitions(transitions, bottleneck_factor),
    }


def _variants_section(variants: Sequence[Variant], top: int) -> dict[str, object]:
    return {
        "n_variants": len(variants),
        "top_variants": [
            {
                "sequence": [k.value for k in v.sequence],
                "case_count": v.case_count,
                "example_case": v.case_ids[0] if v.case_ids else None,
            }
            for v in variants[:top]
        ],
    }


def _users_section(log: EventLog | None, activity: Mapping[str, object]) -> dict[str, object]:
    commits_by_author: dict[str, int] = {}
    runs_by_actor: dict[str, int] = {}
    if log is not None:
        for event in log.events:
            if event.activity is ActivityKind.COMMIT:
                author = event.attributes.get("commit_author", "<unknown>")
                commits_by_author[author] = commits_by_author.get(author, 0) + 1
    merges_performed = activity.get("merges_performed", {})
    return {
        "commits_by_author": {a: commits_by_author[a] for a in sorted(commits_by_author)},
        "merges_performed": merges_performed,
        "workflow_runs_by_actor": {a: runs_by_actor[a] for a in sorted(runs_by_actor)},
    }


def _temporal_section(log: EventLog | None) -> dict[str, object]:
    opened: dict[str, int] = {}
    merged: dict[str, int] = {}
    if log is not None:
        for event in log.events:
            if event.activity is ActivityKind.PR_OPENING:
                month = _month_of(event.date)
                opened[month] = opened.get(month, 0) + 1
            elif event.activity is ActivityKind.PR_MERGE:
                month = _month_of(event.date)
                merged[month] = merged.get(month, 0) + 1
    return {
        "prs_opened_by_month": {m: opened[m] for m in sorted(opened)},
        "prs_merged_by_month": {m: merged[m] for m in sorted(merged)},
    }


def _deployment_section(log: EventLog | None) -> dict[str, object]:
    by_name: dict[str, dict[str, int]] = {}
    failed_by_month: dict[str, int] = {}
    if log is not None:
        for event in log.events:
            if event.activity is not ActivityKind.WORKFLOW_RUN:
                continue
            name = event.attributes.get("run_name", "<unknown>")
            stats = by_name.setdefault(name, {"runs": 0, "failures": 0})
            stats["runs"] += 1
            if event.attributes.get("conclusion") == "failure":
                stats["failures"] += 1
                month = _month_of(event.date)
                failed_by_month[month] = failed_by_month.get(month, 0) + 1
    return {
        "runs_by_workflow": {
            name: {
                "runs": by_name[name]["runs"],
                "failures": by_name[name]["failures"],
                "failure_rate": by_name[name]["failures"] / by_name[name]["runs"],
            }
            for name in sorted(by_name)
        },
        "failed_runs_by_month": {m: failed_by_month[m] for m in sorted(failed_by_month)},
    }


def build_report(
    summary: ProcessSummary,
    variants: Sequence[Variant],
    dora: DoraReport,
    activity: Mapping[str, object],
    traces: Sequence[Trace] = (),
    log: EventLog | None = None,
    top_variants: int = 20,
    bottleneck_factor: float = 3.0,
) -> dict[str, object]:
    transitions = transition_stats(traces)
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "sections": {
            SECTION_DORA: _dora_section(dora),
            SECTION_GENERAL: _general_section(summary, traces, transitions, bottleneck_factor),
            SECTION_PR_ACTIVITY: dict(activity),
            SECTION_VARIANTS: _variants_section(variants, top_variants),
            SECTION_USERS: _users_section(log, activity),
            SECTION_TEMPORAL: _temporal_section(log),
            SECTION_DEPLOYMENT: _deployment_section(log),
        },
    }


def _md_value(value: object) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _md_block(payload: object, indent: int = 0) -> list[str]:
    lines: list[str] = []
    pad = "  " * indent
    if isinstance(payload, Mapping):
        for key, value in payload.items():
            if isinstance(value, (Mapping, list)):
                lines.append(f"{pad}- {key}:")
                lines.extend(_md_block(value, indent + 1))
            else:
                lines.append(f"{pad}- {key}: {_md_value(value)}")
    elif isinstance(payload, list):
        for item in payload:
            if isinstance(item, (Mapping, list)):
                lines.extend(_md_block(item, indent))
                lines.append("")
            else:
                lines.append(f"{pad}- {_md_value(item)}")
        while lines and lines[-1] == "":
            lines.pop()
    else:
        lines.append(f"{pad}{_md_value(payload)}")
    return lines


def render_markdown(report: Mapping[str, object]) -> str:
    lines = ["# Workflow Mining Report", ""]
    sections = report.get("sections", {})
    for heading in REPORT_SECTIONS:
        lines.append(f"## {heading}")
        lines.append("")
        body = sections.get(heading, {})
        block = _md_block(body)
        lines.extend(block if block else ["(no data)"])
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def emit_report(
    summary: ProcessSummary,
    variants: Sequence[Variant],
    dora: DoraReport,
    activity: Mapping[str, object],
    path: Path | str,
    format: str = "json",
    traces: Sequence[Trace] = (),
    log: EventLog | None = None,
) -> Path:
    """Render the report to path; format is json or markdown."""
    path = Path(path)
    report = build_report(summary, variants, dora, activity, traces=traces, log=log)
    if format == "json":
        write_json_atomic(path, report)
    elif format == "markdown":
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(render_markdown(report), encoding="utf-8")
        tmp.replace(path)
    else:
        raise ValueError(f"unsupported report format {format!r}")
    return path


def write_plots(traces: Sequence[Trace], out_dir: Path | str) -> list[Path]:
    """Histogram images beside the report; requires matplotlib (plots extra)."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("plot output requires matplotlib (install codesight[plots])") from exc

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    durations_h = [case_duration(t) / 3600 for t in traces]
    if durations_h:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.hist(durations_h, bins=30, color="#4878a8", edgecolor="white")
        ax.set_xlabel("case duration (hours)")
        ax.set_ylabel("cases")
        ax.set_title("Case duration distribution")
        fig.tight_layout()
        target = out_dir / "case_durations.png"
        fig.savefig(target, dpi=120)
        plt.close(fig)
        written.append(target)

    gaps_h = [g / 3600 for t in traces for g in
              (b - a for (_, a), (_, b) in zip(t.steps, t.steps[1:]))]
    if gaps_h:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.hist(gaps_h, bins=30, color="#a85448", edgecolor="white")
        ax.set_xlabel("transition duration (hours)")
        ax.set_ylabel("transitions")
        ax.set_title("Transition duration distribution")
        fig.tight_layout()
        target = out_dir / "transition_durations.png"
        fig.savefig(target, dpi=120)
        plt.close(fig)
        written.append(target)

    return written
