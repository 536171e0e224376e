"""Trace reconstruction, variant discovery, duration/transition/rework
statistics, and DORA metrics over the event log."""

from __future__ import annotations

import re
from dataclasses import dataclass
from statistics import mean, median
from typing import Iterable, Mapping, Sequence

from .eventlog import ActivityKind, EventLog, EventRecord
from .ingestion.models import RawWorkflowRun

SECONDS_PER_WEEK = 7 * 24 * 3600

# Case-level attributes copied from PR events onto the trace.
_CASE_ATTRIBUTE_KEYS = ("pr_author", "from_branch", "into_branch", "state", "merged_by")


@dataclass(frozen=True)
class Trace:
    pr_id: int
    steps: tuple[tuple[ActivityKind, int], ...]
    attributes: dict[str, str]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError(f"trace {self.pr_id} has no steps")
        times = [t for _, t in self.steps]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError(f"trace {self.pr_id} timestamps decrease")

    @property
    def sequence(self) -> tuple[ActivityKind, ...]:
        return tuple(kind for kind, _ in self.steps)


@dataclass(frozen=True)
class Variant:
    sequence: tuple[ActivityKind, ...]
    case_count: int
    case_ids: tuple[int, ...]


@dataclass(frozen=True)
class ProcessSummary:
    n_cases: int
    n_variants: int
    time_range: tuple[int, int] | None
    mean_case_duration: float | None
    median_case_duration: float | None


@dataclass(frozen=True)
class TransitionStats:
    count: int
    mean_s: float
    median_s: float
    max_s: int


@dataclass(frozen=True)
class ReworkDescriptor:
    repeats: dict[ActivityKind, int]
    has_rework: bool


@dataclass(frozen=True)
class DoraReport:
    window: tuple[int, int]
    deployment_frequency: float
    lead_time_for_changes: float | None
    lead_time_mean: float | None
    change_failure_rate: float | None
    mttr: float | None
    mttr_mean: float | None
    deploy_runs: int
    deploy_failures: int
    deploy_successes: int


def build_traces(log: EventLog) -> list[Trace]:
    """One trace per case, steps in log order, case attributes merged from PR events."""
    traces = []
    for pr_id in log.case_index:
        events = log.case_events(pr_id)
        attributes: dict[str, str] = {}
        for event in events:
            for key in _CASE_ATTRIBUTE_KEYS:
                value = event.attributes.get(key)
                if value is not None and key not in attributes:
                    attributes[key] = value
        traces.append(
            Trace(pr_id, tuple((e.activity, e.date) for e in events), attributes)
        )
    return traces


def discover_variants(traces: Sequence[Trace]) -> list[Variant]:
    """Group traces by activity sequence; order by case_count desc, then sequence."""
    grouped: dict[tuple[ActivityKind, ...], list[int]] = {}
    for trace in traces:
        grouped.setdefault(trace.sequence, []).append(trace.pr_id)
    variants = [
        Variant(seq, len(ids), tuple(sorted(ids))) for seq, ids in grouped.items()
    ]
    variants.sort(key=lambda v: (-v.case_count, tuple(k.value for k in v.sequence)))
    return variants


def case_duration(trace: Trace) -> int:
    return trace.steps[-1][1] - trace.steps[0][1]


def summary(traces: Sequence[Trace]) -> ProcessSummary:
    n_cases = len(traces)
    n_variants = len(discover_variants(traces))
    if not traces:
        return ProcessSummary(0, 0, None, None, None)
    durations = [case_duration(t) for t in traces]
    stamps = [t for trace in traces for _, t in trace.steps]
    return ProcessSummary(
        n_cases=n_cases,
        n_variants=n_variants,
        time_range=(min(stamps), max(stamps)),
        mean_case_duration=mean(durations),
        median_case_duration=float(median(durations)),
    )


def transition_seconds_of(trace: Trace) -> list[int]:
    times = [t for _, t in trace.steps]
    return [b - a for a, b in zip(times, times[1:])]


def transition_stats(
    traces: Sequence[Trace],
) -> dict[tuple[ActivityKind, ActivityKind], TransitionStats]:
    """Duration stats for every directly-follows pair across all traces."""
    gaps: dict[tuple[ActivityKind, ActivityKind], list[int]] = {}
    for trace in traces:
        for (kind_a, t_a), (kind_b, t_b) in zip(trace.steps, trace.steps[1:]):
            gaps.setdefault((kind_a, kind_b), []).append(t_b - t_a)
    return {
        pair: TransitionStats(len(vals), mean(vals), float(median(vals)), max(vals))
        for pair, vals in gaps.items()
    }


def detect_rework(trace: Trace) -> ReworkDescriptor:
    """Repeat counts per activity; commits repeating is normal authoring and
    does not set the rework flag, any other repeated activity does."""
    counts: dict[ActivityKind, int] = {}
    for kind, _ in trace.steps:
        counts[kind] = counts.get(kind, 0) + 1
    repeats = {kind: n - 1 for kind, n in counts.items() if n >= 2}
    has_rework = any(kind is not ActivityKind.COMMIT for kind in repeats)
    return ReworkDescriptor(repeats, has_rework)


def bottleneck_transitions(
    stats: Mapping[tuple[ActivityKind, ActivityKind], TransitionStats], factor: float = 3.0
) -> list[dict[str, object]]:
    """Transitions whose mean gap exceeds factor x the pooled mean gap."""
    total = sum(s.mean_s * s.count for s in stats.values())
    count = sum(s.count for s in stats.values())
    if count == 0:
        return []
    global_mean = total / count
    flagged = [
        {
            "from": pair[0].value,
            "to": pair[1].value,
            "mean_s": s.mean_s,
            "global_mean_s": global_mean,
            "factor": factor,
        }
        for pair, s in sorted(stats.items(), key=lambda kv: -kv[1].mean_s)
        if global_mean > 0 and s.mean_s > factor * global_mean
    ]
    return flagged


def _is_deploy(run_name: str, pattern: re.Pattern[str]) -> bool:
    return pattern.search(run_name) is not None


@dataclass(frozen=True)
class _DeployRun:
    ts: int
    run_name: str
    conclusion: str
    pr_id: int | None


def _deploy_runs_from_log(
    log: EventLog, pattern: re.Pattern[str], event_trigger: str | None
) -> list[_DeployRun]:
    deploys = []
    for event in log.events:
        if event.activity is not ActivityKind.WORKFLOW_RUN:
            continue
        run_name = event.attributes.get("run_name")
        conclusion = event.attributes.get("conclusion")
        if run_name is None or conclusion is None:
            continue
        if event_trigger and event.attributes.get("event_trigger") != event_trigger:
            continue
        if _is_deploy(run_name, pattern):
            deploys.append(_DeployRun(event.date, run_name, conclusion, event.pr_id))
    return deploys


def dora_metrics(
    log: EventLog,
    window: tuple[int, int],
    deploy_run_name_pattern: str,
    extra_runs: Iterable[RawWorkflowRun] = (),
    event_trigger: str | None = None,
) -> DoraReport:
    """Core DORA metrics over one time window.

    A deploy is any workflow run whose run_name matches the pattern and that
    reached a terminal conclusion. Frequency counts all deploys per week; lead
    time is measured from a PR's earliest commit to each successful deploy of
    that PR; CFR is failures over all deploys; MTTR is the gap from a failed
    deploy to the next successful deploy of the same run_name. Runs not linked
    to any PR (extra_runs) still count for frequency/CFR/MTTR.
    """
    start, end = window
    if start >= end:
        raise ValueError("window start must precede window end")
    pattern = re.compile(deploy_run_name_pattern)

    deploys = _deploy_runs_from_log(log, pattern, event_trigger)
    for run in extra_runs:
        if run.conclusion is None:
            continue
        if event_trigger and run.event_trigger != event_trigger:
            continue
        if _is_deploy(run.run_name, pattern):
            deploys.append(_DeployRun(run.run_started_at, run.run_name, run.conclusion, None))

    deploys = [d for d in deploys if start <= d.ts <= end]
    deploys.sort(key=lambda d: (d.ts, d.run_name))

    weeks = (end - start) / SECONDS_PER_WEEK
    if not deploys:
        return DoraReport(window, 0.0, None, None, None, None, None, 0, 0, 0)

    failures = [d for d in deploys if d.conclusion == "failure"]
    successes = [d for d in deploys if d.conclusion == "success"]

    first_commit: dict[int, int] = {}
    for event in log.events:
        if event.activity is ActivityKind.COMMIT and event.pr_id not in first_commit:
            first_commit[event.pr_id] = event.date
    lead_times = [
        d.ts - first_commit[d.pr_id]
        for d in successes
        if d.pr_id is not None and d.pr_id in first_commit
    ]

    restore_gaps: list[int] = []
    by_name: dict[str, list[_DeployRun]] = {}
    for d in deploys:
        by_name.setdefault(d.run_name, []).append(d)
    for runs in by_name.values():
        for d in runs:
            if d.conclusion != "failure":
                continue
            recovery = next((s for s in runs if s.ts >= d.ts and s.conclusion == "success"), None)
            if recovery is not None:
                restore_gaps.append(recovery.ts - d.ts)

    return DoraReport(
        window=window,
        deployment_frequency=len(deploys) / weeks,
        lead_time_for_changes=float(median(lead_times)) if lead_times else None,
        lead_time_mean=mean(lead_times) if lead_times else None,
        change_failure_rate=len(failures) / len(deploys),
        mttr=float(median(restore_gaps)) if restore_gaps else None,
        mttr_mean=mean(restore_gaps) if restore_gaps else None,
        deploy_runs=len(deploys),
        deploy_failures=len(failures),
        deploy_successes=len(successes),
    )


def pr_activity_report(
    traces: Sequence[Trace], details: Iterable[object] = ()
) -> dict[str, object]:
    """PR dynamics: counts, review times, and per-author lifetime/merge stats."""
    review_times: list[int] = []
    per_author: dict[str, dict[str, object]] = {}
    merged_total = 0

    for trace in traces:
        opening = next((t for k, t in trace.steps if k is ActivityKind.PR_OPENING), None)
        merge = next((t for k, t in trace.steps if k is ActivityKind.PR_MERGE), None)
        closure = next((t for k, t in trace.steps if k is ActivityKind.PR_CLOSURE), None)
        author = trace.attributes.get("pr_author", "<unknown>")
        stats = per_author.setdefault(
            author, {"pr_count": 0, "merges": 0, "_lifetimes": []}
        )
        stats["pr_count"] = int(stats["pr_count"]) + 1
        if opening is not None:
            lifetime_end = closure if closure is not None else trace.steps[-1][1]
            stats["_lifetimes"].append(lifetime_end - opening)  # type: ignore[union-attr]
            if merge is not None:
                review_times.append(merge - opening)
        if merge is not None:
            merged_total += 1
            stats["merges"] = int(stats["merges"]) + 1

    for stats in per_author.values():
        lifetimes = stats.pop("_lifetimes")
        stats["mean_lifetime_s"] = mean(lifetimes) if lifetimes else None

    merges_performed: dict[str, int] = {}
    for detail in details:
        merged_by = getattr(detail, "merged_by", None)
        if merged_by:
            merges_performed[merged_by] = merges_performed.get(merged_by, 0) + 1

    return {
        "prs_created": len(traces),
        "prs_merged": merged_total,
        "mean_review_time_s": mean(review_times) if review_times else None,
        "per_author": {author: per_author[author] for author in sorted(per_author)},
        "merges_performed": {user: merges_performed[user] for user in sorted(merges_performed)},
    }
