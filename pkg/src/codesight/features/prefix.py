"""Prefix-truncated training samples.

A sample is one case cut at a random position: the prefix simulates an
in-progress PR, the remainder defines the regression target. Everything
derived from events at or after the cut is quarantined in explicitly-named
fields and excluded from model inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..eventlog import ActivityKind, EventLog, EventRecord
from ..ingestion.models import FetchSnapshot, RawPullRequestDetail
from ..timestamps import utc_parts


class ComplexityLabel(Enum):
    S = "S"
    M = "M"
    L = "L"
    XL = "XL"


DEADLINE_HOURS: dict[ComplexityLabel, int] = {
    ComplexityLabel.S: 8,
    ComplexityLabel.M: 24,
    ComplexityLabel.L: 48,
    ComplexityLabel.XL: 72,
}

SIZE_LABELS = {
    "size/S": ComplexityLabel.S,
    "size/M": ComplexityLabel.M,
    "size/L": ComplexityLabel.L,
    "size/XL": ComplexityLabel.XL,
}

DEFAULT_FROM_BRANCH_TOKENS = ("hotfix", "fix", "bug", "feature")
DEFAULT_INTO_BRANCH_TOKENS = ("feature", "develop", "release", "staging")
OTHER_BRANCH_TYPE = "other"

# Fields a model input row must never contain: they encode the future of the
# trace relative to the cut.
EXCLUDED_LEAKY_FIELDS = frozenset(
    {
        "remaining_activity_list",
        "remaining_transitions",
        "remaining_time",
        "trace_total_duration",
        "y_log",
        "y_seconds",
    }
)


@dataclass(frozen=True)
class LabelThresholds:
    """Size rule applied when a PR carries no explicit size/* label."""

    small_files: int = 2
    small_lines: int = 50
    medium_files: int = 5
    medium_lines: int = 200
    large_files: int = 15
    large_lines: int = 1000


def classify_branch(branch_name: str, tokens: Sequence[str] = DEFAULT_FROM_BRANCH_TOKENS) -> str:
    """Case-insensitive keyword match of a branch name against a token set.

    The longest token that equals the name, prefixes it, or prefixes one of
    its '/'-separated segments wins; no match yields "other".
    """
    name = branch_name.lower()
    segments = name.split("/")
    for token in sorted(tokens, key=len, reverse=True):
        tok = token.lower()
        if name == tok or name.startswith(tok):
            return token
        if any(seg == tok or seg.startswith(tok) for seg in segments):
            return token
    return OTHER_BRANCH_TYPE


def filetype_flags(
    prefix_extensions: Iterable[str], universe: Sequence[str]
) -> dict[str, int]:
    """has_X binary map over a fixed extension universe (fit on the training split)."""
    seen = set(prefix_extensions)
    return {f"has_{ext}": int(ext in seen) for ext in universe}


def encode_activities(logs: Iterable[EventLog]) -> dict[str, int]:
    """Deterministic activity IDs: sorted names get 1..K, 0 stays reserved for padding."""
    names: set[str] = set()
    for log in logs:
        for event in log.events:
            names.add(event.activity.value)
    return {name: i + 1 for i, name in enumerate(sorted(names))}


def calendar_features(ts: int) -> dict[str, int]:
    year, month, day, weekday = utc_parts(ts)
    return {
        "year": year,
        "month": month,
        "day": day,
        "weekday": weekday,
        "is_weekend": int(weekday in (5, 6)),
    }


def transition_seconds(timestamps: Sequence[int]) -> list[int]:
    """Gaps between consecutive event timestamps; empty for a singleton trace."""
    return [b - a for a, b in zip(timestamps, timestamps[1:])]


def assign_label_and_deadline(
    detail: RawPullRequestDetail | None, thresholds: LabelThresholds | None = None
) -> tuple[ComplexityLabel, int]:
    """Complexity label and its deadline: explicit size/* label wins, otherwise
    the changed_files + changed-lines rule applies. A missing detail counts as
    an empty change set (label S)."""
    th = thresholds or LabelThresholds()
    if detail is not None:
        for label_name in detail.labels:
            if label_name in SIZE_LABELS:
                label = SIZE_LABELS[label_name]
                return label, DEADLINE_HOURS[label]
    files = detail.changed_files if detail else 0
    lines = (detail.additions + detail.deletions) if detail else 0
    if files <= th.small_files and lines <= th.small_lines:
        label = ComplexityLabel.S
    elif files <= th.medium_files and lines <= th.medium_lines:
        label = ComplexityLabel.M
    elif files <= th.large_files and lines <= th.large_lines:
        label = ComplexityLabel.L
    else:
        label = ComplexityLabel.XL
    return label, DEADLINE_HOURS[label]


def transform_target(remaining_seconds: float) -> float:
    """log1p compression of the remaining-time target."""
    if remaining_seconds < 0:
        raise ValueError(f"remaining time must be >= 0, got {remaining_seconds}")
    return math.log1p(remaining_seconds)


def inverse_target(y_log: float) -> float:
    return math.expm1(y_log)


def drop_leaky_features(fields: Iterable[str]) -> tuple[str, ...]:
    """Retained subset of a candidate feature list, with future-revealing
    fields removed; the exclusion list is EXCLUDED_LEAKY_FIELDS."""
    return tuple(f for f in fields if f not in EXCLUDED_LEAKY_FIELDS)


@dataclass(frozen=True)
class StaticFeatures:
    from_branch_type: str
    into_branch_type: str
    process: str
    year: int
    month: int
    day: int
    weekday: int
    is_weekend: int
    prefix_filetypes: frozenset[str]
    activity_label: str
    elapsed_time: int
    prefix_len: int
    trunc_dt_mean: float
    no_transitions: int


@dataclass(frozen=True)
class PrefixSample:
    pr_id: int
    cut: int
    truncated_activity_list: tuple[int, ...]
    remaining_activity_list: tuple[int, ...]
    truncated_transitions: tuple[int, ...]
    remaining_transitions: tuple[int, ...]
    elapsed_time: int
    remaining_time: int
    activity: int
    prefix_len: int
    trunc_dt_mean: float
    static: StaticFeatures
    label: ComplexityLabel
    deadline_hours: int

    def __post_init__(self) -> None:
        if self.cut < 1:
            raise ValueError("cut must be >= 1")
        if self.prefix_len != self.cut or len(self.truncated_activity_list) != self.cut:
            raise ValueError("prefix_len must equal cut and the truncated list length")
        if self.remaining_time < 0:
            raise ValueError("remaining_time must be >= 0")


def _prefix_extensions(prefix_events: Sequence[EventRecord]) -> frozenset[str]:
    exts: set[str] = set()
    for event in prefix_events:
        if event.activity is ActivityKind.COMMIT:
            raw = event.attributes.get("filetypes", "")
            exts.update(part for part in raw.split(";") if part)
    return frozenset(exts)


def build_sample(
    case_events: Sequence[EventRecord],
    cut: int,
    vocab: Mapping[str, int],
    process: str,
    label: ComplexityLabel,
    deadline_hours: int,
    from_branch_tokens: Sequence[str] = DEFAULT_FROM_BRANCH_TOKENS,
    into_branch_tokens: Sequence[str] = DEFAULT_INTO_BRANCH_TOKENS,
) -> PrefixSample:
    """Assemble one sample from a case cut at a fixed position (1 <= cut < len)."""
    if not 1 <= cut < len(case_events):
        raise ValueError(f"cut {cut} out of range for trace of length {len(case_events)}")
    try:
        ids = tuple(vocab[e.activity.value] for e in case_events)
    except KeyError as exc:
        raise KeyError(f"activity not in vocabulary: {exc.args[0]!r}") from None
    times = [e.date for e in case_events]
    gaps = transition_seconds(times)

    prefix_events = case_events[:cut]
    truncated_transitions = tuple(gaps[: cut - 1])
    remaining_transitions = tuple(gaps[cut - 1 :])
    elapsed = times[cut - 1] - times[0]
    remaining = times[-1] - times[cut - 1]
    trunc_dt_mean = (
        sum(truncated_transitions) / len(truncated_transitions) if truncated_transitions else 0.0
    )

    opening_attrs = case_events[0].attributes
    from_branch = opening_attrs.get("from_branch", "")
    into_branch = opening_attrs.get("into_branch", "")
    cut_ts = times[cut - 1]
    cal = calendar_features(cut_ts)
    static = StaticFeatures(
        from_branch_type=classify_branch(from_branch, from_branch_tokens),
        into_branch_type=classify_branch(into_branch, into_branch_tokens),
        process=process,
        year=cal["year"],
        month=cal["month"],
        day=cal["day"],
        weekday=cal["weekday"],
        is_weekend=cal["is_weekend"],
        prefix_filetypes=_prefix_extensions(prefix_events),
        activity_label=case_events[cut - 1].activity.value,
        elapsed_time=elapsed,
        prefix_len=cut,
        trunc_dt_mean=trunc_dt_mean,
        no_transitions=int(not truncated_transitions),
    )
    return PrefixSample(
        pr_id=case_events[0].pr_id,
        cut=cut,
        truncated_activity_list=ids[:cut],
        remaining_activity_list=ids[cut:],
        truncated_transitions=truncated_transitions,
        remaining_transitions=remaining_transitions,
        elapsed_time=elapsed,
        remaining_time=remaining,
        activity=ids[cut - 1],
        prefix_len=cut,
        trunc_dt_mean=trunc_dt_mean,
        static=static,
        label=label,
        deadline_hours=deadline_hours,
    )


def truncate_trace(
    case_events: Sequence[EventRecord],
    rng: np.random.Generator,
    vocab: Mapping[str, int],
    process: str,
    label: ComplexityLabel,
    deadline_hours: int,
) -> PrefixSample:
    """Cut a case uniformly at random in [1, len-1]; callers skip length-1 traces."""
    if len(case_events) < 2:
        raise ValueError("cannot truncate a trace with fewer than 2 events")
    cut = int(rng.integers(1, len(case_events)))
    return build_sample(case_events, cut, vocab, process, label, deadline_hours)


def build_prefix_samples(
    log: EventLog,
    snapshot: FetchSnapshot,
    seed: int,
    vocab: Mapping[str, int] | None = None,
    thresholds: LabelThresholds | None = None,
    samples_per_trace: int = 1,
) -> tuple[list[PrefixSample], int]:
    """One (or more) truncated samples per case; returns (samples, skipped).

    Length-1 traces cannot hold both a prefix and a remainder and are skipped
    but counted. Cuts are drawn from a generator seeded once, cases visited in
    pr_id order, so the result is deterministic per seed.
    """
    if vocab is None:
        vocab = encode_activities([log])
    details = snapshot.details_by_number()
    number_by_id = {p.pr_id: p.pr_number for p in snapshot.pulls}
    process = snapshot.repo.repo
    rng = np.random.default_rng(seed)

    samples: list[PrefixSample] = []
    skipped = 0
    for pr_id in sorted(log.case_index):
        case_events = log.case_events(pr_id)
        if len(case_events) < 2:
            skipped += 1
            continue
        detail = details.get(number_by_id.get(pr_id, -1))
        label, deadline = assign_label_and_deadline(detail, thresholds)
        for _ in range(samples_per_trace):
            samples.append(
                truncate_trace(case_events, rng, vocab, process, label, deadline)
            )
    return samples, skipped
