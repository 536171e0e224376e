"""Unified event log keyed by pr_id.

Raw snapshots are first laid out as wide tables whose date columns carry the
"Fch" prefix; melting turns every non-null date cell into one event row that
duplicates the row's metadata, the column name becomes the raw activity
label, and labels are then translated into the fixed five-activity
vocabulary. The final log is sorted by (pr_id, date, activity rank) so equal
timestamps order deterministically.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .ingestion.models import FetchSnapshot, RawWorkflowRun
from .timestamps import coerce_epoch, format_utc, parse_rfc3339

DATE_COLUMN_PREFIX = "Fch"


class ActivityKind(Enum):
    PR_OPENING = "PR Opening"
    COMMIT = "Commit"
    WORKFLOW_RUN = "Workflow Run"
    PR_MERGE = "PR Merge"
    PR_CLOSURE = "PR Closure"


# Same-timestamp tie-break: opening before commits before runs before merge
# before closure.
TIE_BREAK_RANK: dict[ActivityKind, int] = {kind: i for i, kind in enumerate(ActivityKind)}

# Activities that may occur at most once per case.
SINGLE_PER_CASE = (ActivityKind.PR_OPENING, ActivityKind.PR_MERGE, ActivityKind.PR_CLOSURE)

DEFAULT_ACTIVITY_TRANSLATIONS: dict[str, ActivityKind] = {
    "Fch apertura PR": ActivityKind.PR_OPENING,
    "Fch commit": ActivityKind.COMMIT,
    "Fch workflow run": ActivityKind.WORKFLOW_RUN,
    "Fch merge PR": ActivityKind.PR_MERGE,
    "Fch cierre PR": ActivityKind.PR_CLOSURE,
}


class UnknownActivityError(ValueError):
    def __init__(self, label: str) -> None:
        self.label = label
        super().__init__(f"no translation for activity label {label!r}")


def translate_activity(
    raw_label: str, translations: Mapping[str, ActivityKind] | None = None
) -> ActivityKind:
    """Map a raw date-column label to its activity; unknown labels always raise."""
    mapping = DEFAULT_ACTIVITY_TRANSLATIONS if translations is None else translations
    try:
        return mapping[raw_label]
    except KeyError:
        raise UnknownActivityError(raw_label) from None


@dataclass(frozen=True)
class MeltedEvent:
    pr_id: int
    raw_label: str
    date: int
    attributes: dict[str, str]


@dataclass(frozen=True)
class MeltReject:
    pr_id: int | None
    column: str
    raw_value: str
    reason: str

    def to_json(self) -> dict[str, object]:
        return {
            "pr_id": self.pr_id,
            "column": self.column,
            "raw_value": self.raw_value,
            "reason": self.reason,
        }


def melt_date_columns(
    rows: Iterable[Mapping[str, object]], id_column: str = "pr_id"
) -> tuple[list[MeltedEvent], list[MeltReject]]:
    """One event per non-null date cell, metadata duplicated onto every event.

    Unparseable cells become rejects and processing continues; null cells are
    skipped silently, so len(events) equals the number of parseable non-null
    date cells.
    """
    events: list[MeltedEvent] = []
    rejects: list[MeltReject] = []
    for row in rows:
        raw_id = row.get(id_column)
        try:
            pr_id = int(raw_id)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            rejects.append(
                MeltReject(None, id_column, repr(raw_id), "missing or non-integer case id")
            )
            continue
        metadata = {
            key: str(value)
            for key, value in row.items()
            if not key.startswith(DATE_COLUMN_PREFIX)
            and key != id_column
            and value is not None
            and value != ""
        }
        for column, value in row.items():
            if not column.startswith(DATE_COLUMN_PREFIX):
                continue
            if value is None or value == "":
                continue
            try:
                ts = coerce_epoch(value)
            except ValueError as exc:
                rejects.append(MeltReject(pr_id, column, str(value), str(exc)))
                continue
            events.append(MeltedEvent(pr_id, column, ts, dict(metadata)))
    return events, rejects


@dataclass(frozen=True)
class EventRecord:
    pr_id: int
    activity: ActivityKind
    date: int
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class EventLog:
    events: tuple[EventRecord, ...]
    case_index: dict[int, tuple[int, ...]]

    @classmethod
    def from_events(cls, events: Iterable[EventRecord]) -> "EventLog":
        ordered = sorted(events, key=lambda e: (e.pr_id, e.date, TIE_BREAK_RANK[e.activity]))
        index: dict[int, list[int]] = {}
        for pos, event in enumerate(ordered):
            index.setdefault(event.pr_id, []).append(pos)
        for pr_id, positions in index.items():
            for kind in SINGLE_PER_CASE:
                n = sum(1 for p in positions if ordered[p].activity is kind)
                if n > 1:
                    raise ValueError(f"case {pr_id} has {n} {kind.value} events, at most 1 allowed")
        return cls(tuple(ordered), {k: tuple(v) for k, v in index.items()})

    def case_ids(self) -> list[int]:
        return list(self.case_index)

    def case_events(self, pr_id: int) -> list[EventRecord]:
        return [self.events[i] for i in self.case_index[pr_id]]

    def __len__(self) -> int:
        return len(self.events)


# Attributes each activity keeps after melting (the melt itself duplicates the
# whole metadata row).
_KIND_ATTRIBUTES: dict[ActivityKind, tuple[str, ...]] = {
    ActivityKind.PR_OPENING: ("pr_author", "from_branch", "into_branch", "state"),
    ActivityKind.COMMIT: ("commit_author", "filetypes"),
    ActivityKind.WORKFLOW_RUN: ("run_id", "conclusion", "event_trigger", "run_name"),
    ActivityKind.PR_MERGE: ("pr_author", "from_branch", "into_branch", "state", "merged_by"),
    ActivityKind.PR_CLOSURE: ("pr_author", "from_branch", "into_branch", "state"),
}

_PR_LABELS = {
    "opening": "Fch apertura PR",
    "merge": "Fch merge PR",
    "closure": "Fch cierre PR",
    "commit": "Fch commit",
    "run": "Fch workflow run",
}


def match_runs(snapshot: FetchSnapshot) -> tuple[dict[int, int], list[RawWorkflowRun]]:
    """Assign workflow runs to PRs by SHA.

    A run belongs to the PR whose head_sha, any commit sha, or merge_commit_sha
    equals the run's head_sha; ambiguous runs go to the lowest pr_id. Returns
    (run_id -> pr_id, unmatched runs).
    """
    sha_to_pr: dict[str, int] = {}

    def claim(sha: str | None, pr_id: int) -> None:
        if sha and (sha not in sha_to_pr or pr_id < sha_to_pr[sha]):
            sha_to_pr[sha] = pr_id

    for pull in snapshot.pulls:
        claim(pull.head_sha, pull.pr_id)
        claim(pull.merge_commit_sha, pull.pr_id)
    for commit in snapshot.commits:
        claim(commit.commit_sha, commit.pr_id)

    assignments: dict[int, int] = {}
    unmatched: list[RawWorkflowRun] = []
    for run in snapshot.runs:
        pr_id = sha_to_pr.get(run.head_sha)
        if pr_id is None:
            unmatched.append(run)
        else:
            assignments[run.run_id] = pr_id
    return assignments, unmatched


@dataclass(frozen=True)
class EventLogBuild:
    log: EventLog
    rejects: tuple[MeltReject, ...]
    unmatched_runs: tuple[RawWorkflowRun, ...]


def build_event_log(
    snapshot: FetchSnapshot, translations: Mapping[str, ActivityKind] | None = None
) -> EventLogBuild:
    """Melt the PR, commit, and (matched) run tables into one sorted log.

    Per PR: one opening at created_at, one commit event per commit, one run
    event per matched workflow run at run_started_at, a merge event when
    merged_at is set and a closure event when closed_at is set. Unmatched
    runs are excluded from the log but returned for repository-level metrics.
    """
    details = snapshot.details_by_number()
    assignments, unmatched = match_runs(snapshot)

    pr_rows: list[dict[str, object]] = []
    for pull in snapshot.pulls:
        detail = details.get(pull.pr_number)
        pr_rows.append(
            {
                "pr_id": pull.pr_id,
                _PR_LABELS["opening"]: pull.created_at,
                _PR_LABELS["merge"]: pull.merged_at,
                _PR_LABELS["closure"]: pull.closed_at,
                "pr_author": pull.pr_author,
                "from_branch": pull.from_branch,
                "into_branch": pull.into_branch,
                "state": pull.state,
                "merged_by": detail.merged_by if detail else None,
            }
        )

    commit_rows: list[dict[str, object]] = [
        {
            "pr_id": c.pr_id,
            _PR_LABELS["commit"]: c.committed_at,
            "commit_author": c.author,
            "filetypes": ";".join(sorted(c.filetypes)),
        }
        for c in snapshot.commits
    ]

    run_rows: list[dict[str, object]] = [
        {
            "pr_id": assignments[r.run_id],
            _PR_LABELS["run"]: r.run_started_at,
            "run_id": str(r.run_id),
            "conclusion": r.conclusion,
            "event_trigger": r.event_trigger,
            "run_name": r.run_name,
        }
        for r in snapshot.runs
        if r.run_id in assignments
    ]

    melted: list[MeltedEvent] = []
    rejects: list[MeltReject] = []
    for rows in (pr_rows, commit_rows, run_rows):
        events, errs = melt_date_columns(rows)
        melted.extend(events)
        rejects.extend(errs)

    records = []
    for event in melted:
        kind = translate_activity(event.raw_label, translations)
        keep = _KIND_ATTRIBUTES[kind]
        attrs = {k: v for k, v in event.attributes.items() if k in keep}
        records.append(EventRecord(event.pr_id, kind, event.date, attrs))

    return EventLogBuild(EventLog.from_events(records), tuple(rejects), tuple(unmatched))


CSV_COLUMNS = (
    "pr_id",
    "ACTIVITY",
    "DATE",
    "commit_author",
    "pr_author",
    "merged_by",
    "from_branch",
    "into_branch",
    "filetypes",
    "state",
    "conclusion",
    "run_id",
)

_CSV_ATTRIBUTE_COLUMNS = CSV_COLUMNS[3:]


def export_csv(log: EventLog, path: Path | str) -> Path:
    """Write the log in the fixed process-mining CSV layout (RFC 4180)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for event in log.events:
            writer.writerow(
                [str(event.pr_id), event.activity.value, format_utc(event.date)]
                + [event.attributes.get(col, "") for col in _CSV_ATTRIBUTE_COLUMNS]
            )
    tmp.replace(path)
    return path


def load_csv(
    path: Path | str, run_metadata: Mapping[str, Mapping[str, str]] | None = None
) -> EventLog:
    """Read an exported log; run_metadata (run_id -> extra attrs) restores the
    run attributes the CSV layout does not carry (run_name, event_trigger)."""
    path = Path(path)
    events: list[EventRecord] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected event-log header {reader.fieldnames}")
        for row in reader:
            attrs = {col: row[col] for col in _CSV_ATTRIBUTE_COLUMNS if row[col] != ""}
            if run_metadata and attrs.get("run_id") in run_metadata:
                for key, value in run_metadata[attrs["run_id"]].items():
                    attrs.setdefault(key, value)
            events.append(
                EventRecord(
                    pr_id=int(row["pr_id"]),
                    activity=ActivityKind(row["ACTIVITY"]),
                    date=parse_rfc3339(row["DATE"]),
                    attributes=attrs,
                )
            )
    return EventLog.from_events(events)


def run_metadata_from_snapshot(snapshot: FetchSnapshot) -> dict[str, dict[str, str]]:
    return {
        str(r.run_id): {"run_name": r.run_name, "event_trigger": r.event_trigger}
        for r in snapshot.runs
    }


def write_rejects(rejects: Sequence[MeltReject], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for reject in rejects:
            fh.write(json.dumps(reject.to_json(), sort_keys=True) + "\n")
    return path
