"""Raw-record data model: verbatim images of the GitHub API payload fields.

Snapshots are immutable once constructed and round-trip losslessly through
the JSON snapshot file (schema_version 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from ..timestamps import format_utc, parse_rfc3339


class DecodeError(ValueError):
    """A payload or snapshot field is missing or has the wrong shape."""

    def __init__(self, field_path: str, message: str) -> None:
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


@dataclass(frozen=True)
class RepoRef:
    owner: str
    repo: str
    branch: str | None = None

    def __post_init__(self) -> None:
        for name, value in (("owner", self.owner), ("repo", self.repo)):
            if not value:
                raise ValueError(f"RepoRef.{name} must be non-empty")
            if "/" in value:
                raise ValueError(f"RepoRef.{name} must not contain '/': {value!r}")

    @property
    def slug(self) -> str:
        return f"{self.owner}/{self.repo}"


@dataclass(frozen=True)
class RawPullRequest:
    pr_id: int
    pr_number: int
    pr_title: str
    pr_author: str
    from_branch: str
    head_sha: str
    merge_commit_sha: str | None
    into_branch: str
    created_at: int
    merged_at: int | None
    closed_at: int | None
    state: str
    is_draft: bool
    assignees: tuple[str, ...]
    reviewers: tuple[str, ...]
    commits_url: str

    def __post_init__(self) -> None:
        if self.state not in ("open", "closed"):
            raise ValueError(f"pull request state must be open/closed, got {self.state!r}")
        if self.merged_at is not None and self.merged_at < self.created_at:
            raise ValueError(f"pr {self.pr_id}: merged_at precedes created_at")
        if self.closed_at is not None and self.closed_at < self.created_at:
            raise ValueError(f"pr {self.pr_id}: closed_at precedes created_at")


@dataclass(frozen=True)
class RawPullRequestDetail:
    pr_number: int
    labels: tuple[str, ...]
    merged_by: str | None
    commits: int
    additions: int
    deletions: int
    changed_files: int

    def __post_init__(self) -> None:
        for name in ("commits", "additions", "deletions", "changed_files"):
            if getattr(self, name) < 0:
                raise ValueError(f"detail #{self.pr_number}: {name} must be >= 0")


@dataclass(frozen=True)
class RawCommit:
    pr_id: int
    commit_sha: str
    committed_at: int
    message: str
    author: str | None
    filetypes: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for ext in self.filetypes:
            if ext != ext.lower():
                raise ValueError(f"commit {self.commit_sha}: extension not lowercase: {ext!r}")
            if ext != "<none>" and not ext.startswith("."):
                raise ValueError(f"commit {self.commit_sha}: extension not dot-prefixed: {ext!r}")


@dataclass(frozen=True)
class RawWorkflowRun:
    run_id: int
    run_name: str
    head_sha: str
    event_trigger: str
    status: str
    conclusion: str | None
    run_attempt: int
    run_started_at: int
    updated_at: int
    created_at: int
    actor_trigger: str

    def __post_init__(self) -> None:
        if self.run_attempt < 1:
            raise ValueError(f"run {self.run_id}: run_attempt must be >= 1")
        if self.updated_at < self.run_started_at:
            raise ValueError(f"run {self.run_id}: updated_at precedes run_started_at")

    @property
    def duration_ms(self) -> int:
        return max(0, (self.updated_at - self.run_started_at) * 1000)


@dataclass(frozen=True)
class FetchSnapshot:
    repo: RepoRef
    fetched_at: int
    pulls: tuple[RawPullRequest, ...]
    details: tuple[RawPullRequestDetail, ...]
    commits: tuple[RawCommit, ...]
    runs: tuple[RawWorkflowRun, ...]

    def __post_init__(self) -> None:
        pr_ids = {p.pr_id for p in self.pulls}
        pr_numbers = {p.pr_number for p in self.pulls}
        for commit in self.commits:
            if commit.pr_id not in pr_ids:
                raise ValueError(f"commit {commit.commit_sha} references unknown pr_id {commit.pr_id}")
        for detail in self.details:
            if detail.pr_number not in pr_numbers:
                raise ValueError(f"detail references unknown pr_number {detail.pr_number}")
        seen: set[str] = set()
        for commit in self.commits:
            if commit.commit_sha in seen:
                raise ValueError(f"duplicate commit sha in snapshot: {commit.commit_sha}")
            seen.add(commit.commit_sha)

    def details_by_number(self) -> dict[int, RawPullRequestDetail]:
        return {d.pr_number: d for d in self.details}

    def commits_by_pr(self) -> dict[int, list[RawCommit]]:
        grouped: dict[int, list[RawCommit]] = {}
        for commit in self.commits:
            grouped.setdefault(commit.pr_id, []).append(commit)
        return grouped


# --- JSON codecs -------------------------------------------------------------

def _opt_ts(value: int | None) -> str | None:
    return None if value is None else format_utc(value)


def _pull_to_dict(p: RawPullRequest) -> dict[str, Any]:
    return {
        "pr_id": p.pr_id,
        "pr_number": p.pr_number,
        "pr_title": p.pr_title,
        "pr_author": p.pr_author,
        "from_branch": p.from_branch,
        "head_sha": p.head_sha,
        "merge_commit_sha": p.merge_commit_sha,
        "into_branch": p.into_branch,
        "created_at": format_utc(p.created_at),
        "merged_at": _opt_ts(p.merged_at),
        "closed_at": _opt_ts(p.closed_at),
        "state": p.state,
        "is_draft": p.is_draft,
        "assignees": list(p.assignees),
        "reviewers": list(p.reviewers),
        "commits_url": p.commits_url,
    }


def _detail_to_dict(d: RawPullRequestDetail) -> dict[str, Any]:
    return {
        "pr_number": d.pr_number,
        "labels": list(d.labels),
        "merged_by": d.merged_by,
        "commits": d.commits,
        "additions": d.additions,
        "deletions": d.deletions,
        "changed_files": d.changed_files,
    }


def _commit_to_dict(c: RawCommit) -> dict[str, Any]:
    return {
        "pr_id": c.pr_id,
        "commit_sha": c.commit_sha,
        "committed_at": format_utc(c.committed_at),
        "message": c.message,
        "author": c.author,
        "filetypes": sorted(c.filetypes),
    }


def _run_to_dict(r: RawWorkflowRun) -> dict[str, Any]:
    return {
        "run_id": r.run_id,
        "run_name": r.run_name,
        "head_sha": r.head_sha,
        "event_trigger": r.event_trigger,
        "status": r.status,
        "conclusion": r.conclusion,
        "run_attempt": r.run_attempt,
        "run_started_at": format_utc(r.run_started_at),
        "updated_at": format_utc(r.updated_at),
        "created_at": format_utc(r.created_at),
        "actor_trigger": r.actor_trigger,
        "duration_ms": r.duration_ms,
    }


def snapshot_to_dict(snapshot: FetchSnapshot) -> dict[str, Any]:
    return {
        "schema_version": 1,
        "repo": {
            "owner": snapshot.repo.owner,
            "repo": snapshot.repo.repo,
            "branch": snapshot.repo.branch,
        },
        "fetched_at": format_utc(snapshot.fetched_at),
        "pulls": [_pull_to_dict(p) for p in snapshot.pulls],
        "details": [_detail_to_dict(d) for d in snapshot.details],
        "commits": [_commit_to_dict(c) for c in snapshot.commits],
        "runs": [_run_to_dict(r) for r in snapshot.runs],
    }


def _get(obj: Mapping[str, Any], key: str, ctx: str) -> Any:
    if key not in obj:
        raise DecodeError(f"{ctx}.{key}", "missing field")
    return obj[key]


def _get_int(obj: Mapping[str, Any], key: str, ctx: str) -> int:
    value = _get(obj, key, ctx)
    if isinstance(value, bool) or not isinstance(value, int):
        raise DecodeError(f"{ctx}.{key}", f"expected integer, got {value!r}")
    return value


def _get_str(obj: Mapping[str, Any], key: str, ctx: str) -> str:
    value = _get(obj, key, ctx)
    if not isinstance(value, str):
        raise DecodeError(f"{ctx}.{key}", f"expected string, got {value!r}")
    return value


def _get_opt_str(obj: Mapping[str, Any], key: str, ctx: str) -> str | None:
    value = _get(obj, key, ctx)
    if value is not None and not isinstance(value, str):
        raise DecodeError(f"{ctx}.{key}", f"expected string or null, got {value!r}")
    return value


def _get_ts(obj: Mapping[str, Any], key: str, ctx: str) -> int:
    value = _get_str(obj, key, ctx)
    try:
        return parse_rfc3339(value)
    except ValueError as exc:
        raise DecodeError(f"{ctx}.{key}", str(exc)) from exc


def _get_opt_ts(obj: Mapping[str, Any], key: str, ctx: str) -> int | None:
    value = _get_opt_str(obj, key, ctx)
    if value is None:
        return None
    try:
        return parse_rfc3339(value)
    except ValueError as exc:
        raise DecodeError(f"{ctx}.{key}", str(exc)) from exc


def _get_str_list(obj: Mapping[str, Any], key: str, ctx: str) -> tuple[str, ...]:
    value = _get(obj, key, ctx)
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise DecodeError(f"{ctx}.{key}", f"expected list of strings, got {value!r}")
    return tuple(value)


def pull_from_dict(obj: Mapping[str, Any], ctx: str = "pull") -> RawPullRequest:
    return RawPullRequest(
        pr_id=_get_int(obj, "pr_id", ctx),
        pr_number=_get_int(obj, "pr_number", ctx),
        pr_title=_get_str(obj, "pr_title", ctx),
        pr_author=_get_str(obj, "pr_author", ctx),
        from_branch=_get_str(obj, "from_branch", ctx),
        head_sha=_get_str(obj, "head_sha", ctx),
        merge_commit_sha=_get_opt_str(obj, "merge_commit_sha", ctx),
        into_branch=_get_str(obj, "into_branch", ctx),
        created_at=_get_ts(obj, "created_at", ctx),
        merged_at=_get_opt_ts(obj, "merged_at", ctx),
        closed_at=_get_opt_ts(obj, "closed_at", ctx),
        state=_get_str(obj, "state", ctx),
        is_draft=bool(_get(obj, "is_draft", ctx)),
        assignees=_get_str_list(obj, "assignees", ctx),
        reviewers=_get_str_list(obj, "reviewers", ctx),
        commits_url=_get_str(obj, "commits_url", ctx),
    )


def detail_from_dict(obj: Mapping[str, Any], ctx: str = "detail") -> RawPullRequestDetail:
    return RawPullRequestDetail(
        pr_number=_get_int(obj, "pr_number", ctx),
        labels=_get_str_list(obj, "labels", ctx),
        merged_by=_get_opt_str(obj, "merged_by", ctx),
        commits=_get_int(obj, "commits", ctx),
        additions=_get_int(obj, "additions", ctx),
        deletions=_get_int(obj, "deletions", ctx),
        changed_files=_get_int(obj, "changed_files", ctx),
    )


def commit_from_dict(obj: Mapping[str, Any], ctx: str = "commit") -> RawCommit:
    return RawCommit(
        pr_id=_get_int(obj, "pr_id", ctx),
        commit_sha=_get_str(obj, "commit_sha", ctx),
        committed_at=_get_ts(obj, "committed_at", ctx),
        message=_get_str(obj, "message", ctx),
        author=_get_opt_str(obj, "author", ctx),
        filetypes=frozenset(_get_str_list(obj, "filetypes", ctx)),
    )


def run_from_dict(obj: Mapping[str, Any], ctx: str = "run") -> RawWorkflowRun:
    return RawWorkflowRun(
        run_id=_get_int(obj, "run_id", ctx),
        run_name=_get_str(obj, "run_name", ctx),
        head_sha=_get_str(obj, "head_sha", ctx),
        event_trigger=_get_str(obj, "event_trigger", ctx),
        status=_get_str(obj, "status", ctx),
        conclusion=_get_opt_str(obj, "conclusion", ctx),
        run_attempt=_get_int(obj, "run_attempt", ctx),
        run_started_at=_get_ts(obj, "run_started_at", ctx),
        updated_at=_get_ts(obj, "updated_at", ctx),
        created_at=_get_ts(obj, "created_at", ctx),
        actor_trigger=_get_str(obj, "actor_trigger", ctx),
    )


def snapshot_from_dict(obj: Mapping[str, Any]) -> FetchSnapshot:
    repo_obj = _get(obj, "repo", "snapshot")
    if not isinstance(repo_obj, Mapping):
        raise DecodeError("snapshot.repo", f"expected object, got {repo_obj!r}")
    repo = RepoRef(
        owner=_get_str(repo_obj, "owner", "snapshot.repo"),
        repo=_get_str(repo_obj, "repo", "snapshot.repo"),
        branch=_get_opt_str(repo_obj, "branch", "snapshot.repo"),
    )
    pulls = tuple(
        pull_from_dict(p, f"pulls[{i}]") for i, p in enumerate(_get(obj, "pulls", "snapshot"))
    )
    details = tuple(
        detail_from_dict(d, f"details[{i}]") for i, d in enumerate(_get(obj, "details", "snapshot"))
    )
    commits = tuple(
        commit_from_dict(c, f"commits[{i}]") for i, c in enumerate(_get(obj, "commits", "snapshot"))
    )
    runs = tuple(
        run_from_dict(r, f"runs[{i}]") for i, r in enumerate(_get(obj, "runs", "snapshot"))
    )
    return FetchSnapshot(
        repo=repo,
        fetched_at=_get_ts(obj, "fetched_at", "snapshot"),
        pulls=pulls,
        details=details,
        commits=commits,
        runs=runs,
    )
