"""Shared builders for snapshots, events, and GitHub API fixture payloads."""

from __future__ import annotations

from codesight.eventlog import ActivityKind, EventLog, EventRecord
from codesight.ingestion import (
    FetchSnapshot,
    RawCommit,
    RawPullRequest,
    RawPullRequestDetail,
    RawWorkflowRun,
    RepoRef,
)
from codesight.timestamps import format_utc, parse_rfc3339

T0 = parse_rfc3339("2024-03-01T00:00:00Z")

REPO = RepoRef(owner="acme", repo="widgets")


def make_pull(
    pr_id: int,
    pr_number: int,
    created_at: int,
    merged_at: int | None = None,
    closed_at: int | None = None,
    author: str = "alice",
    from_branch: str = "feature/x",
    into_branch: str = "develop",
    head_sha: str | None = None,
    merge_commit_sha: str | None = None,
    state: str | None = None,
) -> RawPullRequest:
    return RawPullRequest(
        pr_id=pr_id,
        pr_number=pr_number,
        pr_title=f"PR {pr_number}",
        pr_author=author,
        from_branch=from_branch,
        head_sha=head_sha or f"head{pr_id:04x}",
        merge_commit_sha=merge_commit_sha,
        into_branch=into_branch,
        created_at=created_at,
        merged_at=merged_at,
        closed_at=closed_at,
        state=state or ("closed" if closed_at else "open"),
        is_draft=False,
        assignees=(author,),
        reviewers=(),
        commits_url=f"https://api.github.com/repos/acme/widgets/pulls/{pr_number}/commits",
    )


def make_detail(
    pr_number: int,
    additions: int = 10,
    deletions: int = 5,
    changed_files: int = 2,
    commits: int = 1,
    labels: tuple[str, ...] = (),
    merged_by: str | None = None,
) -> RawPullRequestDetail:
    return RawPullRequestDetail(
        pr_number=pr_number,
        labels=labels,
        merged_by=merged_by,
        commits=commits,
        additions=additions,
        deletions=deletions,
        changed_files=changed_files,
    )


def make_commit(
    pr_id: int,
    sha: str,
    committed_at: int,
    author: str | None = "alice",
    filetypes: frozenset[str] = frozenset({".py"}),
) -> RawCommit:
    return RawCommit(
        pr_id=pr_id,
        commit_sha=sha,
        committed_at=committed_at,
        message=f"commit {sha}",
        author=author,
        filetypes=filetypes,
    )


def make_run(
    run_id: int,
    head_sha: str,
    started_at: int,
    conclusion: str | None = "success",
    run_name: str = "ci",
    event_trigger: str = "pull_request",
    updated_at: int | None = None,
) -> RawWorkflowRun:
    return RawWorkflowRun(
        run_id=run_id,
        run_name=run_name,
        head_sha=head_sha,
        event_trigger=event_trigger,
        status="completed",
        conclusion=conclusion,
        run_attempt=1,
        run_started_at=started_at,
        updated_at=updated_at if updated_at is not None else started_at + 60,
        created_at=started_at - 1,
        actor_trigger="alice",
    )


def make_snapshot(
    pulls=(),
    details=(),
    commits=(),
    runs=(),
    repo: RepoRef = REPO,
    fetched_at: int = T0 + 90 * 86400,
) -> FetchSnapshot:
    return FetchSnapshot(
        repo=repo,
        fetched_at=fetched_at,
        pulls=tuple(pulls),
        details=tuple(details),
        commits=tuple(commits),
        runs=tuple(runs),
    )


def event(pr_id: int, kind: ActivityKind, ts: int, **attrs: str) -> EventRecord:
    return EventRecord(pr_id=pr_id, activity=kind, date=ts, attributes=dict(attrs))


def log_of(*events: EventRecord) -> EventLog:
    return EventLog.from_events(events)


# --- GitHub API payload builders (fixture side) -------------------------------

def gh_pull_payload(
    pr_id: int,
    number: int,
    created_at: int,
    state: str = "open",
    draft: bool = False,
    merged_at: int | None = None,
    closed_at: int | None = None,
    base_ref: str = "develop",
) -> dict:
    return {
        "id": pr_id,
        "number": number,
        "title": f"PR number {number}",
        "user": {"login": f"user{number % 5}"},
        "head": {"ref": f"feature/{number}", "sha": f"sha{pr_id:06x}"},
        "base": {"ref": base_ref},
        "merge_commit_sha": f"merge{pr_id:06x}" if merged_at else None,
        "created_at": format_utc(created_at),
        "merged_at": format_utc(merged_at) if merged_at else None,
        "closed_at": format_utc(closed_at) if closed_at else None,
        "state": state,
        "draft": draft,
        "assignees": [{"login": "alice"}],
        "requested_reviewers": [{"login": "bruno"}],
        "commits_url": f"https://api.github.com/repos/acme/widgets/pulls/{number}/commits",
    }


def gh_commit_payload(sha: str, committed_at: int, author: str | None = "alice") -> dict:
    return {
        "sha": sha,
        "commit": {
            "message": f"work on {sha}",
            "committer": {"date": format_utc(committed_at)},
        },
        "author": {"login": author} if author else None,
    }


def gh_commit_detail_payload(sha: str, filenames: list[str]) -> dict:
    return {"sha": sha, "files": [{"filename": name} for name in filenames]}


def gh_run_payload(
    run_id: int,
    head_sha: str,
    started_at: int,
    conclusion: str | None = "success",
    name: str = "ci",
) -> dict:
    return {
        "id": run_id,
        "name": name,
        "head_sha": head_sha,
        "event": "pull_request",
        "status": "completed",
        "conclusion": conclusion,
        "run_attempt": 1,
        "run_started_at": format_utc(started_at),
        "updated_at": format_utc(started_at + 120),
        "created_at": format_utc(started_at - 2),
        "triggering_actor": {"login": "alice"},
    }


def gh_detail_payload(
    number: int,
    additions: int = 10,
    deletions: int = 2,
    changed_files: int = 3,
    commits: int = 1,
    labels: list[str] = (),
    merged_by: str | None = None,
) -> dict:
    return {
        "number": number,
        "labels": [{"name": name} for name in labels],
        "merged_by": {"login": merged_by} if merged_by else None,
        "commits": commits,
        "additions": additions,
        "deletions": deletions,
        "changed_files": changed_files,
    }
