"""Fetch operations against the GitHub REST endpoints.

Each operation parses the payload into the raw-record model strictly: a
missing or mistyped field raises DecodeError naming the offending field
rather than producing a half-filled record.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import PurePosixPath
from typing import Any, Mapping

from ..timestamps import parse_rfc3339
from .client import GitHubClient, NotFoundError
from .models import (
    DecodeError,
    FetchSnapshot,
    RawCommit,
    RawPullRequest,
    RawPullRequestDetail,
    RawWorkflowRun,
    RepoRef,
)

NO_EXTENSION = "<none>"
DEFAULT_FILETYPE_WORKERS = 4


def _field(obj: Mapping[str, Any], key: str, ctx: str) -> Any:
    if not isinstance(obj, Mapping) or key not in obj:
        raise DecodeError(f"{ctx}.{key}", "missing field")
    return obj[key]


def _ts_field(obj: Mapping[str, Any], key: str, ctx: str) -> int:
    value = _field(obj, key, ctx)
    if not isinstance(value, str):
        raise DecodeError(f"{ctx}.{key}", f"expected timestamp string, got {value!r}")
    try:
        return parse_rfc3339(value)
    except ValueError as exc:
        raise DecodeError(f"{ctx}.{key}", str(exc)) from exc


def _opt_ts_field(obj: Mapping[str, Any], key: str, ctx: str) -> int | None:
    value = _field(obj, key, ctx)
    if value is None:
        return None
    if not isinstance(value, str):
        raise DecodeError(f"{ctx}.{key}", f"expected timestamp string or null, got {value!r}")
    try:
        return parse_rfc3339(value)
    except ValueError as exc:
        raise DecodeError(f"{ctx}.{key}", str(exc)) from exc


def _login(value: Any) -> str | None:
    if value is None:
        return None
    if isinstance(value, Mapping) and isinstance(value.get("login"), str):
        return value["login"]
    return None


def parse_pull(payload: Mapping[str, Any], ctx: str = "pull") -> RawPullRequest:
    head = _field(payload, "head", ctx)
    base = _field(payload, "base", ctx)
    author = _login(_field(payload, "user", ctx))
    if author is None:
        raise DecodeError(f"{ctx}.user.login", "missing PR author login")
    return RawPullRequest(
        pr_id=int(_field(payload, "id", ctx)),
        pr_number=int(_field(payload, "number", ctx)),
        pr_title=str(_field(payload, "title", ctx)),
        pr_author=author,
        from_branch=str(_field(head, "ref", f"{ctx}.head")),
        head_sha=str(_field(head, "sha", f"{ctx}.head")),
        merge_commit_sha=payload.get("merge_commit_sha"),
        into_branch=str(_field(base, "ref", f"{ctx}.base")),
        created_at=_ts_field(payload, "created_at", ctx),
        merged_at=_opt_ts_field(payload, "merged_at", ctx),
        closed_at=_opt_ts_field(payload, "closed_at", ctx),
        state=str(_field(payload, "state", ctx)),
        is_draft=bool(payload.get("draft", False)),
        assignees=tuple(login for a in payload.get("assignees") or [] if (login := _login(a))),
        reviewers=tuple(
            login for r in payload.get("requested_reviewers") or [] if (login := _login(r))
        ),
        commits_url=str(_field(payload, "commits_url", ctx)),
    )


def fetch_pull_requests(client: GitHubClient, repo: RepoRef) -> list[RawPullRequest]:
    """All PRs (state=all), every page, optionally filtered to the target branch."""
    path = f"/repos/{repo.owner}/{repo.repo}/pulls"
    pulls = [
        parse_pull(item, f"pulls[{i}]")
        for i, item in enumerate(client.paginate(path, {"state": "all"}))
    ]
    if repo.branch:
        pulls = [p for p in pulls if p.into_branch == repo.branch]
    return pulls


def fetch_pull_request_detail(
    client: GitHubClient, repo: RepoRef, pr_number: int
) -> RawPullRequestDetail:
    path = f"/repos/{repo.owner}/{repo.repo}/pulls/{pr_number}"
    try:
        payload = client.get_json(path)
    except NotFoundError as exc:
        raise NotFoundError(f"unknown PR #{pr_number} in {repo.slug}") from exc
    ctx = f"pull#{pr_number}"
    labels = tuple(
        str(_field(lab, "name", f"{ctx}.labels")) for lab in payload.get("labels") or []
    )
    return RawPullRequestDetail(
        pr_number=int(_field(payload, "number", ctx)),
        labels=labels,
        merged_by=_login(payload.get("merged_by")),
        commits=int(_field(payload, "commits", ctx)),
        additions=int(_field(payload, "additions", ctx)),
        deletions=int(_field(payload, "deletions", ctx)),
        changed_files=int(_field(payload, "changed_files", ctx)),
    )


def fetch_pr_commits(
    client: GitHubClient, repo: RepoRef, pr_id: int, pr_number: int
) -> list[RawCommit]:
    """Commits of one PR, ordered by committed_at ascending, filetypes not yet filled."""
    path = f"/repos/{repo.owner}/{repo.repo}/pulls/{pr_number}/commits"
    try:
        items = list(client.paginate(path))
    except NotFoundError as exc:
        raise NotFoundError(f"unknown PR #{pr_number} in {repo.slug}") from exc
    commits = []
    for i, item in enumerate(items):
        ctx = f"pr#{pr_number}.commits[{i}]"
        commit_obj = _field(item, "commit", ctx)
        committer = _field(commit_obj, "committer", f"{ctx}.commit")
        commits.append(
            RawCommit(
                pr_id=pr_id,
                commit_sha=str(_field(item, "sha", ctx)),
                committed_at=_ts_field(committer, "date", f"{ctx}.commit.committer"),
                message=str(_field(commit_obj, "message", f"{ctx}.commit")),
                author=_login(item.get("author")),
            )
        )
    commits.sort(key=lambda c: c.committed_at)
    return commits


def extension_of(filename: str) -> str:
    """Lowercase dot-prefixed extension of a path; extensionless files map to <none>."""
    suffix = PurePosixPath(filename).suffix
    return suffix.lower() if suffix else NO_EXTENSION


def fetch_commit_filetypes(client: GitHubClient, repo: RepoRef, commit_sha: str) -> frozenset[str]:
    path = f"/repos/{repo.owner}/{repo.repo}/commits/{commit_sha}"
    try:
        payload = client.get_json(path)
    except NotFoundError as exc:
        raise NotFoundError(f"unknown commit {commit_sha} in {repo.slug}") from exc
    files = payload.get("files") or []
    ctx = f"commit {commit_sha}"
    return frozenset(extension_of(str(_field(f, "filename", ctx))) for f in files)


def parse_run(payload: Mapping[str, Any], ctx: str = "run") -> RawWorkflowRun:
    actor = _login(payload.get("triggering_actor")) or _login(payload.get("actor")) or ""
    return RawWorkflowRun(
        run_id=int(_field(payload, "id", ctx)),
        run_name=str(_field(payload, "name", ctx)),
        head_sha=str(_field(payload, "head_sha", ctx)),
        event_trigger=str(_field(payload, "event", ctx)),
        status=str(_field(payload, "status", ctx)),
        conclusion=payload.get("conclusion"),
        run_attempt=int(payload.get("run_attempt") or 1),
        run_started_at=_ts_field(payload, "run_started_at", ctx),
        updated_at=_ts_field(payload, "updated_at", ctx),
        created_at=_ts_field(payload, "created_at", ctx),
        actor_trigger=actor,
    )


def fetch_workflow_runs(client: GitHubClient, repo: RepoRef) -> list[RawWorkflowRun]:
    path = f"/repos/{repo.owner}/{repo.repo}/actions/runs"
    return [
        parse_run(item, f"runs[{i}]")
        for i, item in enumerate(client.paginate(path, items_key="workflow_runs"))
    ]


def fetch_snapshot(
    client: GitHubClient,
    repo: RepoRef,
    fetched_at: int | None = None,
    filetype_workers: int = DEFAULT_FILETYPE_WORKERS,
) -> FetchSnapshot:
    """Full fetch: PRs, details, commits (with filetypes), workflow runs.

    Per-commit filetype calls are the bulk of the request volume and run
    through a bounded thread pool; everything else is sequential.
    """
    pulls = fetch_pull_requests(client, repo)
    details = [fetch_pull_request_detail(client, repo, p.pr_number) for p in pulls]
    commits: list[RawCommit] = []
    for pull in pulls:
        commits.extend(fetch_pr_commits(client, repo, pull.pr_id, pull.pr_number))
    if commits:
        with ThreadPoolExecutor(max_workers=max(1, filetype_workers)) as pool:
            filetype_sets = list(
                pool.map(lambda c: fetch_commit_filetypes(client, repo, c.commit_sha), commits)
            )
        commits = [
            RawCommit(
                pr_id=c.pr_id,
                commit_sha=c.commit_sha,
                committed_at=c.committed_at,
                message=c.message,
                author=c.author,
                filetypes=fts,
            )
            for c, fts in zip(commits, filetype_sets)
        ]
    runs = fetch_workflow_runs(client, repo)
    return FetchSnapshot(
        repo=repo,
        fetched_at=int(time.time()) if fetched_at is None else fetched_at,
        pulls=tuple(pulls),
        details=tuple(details),
        commits=tuple(commits),
        runs=tuple(runs),
    )
