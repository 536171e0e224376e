"""GitHub data acquisition: REST fetch, replayable fixtures, snapshot files."""

from .client import (
    CredentialError,
    FixtureBackend,
    FixtureWriter,
    GitHubClient,
    HttpBackend,
    IngestionError,
    NotFoundError,
    PayloadError,
    RateLimitError,
    TransportError,
)
from .fetch import (
    fetch_commit_filetypes,
    fetch_pr_commits,
    fetch_pull_request_detail,
    fetch_pull_requests,
    fetch_snapshot,
    fetch_workflow_runs,
)
from .models import (
    DecodeError,
    FetchSnapshot,
    RawCommit,
    RawPullRequest,
    RawPullRequestDetail,
    RawWorkflowRun,
    RepoRef,
)
from .store import SnapshotFormatError, load_snapshot, save_snapshot

__all__ = [
    "CredentialError",
    "DecodeError",
    "FetchSnapshot",
    "FixtureBackend",
    "FixtureWriter",
    "GitHubClient",
    "HttpBackend",
    "IngestionError",
    "NotFoundError",
    "PayloadError",
    "RateLimitError",
    "RawCommit",
    "RawPullRequest",
    "RawPullRequestDetail",
    "RawWorkflowRun",
    "RepoRef",
    "SnapshotFormatError",
    "TransportError",
    "fetch_commit_filetypes",
    "fetch_pr_commits",
    "fetch_pull_request_detail",
    "fetch_pull_requests",
    "fetch_snapshot",
    "fetch_workflow_runs",
    "load_snapshot",
    "save_snapshot",
]
