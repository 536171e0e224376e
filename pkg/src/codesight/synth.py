"""Synthetic PR snapshots with a known, learnable remaining-time law.

Each case draws a complexity class (visible through its branch prefix, change
size, and touched filetypes) and a total duration equal to its deadline times
a scale factor: compliant cases draw the scale from a band strictly below 1,
non-compliant ones from a band strictly above. The total is spread over the
trace's transitions by fixed per-position shares with bounded multiplicative
jitter, so any observed prefix gap reveals the total up to that noise and the
remaining time is a near-deterministic function of what a model can see. The
exact law is emitted beside the snapshot as law.json.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .features.prefix import DEADLINE_HOURS, ComplexityLabel
from .ingestion.models import (
    FetchSnapshot,
    RawCommit,
    RawPullRequest,
    RawPullRequestDetail,
    RawWorkflowRun,
    RepoRef,
)
from .timestamps import parse_rfc3339

DEFAULT_START = parse_rfc3339("2024-01-01T00:00:00Z")

COMPLIANT_BAND = (0.35, 0.80)
NONCOMPLIANT_BAND = (1.25, 2.20)

_AUTHORS = ("alice", "bruno", "chen", "dympna", "eko", "farah")

# Per-complexity structure: trace shape, branch prefix, change-size ranges,
# and the filetype pool commits draw from.
_COMPLEXITY: dict[ComplexityLabel, dict[str, Any]] = {
    ComplexityLabel.S: {
        "branch": "hotfix",
        "n_commits": 2,
        "n_runs": 1,
        "files": (1, 2),
        "lines": (5, 50),
        "filetypes": (".css", ".html"),
    },
    ComplexityLabel.M: {
        "branch": "bug",
        "n_commits": 3,
        "n_runs": 1,
        "files": (3, 5),
        "lines": (51, 200),
        "filetypes": (".js", ".css"),
    },
    ComplexityLabel.L: {
        "branch": "fix",
        "n_commits": 4,
        "n_runs": 2,
        "files": (6, 15),
        "lines": (201, 1000),
        "filetypes": (".py", ".yaml"),
    },
    ComplexityLabel.XL: {
        "branch": "feature",
        "n_commits": 5,
        "n_runs": 2,
        "files": (16, 40),
        "lines": (1001, 5000),
        "filetypes": (".py", ".proto", ".md"),
    },
}

_COMPLEXITY_ORDER = (
    ComplexityLabel.S,
    ComplexityLabel.M,
    ComplexityLabel.L,
    ComplexityLabel.XL,
)
_COMPLEXITY_WEIGHTS = (0.30, 0.30, 0.25, 0.15)


@dataclass(frozen=True)
class SynthSpec:
    n_cases: int
    seed: int
    compliance_target: float = 0.70
    start: int = DEFAULT_START
    window_days: int = 120
    merged_fraction: float = 0.85
    share_noise: float = 0.10
    deploy_run_name: str = "deploy production"
    deploy_failure_rate: float = 0.20
    ci_failure_rate: float = 0.10
    unmatched_run_every: int = 25
    owner: str = "synthetic"
    repo: str = "demo-service"

    def __post_init__(self) -> None:
        if self.n_cases < 1:
            raise ValueError("n_cases must be >= 1")
        if not 0.0 <= self.compliance_target <= 1.0:
            raise ValueError("compliance_target must be in [0, 1]")


def _hex_sha(rng: np.random.Generator) -> str:
    return bytes(rng.integers(0, 256, size=20, dtype=np.uint8)).hex()


def _transition_weights(
    n_commits: int, n_runs: int, rng: np.random.Generator, noise: float
) -> np.ndarray:
    """Raw share weights for the gaps opening->c1, c1..ck, ck->w1, w1..wr, wr->end."""
    base: list[float] = [0.18]
    base.extend([0.40 / (n_commits - 1)] * (n_commits - 1))
    base.append(0.12)
    if n_runs >= 2:
        base.extend([0.15 / (n_runs - 1)] * (n_runs - 1))
    base.append(0.15)
    jitter = np.exp(rng.uniform(-noise, noise, size=len(base)))
    return np.asarray(base) * jitter


def generate(spec: SynthSpec) -> tuple[FetchSnapshot, dict[str, Any]]:
    """Deterministic snapshot + ground-truth law for the given spec."""
    repo = RepoRef(owner=spec.owner, repo=spec.repo)
    window_seconds = spec.window_days * 86400

    pulls: list[RawPullRequest] = []
    details: list[RawPullRequestDetail] = []
    commits: list[RawCommit] = []
    runs: list[RawWorkflowRun] = []
    law_cases: list[dict[str, Any]] = []

    run_id_counter = 5_000_000

    for i in range(spec.n_cases):
        rng = np.random.default_rng((spec.seed, i))
        label = _COMPLEXITY_ORDER[
            int(rng.choice(len(_COMPLEXITY_ORDER), p=_COMPLEXITY_WEIGHTS))
        ]
        cfg = _COMPLEXITY[label]
        deadline_hours = DEADLINE_HOURS[label]
        deadline_seconds = deadline_hours * 3600

        compliant = bool(rng.random() < spec.compliance_target)
        lo, hi = COMPLIANT_BAND if compliant else NONCOMPLIANT_BAND
        scale = float(rng.uniform(lo, hi))
        total_target = deadline_seconds * scale

        n_commits = int(cfg["n_commits"])
        n_runs = int(cfg["n_runs"])
        weights = _transition_weights(n_commits, n_runs, rng, spec.share_noise)
        gaps = np.maximum(1, np.rint(total_target * weights / weights.sum())).astype(np.int64)

        created_at = spec.start + int(rng.integers(0, window_seconds))
        times = created_at + np.concatenate([[0], np.cumsum(gaps)])
        commit_times = times[1 : 1 + n_commits]
        run_times = times[1 + n_commits : 1 + n_commits + n_runs]
        end_time = int(times[-1])

        merged = bool(rng.random() < spec.merged_fraction)
        author = _AUTHORS[int(rng.integers(0, len(_AUTHORS)))]
        reviewer = _AUTHORS[int(rng.integers(0, len(_AUTHORS)))]
        pr_id = 1001 + i
        pr_number = i + 1

        pool = cfg["filetypes"]
        case_commits: list[RawCommit] = []
        for j, committed_at in enumerate(commit_times):
            exts = {pool[0]}
            for extra in pool[1:]:
                if rng.random() < 0.5:
                    exts.add(extra)
            case_commits.append(
                RawCommit(
                    pr_id=pr_id,
                    commit_sha=_hex_sha(rng),
                    committed_at=int(committed_at),
                    message=f"change {pr_number}.{j + 1}",
                    author=author if rng.random() > 0.05 else None,
                    filetypes=frozenset(exts),
                )
            )
        head_sha = case_commits[-1].commit_sha

        for j, started in enumerate(run_times):
            run_id_counter += 1
            is_deploy = j == n_runs - 1 and rng.random() < 0.5
            fail_rate = spec.deploy_failure_rate if is_deploy else spec.ci_failure_rate
            runs.append(
                RawWorkflowRun(
                    run_id=run_id_counter,
                    run_name=spec.deploy_run_name if is_deploy else "ci checks",
                    head_sha=head_sha,
                    event_trigger="pull_request",
                    status="completed",
                    conclusion="failure" if rng.random() < fail_rate else "success",
                    run_attempt=1,
                    run_started_at=int(started),
                    updated_at=int(started) + int(rng.integers(120, 1800)),
                    created_at=int(started) - 5,
                    actor_trigger=author,
                )
            )

        files = int(rng.integers(cfg["files"][0], cfg["files"][1] + 1))
        lines = int(rng.integers(cfg["lines"][0], cfg["lines"][1] + 1))
        additions = lines - lines // 3
        merged_by = "release-bot" if rng.random() < 0.5 else reviewer

        pulls.append(
            RawPullRequest(
                pr_id=pr_id,
                pr_number=pr_number,
                pr_title=f"{label.value} change #{pr_number}",
                pr_author=author,
                from_branch=f"{cfg['branch']}/task-{pr_number}",
                head_sha=head_sha,
                merge_commit_sha=_hex_sha(rng) if merged else None,
                into_branch="develop",
                created_at=created_at,
                merged_at=end_time if merged else None,
                closed_at=end_time,
                state="closed",
                is_draft=False,
                assignees=(author,),
                reviewers=(reviewer,),
                commits_url=f"https://api.github.com/repos/{repo.slug}/pulls/{pr_number}/commits",
            )
        )
        details.append(
            RawPullRequestDetail(
                pr_number=pr_number,
                labels=(),
                merged_by=merged_by if merged else None,
                commits=n_commits,
                additions=additions,
                deletions=lines - additions,
                changed_files=files,
            )
        )
        commits.extend(case_commits)

        total_actual = end_time - created_at
        law_cases.append(
            {
                "pr_id": pr_id,
                "complexity": label.value,
                "deadline_hours": deadline_hours,
                "target_total_seconds": total_target,
                "total_seconds": total_actual,
                "compliant": total_actual <= deadline_seconds,
                "drawn_compliant": compliant,
                "merged": merged,
            }
        )

        if spec.unmatched_run_every and (i + 1) % spec.unmatched_run_every == 0:
            run_id_counter += 1
            started = spec.start + int(rng.integers(0, window_seconds))
            runs.append(
                RawWorkflowRun(
                    run_id=run_id_counter,
                    run_name=spec.deploy_run_name,
                    head_sha=_hex_sha(rng),
                    event_trigger="schedule",
                    status="completed",
                    conclusion="success" if rng.random() < 0.8 else "failure",
                    run_attempt=1,
                    run_started_at=started,
                    updated_at=started + 600,
                    created_at=started - 5,
                    actor_trigger="release-bot",
                )
            )

    snapshot = FetchSnapshot(
        repo=repo,
        fetched_at=spec.start + window_seconds + 86400 * 8,
        pulls=tuple(pulls),
        details=tuple(details),
        commits=tuple(commits),
        runs=tuple(runs),
    )
    law = {
        "schema_version": 1,
        "seed": spec.seed,
        "n_cases": spec.n_cases,
        "compliance_target": spec.compliance_target,
        "share_noise": spec.share_noise,
        "bands": {"compliant": list(COMPLIANT_BAND), "noncompliant": list(NONCOMPLIANT_BAND)},
        "complexity": {
            label.value: {
                "deadline_hours": DEADLINE_HOURS[label],
                "n_commits": _COMPLEXITY[label]["n_commits"],
                "n_runs": _COMPLEXITY[label]["n_runs"],
                "branch_prefix": _COMPLEXITY[label]["branch"],
            }
            for label in _COMPLEXITY_ORDER
        },
        "cases": law_cases,
    }
    return snapshot, law
