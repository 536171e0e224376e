"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Runs entirely on the primary component (snapshot through
exported dataset and mining report), no model required."""

from __future__ import annotations

import time
from collections import Counter
from statistics import mean, median

import numpy as np
import pytest
from helpers import T0, event
from test_mining import brute_durations, brute_transitions, brute_variants, random_log

from codesight import pipeline
from codesight.eventlog import (
    ActivityKind,
    EventLog,
    build_event_log,
    melt_date_columns,
)
from codesight.features import (
    ComplexityLabel,
    build_prefix_samples,
    build_sample,
    encode_activities,
    encode_dataset,
    nearest_rank_percentile,
    split_dataset,
)
from codesight.mining import (
    build_traces,
    case_duration,
    discover_variants,
    dora_metrics,
    transition_stats,
)
from codesight.synth import SynthSpec, generate

# Upper-tail chi-square critical value, df=3, alpha=0.01.
CHI2_DF3_CRIT_P01 = 11.344867

VOCAB = {
    "Commit": 1,
    "PR Closure": 2,
    "PR Merge": 3,
    "PR Opening": 4,
    "Workflow Run": 5,
}


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: {status}{suffix}")
    assert ok, f"{name} failed{suffix}"


def brute_force_cell_scan(rows):
    cells = []
    for row in rows:
        pr_id = row.get("pr_id")
        if not isinstance(pr_id, int) or isinstance(pr_id, bool):
            continue
        for column, value in row.items():
            if column.startswith("Fch") and value is not None and value != "":
                cells.append((pr_id, column, value))
    return cells


def test_melting_oracle():
    """200 random tables: melt output equals a brute-force cell scan, < 5 s."""
    rng = np.random.default_rng(101)
    started = time.monotonic()
    ok = True
    for _ in range(200):
        n_rows = int(rng.integers(0, 21))
        n_cols = int(rng.integers(1, 7))
        columns = [f"Fch col{i}" for i in range(n_cols)]
        rows = []
        for _r in range(n_rows):
            row: dict[str, object] = {"pr_id": int(rng.integers(1, 10))}
            for col in columns:
                row[col] = None if rng.random() < 0.20 else T0 + int(rng.integers(0, 10**6))
            row["meta"] = f"m{int(rng.integers(0, 5))}"
            rows.append(row)
        expected = brute_force_cell_scan(rows)
        events, rejects = melt_date_columns(rows)
        got = [(e.pr_id, e.raw_label, e.date) for e in events]
        if rejects or len(events) != len(expected) or Counter(got) != Counter(expected):
            ok = False
            break
    elapsed = time.monotonic() - started
    report("melting-oracle", ok and elapsed < 5.0, f"{elapsed:.2f}s")


def test_event_log_invariants():
    """100 synth snapshots: unique case milestones, sorted, zero rejects, < 10 s."""
    started = time.monotonic()
    ok = True
    for seed in range(100):
        snapshot, _ = generate(SynthSpec(n_cases=20, seed=seed))
        build = build_event_log(snapshot)
        if build.rejects:
            ok = False
            break
        for pr_id, positions in build.log.case_index.items():
            events = [build.log.events[p] for p in positions]
            dates = [e.date for e in events]
            if dates != sorted(dates):
                ok = False
                break
            counts = Counter(e.activity for e in events)
            if (
                counts[ActivityKind.PR_OPENING] > 1
                or counts[ActivityKind.PR_MERGE] > 1
                or counts[ActivityKind.PR_CLOSURE] > 1
                or counts[ActivityKind.PR_OPENING] != 1
            ):
                ok = False
                break
        if not ok:
            break
    elapsed = time.monotonic() - started
    report("event-log-invariants", ok and elapsed < 10.0, f"{elapsed:.2f}s")


def test_mining_oracle():
    """Random logs vs brute force: variants, durations, transitions exact."""
    rng = np.random.default_rng(202)
    ok = True
    for _ in range(40):
        log = random_log(rng, max_cases=50)
        traces = build_traces(log)

        variants = discover_variants(traces)
        if {v.sequence: list(v.case_ids) for v in variants} != brute_variants(traces):
            ok = False
            break
        if sum(v.case_count for v in variants) != len(traces):
            ok = False
            break

        if {t.pr_id: case_duration(t) for t in traces} != brute_durations(traces):
            ok = False
            break

        stats = transition_stats(traces)
        expected = brute_transitions(traces)
        if set(stats) != set(expected):
            ok = False
            break
        for pair, gaps in expected.items():
            s = stats[pair]
            if (
                s.count != len(gaps)
                or s.mean_s != mean(gaps)
                or s.median_s != median(gaps)
                or s.max_s != max(gaps)
            ):
                ok = False
                break
        if not ok:
            break
    report("mining-oracle", ok)


def test_dora_fixture():
    """4 deploys over 2 weeks (3 success, 1 fail, recovery at +3600 s)."""
    week = 7 * 24 * 3600
    window = (T0, T0 + 2 * week)
    events = [
        event(1, ActivityKind.PR_OPENING, T0),
        event(1, ActivityKind.WORKFLOW_RUN, T0 + 1 * 86400,
              run_name="deploy production", conclusion="success", run_id="1"),
        event(1, ActivityKind.WORKFLOW_RUN, T0 + 4 * 86400,
              run_name="deploy production", conclusion="failure", run_id="2"),
        event(1, ActivityKind.WORKFLOW_RUN, T0 + 4 * 86400 + 3600,
              run_name="deploy production", conclusion="success", run_id="3"),
        event(1, ActivityKind.WORKFLOW_RUN, T0 + 9 * 86400,
              run_name="deploy production", conclusion="success", run_id="4"),
    ]
    result = dora_metrics(EventLog.from_events(events), window, "deploy")
    ok = (
        result.deployment_frequency == 2.0
        and result.change_failure_rate == 0.25
        and result.mttr == 3600
    )
    report(
        "dora-fixture",
        ok,
        f"freq={result.deployment_frequency} cfr={result.change_failure_rate} mttr={result.mttr}",
    )


def test_truncation_invariants():
    """10,000 truncations reconstruct exactly; cut uniform on a length-5 trace."""
    rng = np.random.default_rng(303)
    ok = True
    kinds_pool = [ActivityKind.COMMIT, ActivityKind.WORKFLOW_RUN]

    for _ in range(10_000):
        n = int(rng.integers(2, 9))
        deltas = rng.integers(0, 5000, size=n - 1)
        times = np.concatenate([[T0], T0 + np.cumsum(deltas)])
        kinds = (
            [ActivityKind.PR_OPENING]
            + [kinds_pool[int(rng.integers(0, 2))] for _ in range(n - 2)]
            + [ActivityKind.PR_CLOSURE]
        )
        events = [event(1, k, int(t)) for k, t in zip(kinds, times)]
        cut = int(rng.integers(1, n))
        sample = build_sample(events, cut, VOCAB, "w", ComplexityLabel.M, 24)
        full = tuple(VOCAB[k.value] for k in kinds)
        if sample.truncated_activity_list + sample.remaining_activity_list != full:
            ok = False
            break
        if sample.elapsed_time + sample.remaining_time != int(times[-1] - times[0]):
            ok = False
            break

    cuts = rng.integers(1, 5, size=10_000)
    observed = np.bincount(cuts, minlength=5)[1:5]
    expected = 10_000 / 4
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    uniform_ok = chi2 < CHI2_DF3_CRIT_P01
    report("truncation-invariants", ok and uniform_ok, f"chi2={chi2:.3f}")


def _training_dataset(n_cases=120, seed=7):
    snapshot, _ = generate(SynthSpec(n_cases=n_cases, seed=seed))
    log = build_event_log(snapshot).log
    vocab = encode_activities([log])
    samples, _ = build_prefix_samples(log, snapshot, seed)
    split = split_dataset(samples, seed)
    return encode_dataset(split, vocab, seed=seed), split


def test_preprocessing_statistics():
    """Train stats: mean 0 / sd 1 on train, reused (not refit) on val/test."""
    dataset, _ = _training_dataset()
    train = dataset.splits["train"]
    columns = dataset.static_columns

    ok = True
    details = []
    for i, col in enumerate(columns):
        if not col.startswith("num__"):
            continue
        name = col.split("__", 1)[1]
        if name in dataset.params.degenerate_numeric:
            continue
        mu, sd = train.static[:, i].mean(), train.static[:, i].std()
        if abs(mu) >= 1e-9 or abs(sd - 1) >= 1e-9:
            ok = False
            details.append(f"{col}: mean={mu:.2e} sd={sd:.6f}")

    mask = np.zeros(train.dt.shape, dtype=bool)
    for r, n in enumerate(train.lengths):
        mask[r, : int(n)] = True
    dt_mean = train.dt[mask].mean()
    dt_sd = train.dt[mask].std()
    if abs(dt_mean) >= 1e-9 or abs(dt_sd - 1) >= 1e-9:
        ok = False
        details.append(f"dt: mean={dt_mean:.2e} sd={dt_sd:.6f}")

    # Val transformed under train statistics: its own moments are not (0, 1).
    val = dataset.splits["val"]
    val_mask = np.zeros(val.dt.shape, dtype=bool)
    for r, n in enumerate(val.lengths):
        val_mask[r, : int(n)] = True
    if abs(val.dt[val_mask].mean()) < 1e-12 and abs(val.dt[val_mask].std() - 1) < 1e-12:
        ok = False
        details.append("val dt standardized to its own stats")

    for arrays in dataset.splits.values():
        if arrays.seq.shape[1] != dataset.params.max_len:
            ok = False
            details.append("row width != max_len")

    _, split = _training_dataset()
    train_lengths = [s.prefix_len for s in split["train"]]
    if dataset.params.max_len != nearest_rank_percentile(train_lengths, 0.95):
        ok = False
        details.append("max_len != nearest-rank p95")

    report("preprocessing", ok, "; ".join(details) or "train mean/sd exact")


def test_pipeline_determinism(tmp_path):
    """Reruns with the same seed are byte-identical: dataset files and report."""
    def run(base):
        work = base
        pipeline.run_synth(n_cases=80, seed=31, out_dir=work)
        pipeline.run_transform(work / "snapshot.json", work / "events.csv")
        pipeline.run_mine(
            work / "events.csv",
            work / "report.json",
            snapshot_path=work / "snapshot.json",
        )
        pipeline.run_featurize(
            work / "events.csv", work / "snapshot.json", work / "dataset", seed=31
        )

    run(tmp_path / "a")
    run(tmp_path / "b")

    targets = ["report.json", "events.csv", "snapshot.json", "dataset/meta.json"]
    targets += [
        f"dataset/{split}/{name}"
        for split in ("train", "val", "test")
        for name in ("seq.csv", "dt.csv", "static.csv", "target.csv")
    ]
    mismatched = [
        rel
        for rel in targets
        if (tmp_path / "a" / rel).read_bytes() != (tmp_path / "b" / rel).read_bytes()
    ]
    report("determinism", not mismatched, ", ".join(mismatched) or f"{len(targets)} files")
