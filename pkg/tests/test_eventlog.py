"""Melting, translation, log construction, and CSV export tests."""

from __future__ import annotations

import csv

import numpy as np
import pytest
from helpers import T0, event, log_of, make_commit, make_detail, make_pull, make_run, make_snapshot
from hypothesis import given, settings
from hypothesis import strategies as st

from codesight.eventlog import (
    CSV_COLUMNS,
    ActivityKind,
    EventLog,
    EventRecord,
    UnknownActivityError,
    build_event_log,
    export_csv,
    load_csv,
    match_runs,
    melt_date_columns,
    run_metadata_from_snapshot,
    translate_activity,
    write_rejects,
)
from codesight.timestamps import format_utc, parse_rfc3339


def brute_force_cells(rows, id_column="pr_id"):
    """Independent oracle: scan every (row, Fch column) cell and count non-nulls."""
    cells = []
    for row in rows:
        pr_id = row.get(id_column)
        if not isinstance(pr_id, int) or isinstance(pr_id, bool):
            continue
        for column in row:
            if column.startswith("Fch") and row[column] is not None and row[column] != "":
                cells.append((pr_id, column, row[column]))
    return cells


def test_melt_counts_non_null_cells():
    rows = [{"pr_id": 1, "Fch a": T0, "Fch b": T0 + 5, "Fch c": None, "who": "alice"}]
    events, rejects = melt_date_columns(rows)
    assert len(events) == 2
    assert rejects == []
    assert all(e.attributes == {"who": "alice"} for e in events)


def test_melt_empty_table():
    assert melt_date_columns([]) == ([], [])


def test_melt_crafted_table_matches_cell_scan():
    rows = [
        {"pr_id": 1, "Fch a": T0, "Fch b": T0 + 1, "Fch c": T0 + 2, "k": "v"},
        {"pr_id": 2, "Fch a": T0 + 3, "Fch b": None, "Fch c": T0 + 4},
        {"pr_id": 3, "Fch a": None, "Fch b": None, "Fch c": T0 + 5},
        {"pr_id": 4, "Fch a": T0 + 6, "Fch b": T0 + 7, "Fch c": T0 + 8, "k": "w"},
    ]
    expected = brute_force_cells(rows)
    assert len(expected) == 9
    events, rejects = melt_date_columns(rows)
    assert rejects == []
    assert sorted((e.pr_id, e.raw_label, e.date) for e in events) == sorted(expected)


def test_melt_collects_rejects_and_continues():
    rows = [
        {"pr_id": 1, "Fch a": "not-a-date", "Fch b": T0},
        {"pr_id": None, "Fch a": T0},
    ]
    events, rejects = melt_date_columns(rows)
    assert len(events) == 1
    assert len(rejects) == 2
    assert rejects[0].pr_id == 1 and rejects[0].column == "Fch a"
    assert rejects[1].column == "pr_id"


def test_melt_accepts_rfc3339_strings():
    rows = [{"pr_id": 5, "Fch open": "2024-03-01T00:00:10Z"}]
    events, rejects = melt_date_columns(rows)
    assert rejects == []
    assert events[0].date == T0 + 10


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_melt_conservation_property(data):
    n_rows = data.draw(st.integers(0, 12))
    columns = [f"Fch col{i}" for i in range(data.draw(st.integers(1, 5)))]
    rows = []
    for r in range(n_rows):
        row: dict[str, object] = {"pr_id": data.draw(st.integers(1, 6))}
        for col in columns:
            if data.draw(st.booleans()):
                row[col] = T0 + data.draw(st.integers(0, 10_000))
            else:
                row[col] = None
        row["meta"] = data.draw(st.text(max_size=4))
        rows.append(row)
    expected = brute_force_cells(rows)
    events, rejects = melt_date_columns(rows)
    assert rejects == []
    assert sorted((e.pr_id, e.raw_label, e.date) for e in events) == sorted(expected)


def test_translate_activity_known_labels():
    assert translate_activity("Fch apertura PR") is ActivityKind.PR_OPENING
    assert translate_activity("Fch commit") is ActivityKind.COMMIT
    assert translate_activity("Fch cierre PR") is ActivityKind.PR_CLOSURE


def test_translate_activity_unknown_label():
    with pytest.raises(UnknownActivityError, match="Fch totally_new"):
        translate_activity("Fch totally_new")


def test_build_event_log_opening_only():
    snap = make_snapshot(pulls=[make_pull(1, 1, T0)])
    build = build_event_log(snap)
    assert len(build.log) == 1
    assert build.log.events[0].activity is ActivityKind.PR_OPENING
    assert build.rejects == ()


def test_build_event_log_full_case_ordering():
    pull = make_pull(1, 1, T0, merged_at=T0 + 500, closed_at=T0 + 500, head_sha="h1")
    commits = [
        make_commit(1, "c1", T0 + 100),
        make_commit(1, "c2", T0 + 200, filetypes=frozenset({".js"})),
    ]
    run = make_run(70, "c2", T0 + 300, conclusion="success")
    snap = make_snapshot(
        pulls=[pull],
        details=[make_detail(1, merged_by="bruno")],
        commits=commits,
        runs=[run],
    )
    build = build_event_log(snap)
    kinds = [e.activity for e in build.log.events]
    assert kinds == [
        ActivityKind.PR_OPENING,
        ActivityKind.COMMIT,
        ActivityKind.COMMIT,
        ActivityKind.WORKFLOW_RUN,
        ActivityKind.PR_MERGE,
        ActivityKind.PR_CLOSURE,
    ]
    dates = [e.date for e in build.log.events]
    assert dates == sorted(dates)
    merge_event = build.log.events[4]
    assert merge_event.attributes["merged_by"] == "bruno"
    run_event = build.log.events[3]
    assert run_event.attributes["run_id"] == "70"
    assert run_event.attributes["conclusion"] == "success"
    assert run_event.attributes["run_name"] == "ci"
    commit_event = build.log.events[2]
    assert commit_event.attributes["filetypes"] == ".js"
    assert commit_event.attributes["commit_author"] == "alice"


def test_build_event_log_groups_interleaved_cases():
    snap = make_snapshot(
        pulls=[make_pull(2, 2, T0 + 50), make_pull(1, 1, T0)],
        commits=[make_commit(1, "c1", T0 + 100), make_commit(2, "c2", T0 + 60)],
    )
    build = build_event_log(snap)
    assert [e.pr_id for e in build.log.events] == [1, 1, 2, 2]


def test_merge_and_closure_same_timestamp_order():
    pull = make_pull(1, 1, T0, merged_at=T0 + 10, closed_at=T0 + 10)
    build = build_event_log(make_snapshot(pulls=[pull]))
    kinds = [e.activity for e in build.log.events]
    assert kinds == [ActivityKind.PR_OPENING, ActivityKind.PR_MERGE, ActivityKind.PR_CLOSURE]


def test_unmatched_runs_routed_out_of_log():
    pull = make_pull(1, 1, T0, head_sha="h1")
    matched = make_run(70, "h1", T0 + 10)
    stray = make_run(71, "nothere", T0 + 20)
    snap = make_snapshot(pulls=[pull], runs=[matched, stray])
    assignments, unmatched = match_runs(snap)
    assert assignments == {70: 1}
    assert [r.run_id for r in unmatched] == [71]
    build = build_event_log(snap)
    assert [r.run_id for r in build.unmatched_runs] == [71]
    run_events = [e for e in build.log.events if e.activity is ActivityKind.WORKFLOW_RUN]
    assert len(run_events) == 1


def test_run_matches_merge_commit_sha():
    pull = make_pull(1, 1, T0, head_sha="h1", merge_commit_sha="m1",
                     merged_at=T0 + 100, closed_at=T0 + 100)
    run = make_run(70, "m1", T0 + 50)
    build = build_event_log(make_snapshot(pulls=[pull], runs=[run]))
    assert any(e.activity is ActivityKind.WORKFLOW_RUN for e in build.log.events)


def test_single_per_case_enforced():
    events = [
        event(1, ActivityKind.PR_OPENING, T0),
        event(1, ActivityKind.PR_OPENING, T0 + 5),
    ]
    with pytest.raises(ValueError, match="PR Opening"):
        EventLog.from_events(events)


def test_case_sorting_invariant_on_synth_cases():
    rng = np.random.default_rng(42)
    events = []
    for pr_id in range(1, 8):
        base = T0 + int(rng.integers(0, 1000))
        events.append(event(pr_id, ActivityKind.PR_OPENING, base))
        for _ in range(int(rng.integers(0, 5))):
            events.append(event(pr_id, ActivityKind.COMMIT, base + int(rng.integers(1, 500))))
    log = EventLog.from_events(events)
    for positions in log.case_index.values():
        dates = [log.events[p].date for p in positions]
        assert dates == sorted(dates)


def test_export_csv_empty_log(tmp_path):
    path = export_csv(EventLog.from_events([]), tmp_path / "events.csv")
    lines = path.read_text().splitlines()
    assert lines == [",".join(CSV_COLUMNS)]


def test_export_csv_line_count_and_round_trip(tmp_path):
    pull = make_pull(1, 1, T0, merged_at=T0 + 500, closed_at=T0 + 500, head_sha="h1")
    commits = [make_commit(1, "c1", T0 + 100), make_commit(1, "c2", T0 + 200)]
    run = make_run(70, "c2", T0 + 300)
    snap = make_snapshot(pulls=[pull], details=[make_detail(1)], commits=commits, runs=[run])
    log = build_event_log(snap).log
    path = export_csv(log, tmp_path / "events.csv")
    assert len(path.read_text().splitlines()) == 7

    loaded = load_csv(path)
    assert [(e.pr_id, e.activity, e.date) for e in loaded.events] == [
        (e.pr_id, e.activity, e.date) for e in log.events
    ]


def test_export_csv_quotes_commas(tmp_path):
    log = log_of(event(1, ActivityKind.PR_OPENING, T0, pr_author="smith, jr"))
    path = export_csv(log, tmp_path / "events.csv")
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["pr_author"] == "smith, jr"


def test_load_csv_reattaches_run_metadata(tmp_path):
    pull = make_pull(1, 1, T0, head_sha="h1")
    run = make_run(70, "h1", T0 + 10, run_name="deploy prod")
    snap = make_snapshot(pulls=[pull], runs=[run])
    log = build_event_log(snap).log
    path = export_csv(log, tmp_path / "events.csv")

    bare = load_csv(path)
    run_event = next(e for e in bare.events if e.activity is ActivityKind.WORKFLOW_RUN)
    assert "run_name" not in run_event.attributes

    enriched = load_csv(path, run_metadata=run_metadata_from_snapshot(snap))
    run_event = next(e for e in enriched.events if e.activity is ActivityKind.WORKFLOW_RUN)
    assert run_event.attributes["run_name"] == "deploy prod"


def test_csv_dates_are_utc_seconds(tmp_path):
    log = log_of(event(1, ActivityKind.PR_OPENING, T0))
    path = export_csv(log, tmp_path / "events.csv")
    with path.open(newline="") as fh:
        row = next(csv.DictReader(fh))
    assert row["DATE"] == format_utc(T0)
    assert parse_rfc3339(row["DATE"]) == T0


def test_write_rejects_jsonl(tmp_path):
    rows = [{"pr_id": 1, "Fch a": "garbage"}]
    _, rejects = melt_date_columns(rows)
    path = write_rejects(rejects, tmp_path / "rejects.jsonl")
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    assert '"column": "Fch a"' in lines[0]
    assert '"pr_id": 1' in lines[0]
