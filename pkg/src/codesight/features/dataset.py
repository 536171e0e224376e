"""Dataset assembly: case-level split, encoding, and file export.

The exported directory is the hand-off surface to the predictor: per split
seq.csv / dt.csv / static.csv / target.csv plus meta.json with the fitted
preprocessing parameters. Writes are atomic and byte-deterministic for a
fixed seed.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..ingestion.store import write_json_atomic
from .prefix import (
    EXCLUDED_LEAKY_FIELDS,
    PrefixSample,
    transform_target,
)
from .preprocess import (
    PreprocessParams,
    apply_preprocess,
    fit_preprocess,
    pad_sequences,
    standardize_durations,
)

DATASET_SCHEMA_VERSION = 1
SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True)
class SplitFractions:
    train: float = 0.70
    val: float = 0.15
    test: float = 0.15

    def __post_init__(self) -> None:
        total = self.train + self.val + self.test
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {total}")


def split_counts(n: int, fractions: SplitFractions) -> tuple[int, int, int]:
    """train = round-half-up, val = floor, test = remainder."""
    n_train = int(math.floor(n * fractions.train + 0.5))
    n_val = int(math.floor(n * fractions.val))
    n_test = n - n_train - n_val
    if n_test < 0:
        n_val += n_test
        n_test = 0
    return n_train, n_val, n_test


def split_dataset(
    samples: Sequence[PrefixSample],
    seed: int,
    fractions: SplitFractions | None = None,
) -> dict[str, list[PrefixSample]]:
    """Disjoint, exhaustive split by pr_id so no case leaks across splits."""
    if len(samples) < 3:
        raise ValueError(f"need at least 3 samples to split, got {len(samples)}")
    fractions = fractions or SplitFractions()
    case_ids = sorted({s.pr_id for s in samples})
    rng = np.random.default_rng(seed)
    rng.shuffle(case_ids)
    n_train, n_val, _ = split_counts(len(case_ids), fractions)
    assignment: dict[int, str] = {}
    for i, pr_id in enumerate(case_ids):
        if i < n_train:
            assignment[pr_id] = "train"
        elif i < n_train + n_val:
            assignment[pr_id] = "val"
        else:
            assignment[pr_id] = "test"
    out: dict[str, list[PrefixSample]] = {name: [] for name in SPLIT_NAMES}
    for sample in samples:
        out[assignment[sample.pr_id]].append(sample)
    return out


@dataclass(frozen=True)
class SplitArrays:
    pr_ids: np.ndarray
    seq: np.ndarray
    dt: np.ndarray
    static: np.ndarray
    y_log: np.ndarray
    y_seconds: np.ndarray
    deadline_seconds: np.ndarray
    elapsed_seconds: np.ndarray
    lengths: np.ndarray


@dataclass(frozen=True)
class EncodedDataset:
    splits: dict[str, SplitArrays]
    params: PreprocessParams
    static_columns: tuple[str, ...]


def _audit_no_leaky_columns(columns: Sequence[str]) -> None:
    for column in columns:
        base = column.split("__", 1)[-1].split("=", 1)[0]
        if base in EXCLUDED_LEAKY_FIELDS:
            raise AssertionError(f"leaky feature column in model inputs: {column}")


def encode_dataset(
    split_samples: Mapping[str, Sequence[PrefixSample]],
    vocab: Mapping[str, int],
    seed: int = 0,
) -> EncodedDataset:
    """Fit on the train split, transform every split with the same parameters."""
    train = list(split_samples.get("train", ()))
    params = fit_preprocess(train, vocab, seed=seed)

    seq_train, dt_train, len_train = pad_sequences(train, params)
    _, mu, sd, degenerate = standardize_durations(dt_train, len_train)
    params.dt_mu, params.dt_sd, params.dt_degenerate = mu, sd, degenerate

    columns = params.static_columns()
    _audit_no_leaky_columns(columns)

    splits: dict[str, SplitArrays] = {}
    for name in SPLIT_NAMES:
        samples = list(split_samples.get(name, ()))
        seq, dt_raw, lengths = pad_sequences(samples, params)
        dt_std, _, _, _ = standardize_durations(dt_raw, lengths, mu=mu, sd=sd)
        splits[name] = SplitArrays(
            pr_ids=np.array([s.pr_id for s in samples], dtype=np.int64),
            seq=seq,
            dt=dt_std,
            static=apply_preprocess(params, samples),
            y_log=np.array([transform_target(s.remaining_time) for s in samples]),
            y_seconds=np.array([float(s.remaining_time) for s in samples]),
            deadline_seconds=np.array([s.deadline_hours * 3600.0 for s in samples]),
            elapsed_seconds=np.array([float(s.elapsed_time) for s in samples]),
            lengths=lengths,
        )
    return EncodedDataset(splits=splits, params=params, static_columns=columns)


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_rows_atomic(path: Path, rows: list[str]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(rows) + ("\n" if rows else ""), encoding="utf-8")
    os.replace(tmp, path)


def _csv_quote(name: str) -> str:
    if any(ch in name for ch in (",", '"', "\n")):
        return '"' + name.replace('"', '""') + '"'
    return name


def export_dataset(dataset: EncodedDataset, out_dir: Path | str) -> list[Path]:
    """Write per-split seq/dt/static/target CSVs plus meta.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    for name, arrays in dataset.splits.items():
        split_dir = out_dir / name
        split_dir.mkdir(parents=True, exist_ok=True)

        seq_rows = [",".join(str(int(v)) for v in row) for row in arrays.seq]
        _write_rows_atomic(split_dir / "seq.csv", seq_rows)

        dt_rows = [",".join(_fmt(v) for v in row) for row in arrays.dt]
        _write_rows_atomic(split_dir / "dt.csv", dt_rows)

        static_rows = [",".join(_csv_quote(c) for c in dataset.static_columns)]
        static_rows.extend(",".join(_fmt(v) for v in row) for row in arrays.static)
        _write_rows_atomic(split_dir / "static.csv", static_rows)

        target_rows = ["pr_id,y_log,y_seconds,elapsed_seconds,deadline_seconds"]
        for i in range(len(arrays.pr_ids)):
            target_rows.append(
                ",".join(
                    [
                        str(int(arrays.pr_ids[i])),
                        _fmt(arrays.y_log[i]),
                        _fmt(arrays.y_seconds[i]),
                        _fmt(arrays.elapsed_seconds[i]),
                        _fmt(arrays.deadline_seconds[i]),
                    ]
                )
            )
        _write_rows_atomic(split_dir / "target.csv", target_rows)

        written.extend(
            split_dir / f for f in ("seq.csv", "dt.csv", "static.csv", "target.csv")
        )

    meta = {
        "schema_version": DATASET_SCHEMA_VERSION,
        "seed": dataset.params.seed,
        "max_len": dataset.params.max_len,
        "static_columns": list(dataset.static_columns),
        "split_rows": {name: int(len(s.pr_ids)) for name, s in dataset.splits.items()},
        "params": dataset.params.to_dict(),
    }
    meta_path = out_dir / "meta.json"
    write_json_atomic(meta_path, meta)
    written.append(meta_path)
    return written


def load_meta(out_dir: Path | str) -> dict[str, object]:
    meta_path = Path(out_dir) / "meta.json"
    obj = json.loads(meta_path.read_text(encoding="utf-8"))
    if obj.get("schema_version") != DATASET_SCHEMA_VERSION:
        raise ValueError(
            f"{meta_path}: schema_version {obj.get('schema_version')!r}, "
            f"expected {DATASET_SCHEMA_VERSION}"
        )
    return obj
