"""Fit-on-train preprocessing: median imputation + standardization for
numerics, one-hot with an explicit unknown slot for categoricals, binary
passthrough, percentile-capped padding, and log-standardized transition
sequences. Fitted parameters serialize to meta.json and are never refitted
on validation or test data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .prefix import PrefixSample

UNKNOWN_CATEGORY = "<unknown>"

NUMERIC_FIELDS = ("elapsed_time", "prefix_len", "trunc_dt_mean")
BASE_BINARY_FIELDS = ("is_weekend", "no_transitions")
CATEGORICAL_FIELDS = (
    "from_branch_type",
    "into_branch_type",
    "process",
    "year",
    "month",
    "day",
    "weekday",
    "activity",
)


class PreprocessError(ValueError):
    pass


@dataclass
class PreprocessParams:
    """Everything fitted on the training split, serializable to meta.json."""

    activity_vocab: dict[str, int]
    max_len: int
    numeric_medians: dict[str, float]
    numeric_means: dict[str, float]
    numeric_sds: dict[str, float]
    degenerate_numeric: tuple[str, ...]
    filetype_universe: tuple[str, ...]
    categorical_categories: dict[str, tuple[str, ...]]
    dt_mu: float | None = None
    dt_sd: float | None = None
    dt_degenerate: bool = False
    seed: int = 0

    def static_columns(self) -> tuple[str, ...]:
        cols: list[str] = [f"num__{name}" for name in NUMERIC_FIELDS]
        cols.extend(f"bin__{name}" for name in BASE_BINARY_FIELDS)
        cols.extend(f"bin__has_{ext}" for ext in self.filetype_universe)
        for name in CATEGORICAL_FIELDS:
            for category in (*self.categorical_categories[name], UNKNOWN_CATEGORY):
                cols.append(f"cat__{name}={category}")
        return tuple(cols)

    def to_dict(self) -> dict[str, object]:
        return {
            "activity_vocab": dict(self.activity_vocab),
            "max_len": self.max_len,
            "numeric_medians": dict(self.numeric_medians),
            "numeric_means": dict(self.numeric_means),
            "numeric_sds": dict(self.numeric_sds),
            "degenerate_numeric": list(self.degenerate_numeric),
            "filetype_universe": list(self.filetype_universe),
            "categorical_categories": {
                k: list(v) for k, v in self.categorical_categories.items()
            },
            "dt_mu": self.dt_mu,
            "dt_sd": self.dt_sd,
            "dt_degenerate": self.dt_degenerate,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, object]) -> "PreprocessParams":
        return cls(
            activity_vocab={k: int(v) for k, v in obj["activity_vocab"].items()},  # type: ignore[union-attr]
            max_len=int(obj["max_len"]),  # type: ignore[arg-type]
            numeric_medians={k: float(v) for k, v in obj["numeric_medians"].items()},  # type: ignore[union-attr]
            numeric_means={k: float(v) for k, v in obj["numeric_means"].items()},  # type: ignore[union-attr]
            numeric_sds={k: float(v) for k, v in obj["numeric_sds"].items()},  # type: ignore[union-attr]
            degenerate_numeric=tuple(obj["degenerate_numeric"]),  # type: ignore[arg-type]
            filetype_universe=tuple(obj["filetype_universe"]),  # type: ignore[arg-type]
            categorical_categories={
                k: tuple(v) for k, v in obj["categorical_categories"].items()  # type: ignore[union-attr]
            },
            dt_mu=None if obj.get("dt_mu") is None else float(obj["dt_mu"]),  # type: ignore[arg-type]
            dt_sd=None if obj.get("dt_sd") is None else float(obj["dt_sd"]),  # type: ignore[arg-type]
            dt_degenerate=bool(obj.get("dt_degenerate", False)),
            seed=int(obj.get("seed", 0)),  # type: ignore[arg-type]
        )


def nearest_rank_percentile(values: Sequence[int], q: float) -> int:
    """Nearest-rank percentile: the ceil(q*n)-th smallest value."""
    if not values:
        raise ValueError("cannot take a percentile of no values")
    if not 0 < q <= 1:
        raise ValueError(f"q must be in (0, 1], got {q}")
    ordered = sorted(values)
    rank = math.ceil(q * len(ordered))
    return ordered[rank - 1]


def _categorical_value(sample: PrefixSample, name: str) -> str:
    if name == "activity":
        return sample.static.activity_label
    return str(getattr(sample.static, name))


def _numeric_value(sample: PrefixSample, name: str) -> float | None:
    value = getattr(sample.static, name)
    if value is None:
        return None
    value = float(value)
    return None if math.isnan(value) else value


def fit_preprocess(
    train_samples: Sequence[PrefixSample],
    vocab: Mapping[str, int],
    seed: int = 0,
    length_percentile: float = 0.95,
) -> PreprocessParams:
    """Fit all static preprocessing and the padded length on the training split.

    max_len is the nearest-rank percentile of training prefix lengths; an
    all-missing numeric column imputes 0 and a constant column gets sd := 1,
    both flagged in degenerate_numeric.
    """
    if not train_samples:
        raise PreprocessError("cannot fit preprocessing on an empty training split")

    medians: dict[str, float] = {}
    means: dict[str, float] = {}
    sds: dict[str, float] = {}
    degenerate: list[str] = []
    for name in NUMERIC_FIELDS:
        raw = [_numeric_value(s, name) for s in train_samples]
        present = [v for v in raw if v is not None]
        if not present:
            medians[name] = 0.0
            means[name] = 0.0
            sds[name] = 1.0
            degenerate.append(name)
            continue
        med = float(np.median(present))
        filled = np.array([med if v is None else v for v in raw], dtype=np.float64)
        mu = float(filled.mean())
        sd = float(filled.std())
        if sd == 0.0:
            sd = 1.0
            degenerate.append(name)
        medians[name], means[name], sds[name] = med, mu, sd

    universe = sorted({ext for s in train_samples for ext in s.static.prefix_filetypes})

    categories = {
        name: tuple(sorted({_categorical_value(s, name) for s in train_samples}))
        for name in CATEGORICAL_FIELDS
    }

    lengths = [s.prefix_len for s in train_samples]
    return PreprocessParams(
        activity_vocab=dict(vocab),
        max_len=nearest_rank_percentile(lengths, length_percentile),
        numeric_medians=medians,
        numeric_means=means,
        numeric_sds=sds,
        degenerate_numeric=tuple(degenerate),
        filetype_universe=tuple(universe),
        categorical_categories=categories,
        seed=seed,
    )


def apply_preprocess(
    params: PreprocessParams, samples: Sequence[PrefixSample]
) -> np.ndarray:
    """Static feature matrix under the fitted params; never refits.

    Categories unseen at fit time go to the unknown slot; numerics standardize
    with the training statistics.
    """
    columns = params.static_columns()
    matrix = np.zeros((len(samples), len(columns)), dtype=np.float64)
    col_of = {name: i for i, name in enumerate(columns)}

    for row, sample in enumerate(samples):
        for name in NUMERIC_FIELDS:
            value = _numeric_value(sample, name)
            if value is None:
                value = params.numeric_medians[name]
            matrix[row, col_of[f"num__{name}"]] = (
                value - params.numeric_means[name]
            ) / params.numeric_sds[name]
        matrix[row, col_of["bin__is_weekend"]] = sample.static.is_weekend
        matrix[row, col_of["bin__no_transitions"]] = sample.static.no_transitions
        for ext in sample.static.prefix_filetypes:
            key = f"bin__has_{ext}"
            if key in col_of:
                matrix[row, col_of[key]] = 1.0
        for name in CATEGORICAL_FIELDS:
            value = _categorical_value(sample, name)
            if value not in params.categorical_categories[name]:
                value = UNKNOWN_CATEGORY
            matrix[row, col_of[f"cat__{name}={value}"]] = 1.0
    return matrix


def pad_sequences(
    samples: Sequence[PrefixSample], params: PreprocessParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(seq, dt, lengths): activity IDs right-padded with 0 to max_len and raw
    transition rows prepended with 0, both keeping the last max_len entries of
    longer prefixes in lockstep."""
    max_len = params.max_len
    n = len(samples)
    seq = np.zeros((n, max_len), dtype=np.int64)
    dt = np.zeros((n, max_len), dtype=np.float64)
    lengths = np.zeros(n, dtype=np.int64)
    for row, sample in enumerate(samples):
        ids = list(sample.truncated_activity_list)
        gaps = [0.0, *[float(g) for g in sample.truncated_transitions]]
        if len(ids) > max_len:
            ids = ids[-max_len:]
            gaps = gaps[-max_len:]
        lengths[row] = len(ids)
        seq[row, : len(ids)] = ids
        dt[row, : len(gaps)] = gaps
    return seq, dt, lengths


def standardize_durations(
    dt: np.ndarray,
    lengths: np.ndarray,
    mu: float | None = None,
    sd: float | None = None,
) -> tuple[np.ndarray, float, float, bool]:
    """z = (log1p(dt) - mu) / sd with (mu, sd) over non-padding positions.

    Passing mu/sd applies training statistics (val/test path); omitting them
    fits. Padding positions end up carrying the standardized image of 0; a
    constant matrix gets sd := 1 and the degenerate flag set.
    """
    logged = np.log1p(dt)
    mask = np.zeros(dt.shape, dtype=bool)
    for row, length in enumerate(lengths):
        mask[row, : int(length)] = True
    degenerate = False
    if mu is None or sd is None:
        observed = logged[mask]
        if observed.size == 0:
            raise ValueError("cannot fit duration standardization with no observed positions")
        mu = float(observed.mean())
        sd = float(observed.std())
        if sd == 0.0:
            sd = 1.0
            degenerate = True
    z = (logged - mu) / sd
    return z, mu, sd, degenerate
