"""Prefix featurization: truncation, leakage-free statics, preprocessing,
padding, split, and dataset export."""

from .dataset import (
    DATASET_SCHEMA_VERSION,
    EncodedDataset,
    SplitArrays,
    SplitFractions,
    encode_dataset,
    export_dataset,
    load_meta,
    split_counts,
    split_dataset,
)
from .prefix import (
    DEADLINE_HOURS,
    DEFAULT_FROM_BRANCH_TOKENS,
    DEFAULT_INTO_BRANCH_TOKENS,
    EXCLUDED_LEAKY_FIELDS,
    ComplexityLabel,
    LabelThresholds,
    PrefixSample,
    StaticFeatures,
    assign_label_and_deadline,
    build_prefix_samples,
    build_sample,
    calendar_features,
    classify_branch,
    drop_leaky_features,
    encode_activities,
    filetype_flags,
    inverse_target,
    transform_target,
    transition_seconds,
    truncate_trace,
)
from .preprocess import (
    PreprocessParams,
    apply_preprocess,
    fit_preprocess,
    nearest_rank_percentile,
    pad_sequences,
    standardize_durations,
)

__all__ = [
    "DATASET_SCHEMA_VERSION",
    "DEADLINE_HOURS",
    "DEFAULT_FROM_BRANCH_TOKENS",
    "DEFAULT_INTO_BRANCH_TOKENS",
    "EXCLUDED_LEAKY_FIELDS",
    "ComplexityLabel",
    "EncodedDataset",
    "LabelThresholds",
    "PrefixSample",
    "PreprocessParams",
    "SplitArrays",
    "SplitFractions",
    "StaticFeatures",
    "apply_preprocess",
    "assign_label_and_deadline",
    "build_prefix_samples",
    "build_sample",
    "calendar_features",
    "classify_branch",
    "drop_leaky_features",
    "encode_activities",
    "encode_dataset",
    "export_dataset",
    "filetype_flags",
    "fit_preprocess",
    "inverse_target",
    "load_meta",
    "nearest_rank_percentile",
    "pad_sequences",
    "split_counts",
    "split_dataset",
    "standardize_durations",
    "transform_target",
    "transition_seconds",
    "truncate_trace",
]
