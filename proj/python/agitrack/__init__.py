"""Shift-level agitation detection from wearable multi-modal sensor data.

The heavy lifting lives in the compiled ``agitrack._core`` module; this
package re-exports its public surface.
"""

from agitrack._core import (
    ParseError,
    ValidationError,
    __version__,
    acc_magnitude,
    basic_stats,
    bin_index,
    compute_cost_matrix,
    decimate,
    decompose_eda,
    feature_names,
    generate_cohort,
    load_feature_table,
    nested_cv,
    peak_features,
    resample,
    roc_auc,
    roc_curve,
    shift_features,
    stratified_folds,
    tonic_extras,
)

__all__ = [
    "ParseError",
    "ValidationError",
    "__version__",
    "acc_magnitude",
    "basic_stats",
    "bin_index",
    "compute_cost_matrix",
    "decimate",
    "decompose_eda",
    "feature_names",
    "generate_cohort",
    "load_feature_table",
    "nested_cv",
    "peak_features",
    "resample",
    "roc_auc",
    "roc_curve",
    "shift_features",
    "stratified_folds",
    "tonic_extras",
]
