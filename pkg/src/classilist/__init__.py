"""Per-class analysis of multi-class classifier prediction scores."""

from .analytics import (
    ClassHistogram,
    ConfusionMatrix,
    EmptySelectionError,
    FeatureStats,
    HistogramBin,
    HistogramSpec,
    OutcomeCounts,
    SelectionResult,
    SpecError,
    WhatIfChange,
    WhatIfReport,
    build_all_histograms,
    build_histogram,
    confusion_matrix,
    effective_range,
    feature_summary,
    per_class_counts,
    reweight_whatif,
    select_bar,
    select_cell,
)
from .bundle import (
    BundleError,
    BundleIssue,
    BundleManifest,
    fingerprint,
    load_bundle,
    write_bundle,
)
from .model import (
    ClassLabel,
    Dataset,
    Outcome,
    PredictionRecord,
    ValidationReport,
    normalize_scores,
    outcome,
    predicted_class,
    validate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "ClassHistogram",
    "ClassLabel",
    "ConfusionMatrix",
    "Dataset",
    "EmptySelectionError",
    "FeatureStats",
    "HistogramBin",
    "HistogramSpec",
    "Outcome",
    "OutcomeCounts",
    "PredictionRecord",
    "SelectionResult",
    "SpecError",
    "ValidationReport",
    "WhatIfChange",
    "WhatIfReport",
    "BundleError",
    "BundleIssue",
    "BundleManifest",
    "build_all_histograms",
    "build_histogram",
    "confusion_matrix",
    "effective_range",
    "feature_summary",
    "fingerprint",
    "load_bundle",
    "normalize_scores",
    "outcome",
    "per_class_counts",
    "predicted_class",
    "reweight_whatif",
    "select_bar",
    "select_cell",
    "validate_dataset",
    "write_bundle",
]
