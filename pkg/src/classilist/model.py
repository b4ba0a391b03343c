"""Core data model: datasets of per-class prediction scores and the
TP/FP/FN/TN outcome semantics derived from the argmax decision rule.

Everything here is immutable after construction and all operations are
pure functions, so a single dataset can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

ROW_SUM_WARN_TOLERANCE = 1e-6


class Outcome(str, Enum):
    """Per-class outcome of one prediction. For any (record, class) pair
    exactly one of the four labels holds."""

    TP = "tp"
    FP = "fp"
    FN = "fn"
    TN = "tn"


# Fixed presentation / serialization order for outcome groups.
OUTCOME_ORDER: tuple[Outcome, ...] = (Outcome.TP, Outcome.FP, Outcome.FN, Outcome.TN)


@dataclass(frozen=True)
class ClassLabel:
    """A class name together with its 0-based position in canonical order."""

    name: str
    index: int


@dataclass(frozen=True)
class PredictionRecord:
    """One classified sample.

    `scores` holds one finite non-negative value per class in canonical
    order; it need not be normalized. `features` may be absent entirely,
    or present with individual entries marked missing (None).
    """

    sample_id: str
    actual: int
    scores: tuple[float, ...]
    features: tuple[float | None, ...] | None = None
    image_ref: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if self.features is not None:
            object.__setattr__(self, "features", tuple(self.features))


@dataclass(frozen=True)
class Dataset:
    """An immutable, validated collection of prediction records.

    Construction enforces the class-metadata invariants (unique non-empty
    names, contiguous indices, K >= 2). Record-level problems are
    deliberately representable so that ``validate_dataset`` can report
    them; use it (or the bundle loader, which does) before analysis.
    """

    classes: tuple[ClassLabel, ...]
    feature_names: tuple[str, ...]
    records: tuple[PredictionRecord, ...] = field(repr=False)
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "feature_names", tuple(str(n) for n in self.feature_names))
        object.__setattr__(self, "records", tuple(self.records))
        names = [c.name for c in self.classes]
        if len(self.classes) < 2:
            raise ValueError("a dataset needs at least two classes")
        if any(not n for n in names):
            raise ValueError("class names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError("class names must be unique")
        if [c.index for c in self.classes] != list(range(len(self.classes))):
            raise ValueError("class indices must form a contiguous 0..K-1 range")

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes)

    @cached_property
    def id_index(self) -> dict[str, int]:
        """Maps sample_id to record position."""
        return {r.sample_id: i for i, r in enumerate(self.records)}

    def record(self, sample_id: str) -> PredictionRecord:
        return self.records[self.id_index[sample_id]]

    # Cached array views used by the aggregation hot paths. Only valid for
    # datasets whose records pass validation (uniform score arity).

    @cached_property
    def score_matrix(self) -> np.ndarray:
        m = np.array([r.scores for r in self.records], dtype=np.float64)
        m.setflags(write=False)
        return m

    @cached_property
    def actual_array(self) -> np.ndarray:
        a = np.array([r.actual for r in self.records], dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def predicted_array(self) -> np.ndarray:
        # np.argmax takes the first maximum, matching the lowest-index tie rule.
        p = np.argmax(self.score_matrix, axis=1)
        p.setflags(write=False)
        return p


def predicted_class(record: PredictionRecord) -> int:
    """Index of the highest score; ties broken toward the lowest class index."""
    return max(range(len(record.scores)), key=record.scores.__getitem__)


def outcome(record: PredictionRecord, c: int) -> Outcome:
    """Outcome of `record` with respect to class `c`."""
    if not 0 <= c < len(record.scores):
        raise IndexError(f"class index {c} out of range for {len(record.scores)} classes")
    p = predicted_class(record)
    if p == c:
        return Outcome.TP if record.actual == c else Outcome.FP
    return Outcome.FN if record.actual == c else Outcome.TN


def normalize_scores(record: PredictionRecord) -> PredictionRecord:
    """Divide the score vector by its sum. Positive scaling cannot reorder
    scores, so the argmax (and every outcome) is unchanged."""
    total = sum(record.scores)
    if total <= 0.0:
        raise ValueError(f"sample {record.sample_id!r}: cannot normalize an all-zero score row")
    return PredictionRecord(
        sample_id=record.sample_id,
        actual=record.actual,
        scores=tuple(s / total for s in record.scores),
        features=record.features,
        image_ref=record.image_ref,
    )


@dataclass(frozen=True)
class Issue:
    """One validation finding. `kind` is a stable machine-readable tag."""

    kind: str
    message: str
    sample_id: str | None = None

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Issue, ...]
    warnings: tuple[Issue, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_dataset(dataset: Dataset) -> ValidationReport:
    """Check every record against the dataset's class and feature metadata.

    Violations make the dataset unusable for analysis; warnings flag rows
    whose sums stray from 1 although the dataset claims normalization.
    """
    violations: list[Issue] = []
    warnings: list[Issue] = []
    k = dataset.k
    f = len(dataset.feature_names)
    seen: set[str] = set()

    for r in dataset.records:
        sid = r.sample_id
        if sid in seen:
            violations.append(Issue("duplicate-id", f"duplicate sample id {sid!r}", sid))
        seen.add(sid)
        if len(r.scores) != k:
            violations.append(
                Issue("score-length", f"sample {sid!r}: expected {k} scores, got {len(r.scores)}", sid)
            )
            continue
        bad = False
        for i, s in enumerate(r.scores):
            if not math.isfinite(s):
                violations.append(Issue("non-finite", f"sample {sid!r}: non-finite score for class {dataset.classes[i].name!r}", sid))
                bad = True
            elif s < 0:
                violations.append(Issue("negative-score", f"sample {sid!r}: negative score {s!r} for class {dataset.classes[i].name!r}", sid))
                bad = True
        if not bad and all(s == 0.0 for s in r.scores):
            violations.append(Issue("all-zero-scores", f"sample {sid!r}: all scores are zero", sid))
            bad = True
        if not 0 <= r.actual < k:
            violations.append(Issue("actual-out-of-range", f"sample {sid!r}: actual class index {r.actual} out of range", sid))
        if r.features is not None:
            if len(r.features) != f:
                violations.append(
                    Issue("feature-length", f"sample {sid!r}: expected {f} features, got {len(r.features)}", sid)
                )
            else:
                for j, v in enumerate(r.features):
                    if v is not None and not math.isfinite(v):
                        violations.append(Issue("non-finite", f"sample {sid!r}: non-finite value for feature {dataset.feature_names[j]!r}", sid))
        if dataset.normalized and not bad:
            total = sum(r.scores)
            if abs(total - 1.0) > ROW_SUM_WARN_TOLERANCE:
                warnings.append(
                    Issue("row-sum", f"sample {sid!r}: scores sum to {total!r} although the dataset is flagged normalized", sid)
                )

    return ValidationReport(tuple(violations), tuple(warnings))
