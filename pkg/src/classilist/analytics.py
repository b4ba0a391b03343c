"""Aggregation engine: outcome-partitioned score histograms, confusion
matrices, feature summaries, linked-selection resolution, and what-if
score reweighting.

All operations are pure functions over an immutable ``Dataset``; results
are deterministic (member lists preserve record order, bin assignment is
settled by explicit edges) so they can be compared byte-for-byte.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from math import isfinite

import numpy as np

from .model import OUTCOME_ORDER, Dataset, Outcome, outcome

DEFAULT_GROUPS = frozenset({Outcome.TP, Outcome.FP, Outcome.FN})

_CODE = {Outcome.TP: 0, Outcome.FP: 1, Outcome.FN: 2, Outcome.TN: 3}
_BY_CODE = {v: k for k, v in _CODE.items()}


class SpecError(ValueError):
    """A histogram spec violates its own constraints."""


class EmptySelectionError(ValueError):
    """No sample passes the requested filter."""


@dataclass(frozen=True)
class HistogramSpec:
    """How to bin one class's scores and which outcome groups to include.

    ``tn_min`` keeps near-zero true negatives from drowning the chart and
    must stay strictly positive; ``tp_max`` caps which true positives are
    shown so the error groups can be given more resolution.
    """

    bin_count: int = 10
    axis_lo: float = 0.0
    axis_hi: float = 1.0
    groups: frozenset[Outcome] = DEFAULT_GROUPS
    tn_min: float = 0.01
    tp_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "groups", frozenset(self.groups))
        if self.bin_count < 1:
            raise SpecError(f"bin_count must be >= 1, got {self.bin_count}")
        if not (isfinite(self.axis_lo) and isfinite(self.axis_hi)):
            raise SpecError("axis bounds must be finite")
        if not self.axis_lo < self.axis_hi:
            raise SpecError(f"axis_lo must be < axis_hi, got [{self.axis_lo}, {self.axis_hi}]")
        if not self.groups:
            raise SpecError("at least one outcome group must be selected")
        if not self.tn_min > 0:
            raise SpecError("tn_min must be > 0: true negatives need a non-zero lower score bound")
        if not 0 < self.tp_max <= 1:
            raise SpecError(f"tp_max must be in (0, 1], got {self.tp_max}")

    @property
    def ordered_groups(self) -> tuple[Outcome, ...]:
        return tuple(g for g in OUTCOME_ORDER if g in self.groups)

    def edges(self) -> list[float]:
        """The bin_count+1 bin edges. Computed as lo + (hi-lo)*(i/bins) so a
        score written with the same decimals as an edge compares equal to it;
        the first and last edge are exactly the axis bounds."""
        lo, hi, b = self.axis_lo, self.axis_hi, self.bin_count
        e = [lo + (hi - lo) * (i / b) for i in range(b + 1)]
        e[0] = lo
        e[-1] = hi
        return e


@dataclass(frozen=True)
class HistogramBin:
    lo: float
    hi: float
    counts: dict[Outcome, int]
    members: dict[Outcome, tuple[str, ...]]

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class ClassHistogram:
    class_index: int
    spec: HistogramSpec
    bins: tuple[HistogramBin, ...]
    excluded_below: int
    excluded_above: int

    @property
    def binned_total(self) -> int:
        return sum(b.total for b in self.bins)

    @property
    def total_included(self) -> int:
        """Samples passing the group filter, whether binned or off-axis."""
        return self.binned_total + self.excluded_below + self.excluded_above


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts, rows = actual class, columns = predicted class, with
    the sample ids behind every cell (in record order)."""

    counts: tuple[tuple[int, ...], ...]
    members: tuple[tuple[tuple[str, ...], ...], ...] = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def cell(self, actual: int, predicted: int) -> int:
        return self.counts[actual][predicted]

    def cell_members(self, actual: int, predicted: int) -> tuple[str, ...]:
        return self.members[actual][predicted]


@dataclass(frozen=True)
class SelectionResult:
    """A resolved brushing action: the selected ids, where those samples sit
    in every class's current histogram, and the confusion cells they occupy."""

    sample_ids: tuple[str, ...]
    highlights: dict[int, dict[int, dict[Outcome, int]]]
    cells: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class FeatureStats:
    """Five-number summary of one feature over a selection; all values are
    None when no non-missing entry exists."""

    name: str
    count: int
    minimum: float | None = None
    q1: float | None = None
    median: float | None = None
    q3: float | None = None
    maximum: float | None = None


@dataclass(frozen=True)
class OutcomeCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def get(self, g: Outcome) -> int:
        return getattr(self, g.value)


@dataclass(frozen=True)
class WhatIfChange:
    sample_id: str
    old_predicted: int
    new_predicted: int


@dataclass(frozen=True)
class WhatIfReport:
    weights: tuple[float, ...]
    before: ConfusionMatrix
    after: ConfusionMatrix
    changes: tuple[WhatIfChange, ...]


def _outcome_codes(dataset: Dataset, c: int) -> np.ndarray:
    pred = dataset.predicted_array
    act = dataset.actual_array
    return np.where(pred == c, np.where(act == c, 0, 1), np.where(act == c, 2, 3))


def _filter_mask(dataset: Dataset, c: int, spec: HistogramSpec) -> tuple[np.ndarray, np.ndarray]:
    """Mask of records passing the group/tn_min/tp_max filter for class c,
    along with each record's outcome code for that class."""
    s = dataset.score_matrix[:, c]
    codes = _outcome_codes(dataset, c)
    include = np.zeros(dataset.n, dtype=bool)
    for g in spec.groups:
        m = codes == _CODE[g]
        if g is Outcome.TN:
            m &= s >= spec.tn_min
        elif g is Outcome.TP:
            m &= s <= spec.tp_max
        include |= m
    return include, codes


def _check_class(dataset: Dataset, c: int) -> None:
    if not 0 <= c < dataset.k:
        raise IndexError(f"class index {c} out of range for {dataset.k} classes")


def build_histogram(dataset: Dataset, c: int, spec: HistogramSpec) -> ClassHistogram:
    """Bin class-c scores of the filter-passing records into equal-width
    intervals [lo+i*w, lo+(i+1)*w), the last one closed at axis_hi.

    A score equal to an interior edge lands in the higher bin; scores off
    the axis are tallied in excluded_below / excluded_above instead.
    """
    _check_class(dataset, c)
    s = dataset.score_matrix[:, c]
    include, codes = _filter_mask(dataset, c, spec)
    below = include & (s < spec.axis_lo)
    above = include & (s > spec.axis_hi)
    in_axis = include & ~below & ~above

    edges = spec.edges()
    idx = np.searchsorted(np.asarray(edges), s, side="right") - 1
    np.minimum(idx, spec.bin_count - 1, out=idx)

    groups = spec.ordered_groups
    members: list[dict[Outcome, list[str]]] = [{g: [] for g in groups} for _ in range(spec.bin_count)]
    records = dataset.records
    order = np.flatnonzero(in_axis)
    for pos, b, gc in zip(order.tolist(), idx[order].tolist(), codes[order].tolist()):
        members[b][_BY_CODE[gc]].append(records[pos].sample_id)

    bins = tuple(
        HistogramBin(
            lo=edges[i],
            hi=edges[i + 1],
            counts={g: len(members[i][g]) for g in groups},
            members={g: tuple(members[i][g]) for g in groups},
        )
        for i in range(spec.bin_count)
    )
    return ClassHistogram(
        class_index=c,
        spec=spec,
        bins=bins,
        excluded_below=int(below.sum()),
        excluded_above=int(above.sum()),
    )


def build_all_histograms(dataset: Dataset, spec: HistogramSpec) -> list[ClassHistogram]:
    """One histogram per class, in canonical class order."""
    return [build_histogram(dataset, c, spec) for c in range(dataset.k)]


def effective_range(dataset: Dataset, c: int, spec: HistogramSpec) -> tuple[float, float]:
    """Min and max class-c score over the filter-passing records, ignoring
    the current axis bounds. This is the interval to rebin into when a
    classifier's scores occupy only part of the axis."""
    _check_class(dataset, c)
    include, _ = _filter_mask(dataset, c, spec)
    if not include.any():
        raise EmptySelectionError(f"no sample passes the filter for class index {c}")
    s = dataset.score_matrix[:, c][include]
    return float(s.min()), float(s.max())


def _confusion_from(dataset: Dataset, pred: np.ndarray) -> ConfusionMatrix:
    k = dataset.k
    act = dataset.actual_array
    counts = np.bincount(act * k + pred, minlength=k * k).reshape(k, k)
    members: list[list[list[str]]] = [[[] for _ in range(k)] for _ in range(k)]
    for i, r in enumerate(dataset.records):
        members[act[i]][pred[i]].append(r.sample_id)
    return ConfusionMatrix(
        counts=tuple(tuple(int(v) for v in row) for row in counts),
        members=tuple(tuple(tuple(cell) for cell in row) for row in members),
    )


def confusion_matrix(dataset: Dataset) -> ConfusionMatrix:
    return _confusion_from(dataset, dataset.predicted_array)


def per_class_counts(dataset: Dataset) -> tuple[OutcomeCounts, ...]:
    """Exhaustive TP/FP/FN/TN tallies per class; the four always sum to N."""
    pred = dataset.predicted_array
    act = dataset.actual_array
    n = dataset.n
    out = []
    for c in range(dataset.k):
        tp = int(((pred == c) & (act == c)).sum())
        fp = int(((pred == c) & (act != c)).sum())
        fn = int(((pred != c) & (act == c)).sum())
        out.append(OutcomeCounts(tp=tp, fp=fp, fn=fn, tn=n - tp - fp - fn))
    return tuple(out)


def feature_summary(dataset: Dataset, sample_ids: list[str]) -> tuple[FeatureStats, ...]:
    """Five-number summary per feature over the selected samples, skipping
    missing entries. Quartiles interpolate linearly between closest ranks."""
    index = dataset.id_index
    try:
        selected = [dataset.records[index[sid]] for sid in sample_ids]
    except KeyError as e:
        raise KeyError(f"unknown sample id {e.args[0]!r}") from None
    out = []
    for j, name in enumerate(dataset.feature_names):
        vals = [
            r.features[j]
            for r in selected
            if r.features is not None and r.features[j] is not None
        ]
        if not vals:
            out.append(FeatureStats(name=name, count=0))
            continue
        q1, med, q3 = np.percentile(vals, [25, 50, 75], method="linear")
        out.append(
            FeatureStats(
                name=name,
                count=len(vals),
                minimum=min(vals),
                q1=float(q1),
                median=float(med),
                q3=float(q3),
                maximum=max(vals),
            )
        )
    return tuple(out)


def _in_record_order(dataset: Dataset, ids: set[str]) -> list[str]:
    index = dataset.id_index
    return sorted(ids, key=index.__getitem__)


def _locate_highlights(
    dataset: Dataset,
    histograms: list[ClassHistogram],
    sample_ids: list[str],
    skip_class: int | None,
) -> dict[int, dict[int, dict[Outcome, int]]]:
    """Place each selected sample into every class's current histogram,
    honoring that histogram's own filter and axis; samples the filter hides
    are simply not highlighted there."""
    highlights: dict[int, dict[int, dict[Outcome, int]]] = {}
    for h in histograms:
        d = h.class_index
        if d == skip_class:
            continue
        spec = h.spec
        edges = spec.edges()
        per_bin: dict[int, dict[Outcome, int]] = {}
        for sid in sample_ids:
            r = dataset.record(sid)
            o = outcome(r, d)
            if o not in spec.groups:
                continue
            s = r.scores[d]
            if o is Outcome.TN and s < spec.tn_min:
                continue
            if o is Outcome.TP and s > spec.tp_max:
                continue
            if s < spec.axis_lo or s > spec.axis_hi:
                continue
            b = min(bisect_right(edges, s) - 1, spec.bin_count - 1)
            slot = per_bin.setdefault(b, {})
            slot[o] = slot.get(o, 0) + 1
        if per_bin:
            highlights[d] = per_bin
    return highlights


def _cells_of(dataset: Dataset, sample_ids: list[str]) -> tuple[tuple[int, int], ...]:
    pred = dataset.predicted_array
    act = dataset.actual_array
    index = dataset.id_index
    seen: dict[tuple[int, int], None] = {}
    for sid in sample_ids:
        i = index[sid]
        seen.setdefault((int(act[i]), int(pred[i])))
    return tuple(seen)


def select_bar(
    dataset: Dataset,
    histograms: list[ClassHistogram],
    c: int,
    bin_index: int,
    group: Outcome | None = None,
) -> SelectionResult:
    """Resolve a click on one histogram bar (optionally one outcome segment
    of it): the bar's samples, their occurrences in the other classes'
    histograms, and the confusion cells they touch."""
    _check_class(dataset, c)
    h = histograms[c]
    if not 0 <= bin_index < len(h.bins):
        raise IndexError(f"bin index {bin_index} out of range for {len(h.bins)} bins")
    b = h.bins[bin_index]
    if group is not None:
        ids = list(b.members.get(group, ()))
    else:
        ids = _in_record_order(dataset, {sid for mem in b.members.values() for sid in mem})
    return SelectionResult(
        sample_ids=tuple(ids),
        highlights=_locate_highlights(dataset, histograms, ids, skip_class=c),
        cells=_cells_of(dataset, ids),
    )


def select_cell(
    dataset: Dataset,
    histograms: list[ClassHistogram],
    actual: int,
    predicted: int,
) -> SelectionResult:
    """Resolve a click on a confusion-matrix cell: the cell's samples and
    their occurrences in every class's current histogram."""
    _check_class(dataset, actual)
    _check_class(dataset, predicted)
    mask = (dataset.actual_array == actual) & (dataset.predicted_array == predicted)
    ids = [dataset.records[i].sample_id for i in np.flatnonzero(mask)]
    return SelectionResult(
        sample_ids=tuple(ids),
        highlights=_locate_highlights(dataset, histograms, ids, skip_class=None),
        cells=((actual, predicted),) if ids else (),
    )


def reweight_whatif(dataset: Dataset, weights: list[float]) -> WhatIfReport:
    """Preview the decisions after multiplying each class's scores by a
    positive weight: confusion matrices before and after, plus the records
    whose argmax moved. The dataset itself is untouched."""
    if len(weights) != dataset.k:
        raise ValueError(f"expected {dataset.k} weights, got {len(weights)}")
    for w in weights:
        if not (isfinite(w) and w > 0):
            raise ValueError(f"weights must be positive finite reals, got {w!r}")
    w = np.asarray([float(x) for x in weights], dtype=np.float64)
    old_pred = dataset.predicted_array
    new_pred = np.argmax(dataset.score_matrix * w, axis=1)
    changes = tuple(
        WhatIfChange(
            sample_id=dataset.records[i].sample_id,
            old_predicted=int(old_pred[i]),
            new_predicted=int(new_pred[i]),
        )
        for i in np.flatnonzero(old_pred != new_pred)
    )
    return WhatIfReport(
        weights=tuple(float(x) for x in weights),
        before=_confusion_from(dataset, old_pred),
        after=_confusion_from(dataset, new_pred),
        changes=changes,
    )
