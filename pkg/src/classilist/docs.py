"""JSON document builders shared by the HTTP API and the static report,
so the two serialize identically.

All functions return plain JSON-ready dicts/lists with a fixed key order;
member id lists are opt-in because they dominate payload size on large
datasets while counts stay small.
"""

from __future__ import annotations

from .analytics import (
    ClassHistogram,
    ConfusionMatrix,
    EmptySelectionError,
    FeatureStats,
    HistogramSpec,
    OutcomeCounts,
    SelectionResult,
    WhatIfReport,
    effective_range,
)
from .model import OUTCOME_ORDER, Dataset, outcome, predicted_class


def spec_doc(spec: HistogramSpec) -> dict:
    return {
        "bins": spec.bin_count,
        "lo": spec.axis_lo,
        "hi": spec.axis_hi,
        "groups": [g.value for g in spec.ordered_groups],
        "tn_min": spec.tn_min,
        "tp_max": spec.tp_max,
    }


def histogram_doc(
    dataset: Dataset,
    h: ClassHistogram,
    include_members: bool = False,
) -> dict:
    groups = h.spec.ordered_groups
    bins = []
    for b in h.bins:
        entry: dict = {
            "lo": b.lo,
            "hi": b.hi,
            "counts": {g.value: b.counts[g] for g in groups},
        }
        if include_members:
            entry["members"] = {g.value: list(b.members[g]) for g in groups}
        bins.append(entry)
    try:
        eff_lo, eff_hi = effective_range(dataset, h.class_index, h.spec)
        effective = {"lo": eff_lo, "hi": eff_hi}
    except EmptySelectionError:
        effective = None
    return {
        "class": dataset.classes[h.class_index].name,
        "class_index": h.class_index,
        "bins": bins,
        "excluded_below": h.excluded_below,
        "excluded_above": h.excluded_above,
        "total_included": h.total_included,
        "effective": effective,
    }


def confusion_doc(dataset: Dataset, cm: ConfusionMatrix, include_members: bool = False) -> dict:
    doc: dict = {
        "classes": list(dataset.class_names),
        "matrix": [list(row) for row in cm.counts],
        "total": cm.total,
    }
    if include_members:
        doc["members"] = [[list(cell) for cell in row] for row in cm.members]
    return doc


def per_class_doc(dataset: Dataset, counts: tuple[OutcomeCounts, ...]) -> list[dict]:
    return [
        {"class": label.name, "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}
        for label, c in zip(dataset.classes, counts)
    ]


def meta_doc(dataset: Dataset, dataset_fingerprint: str, counts: tuple[OutcomeCounts, ...]) -> dict:
    return {
        "fingerprint": dataset_fingerprint,
        "classes": list(dataset.class_names),
        "n": dataset.n,
        "features": list(dataset.feature_names),
        "has_images": any(r.image_ref for r in dataset.records),
        "normalized": dataset.normalized,
        "per_class": per_class_doc(dataset, counts),
    }


def selection_doc(dataset: Dataset, sel: SelectionResult, echo_spec: dict) -> dict:
    marks = []
    for c in sorted(sel.highlights):
        per_bin = sel.highlights[c]
        for b in sorted(per_bin):
            for g in OUTCOME_ORDER:
                if g in per_bin[b]:
                    marks.append(
                        {
                            "class": dataset.classes[c].name,
                            "bin": b,
                            "group": g.value,
                            "count": per_bin[b][g],
                        }
                    )
    return {
        "spec": echo_spec,
        "sample_ids": list(sel.sample_ids),
        "highlights": marks,
        "cells": [
            {"actual": dataset.classes[t].name, "predicted": dataset.classes[p].name}
            for t, p in sel.cells
        ],
    }


def sample_doc(dataset: Dataset, sample_id: str, with_outcomes: bool = False) -> dict:
    r = dataset.record(sample_id)
    features = None
    if r.features is not None:
        features = {name: r.features[j] for j, name in enumerate(dataset.feature_names)}
    doc: dict = {
        "id": r.sample_id,
        "actual": dataset.classes[r.actual].name,
        "predicted": dataset.classes[predicted_class(r)].name,
        "scores": list(r.scores),
        "features": features,
        "image": f"/api/image/{r.sample_id}" if r.image_ref else None,
    }
    if with_outcomes:
        doc["outcomes"] = {
            label.name: outcome(r, label.index).value for label in dataset.classes
        }
    return doc


def feature_stats_doc(stats: tuple[FeatureStats, ...], selection_size: int) -> dict:
    return {
        "count": selection_size,
        "features": [
            {
                "name": s.name,
                "count": s.count,
                "min": s.minimum,
                "q1": s.q1,
                "median": s.median,
                "q3": s.q3,
                "max": s.maximum,
            }
            for s in stats
        ],
    }


def whatif_doc(dataset: Dataset, report: WhatIfReport) -> dict:
    return {
        "weights": list(report.weights),
        "changes": [
            {
                "id": ch.sample_id,
                "old": dataset.classes[ch.old_predicted].name,
                "new": dataset.classes[ch.new_predicted].name,
            }
            for ch in report.changes
        ],
        "before": confusion_doc(dataset, report.before),
        "after": confusion_doc(dataset, report.after),
    }
