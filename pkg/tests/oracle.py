"""Brute-force recounts straight from the definitions.

Everything here is deliberately written as plain per-record Python loops,
independent of the engine's vectorized paths, so the two can be compared
exactly. Outcome groups are the lowercase strings "tp"/"fp"/"fn"/"tn".
"""

from __future__ import annotations

GROUPS = ("tp", "fp", "fn", "tn")


def o_predicted(scores):
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def o_outcome(actual, scores, c):
    p = o_predicted(scores)
    if p == c:
        return "tp" if actual == c else "fp"
    return "fn" if actual == c else "tn"


def o_confusion(dataset):
    k = dataset.k
    counts = [[0] * k for _ in range(k)]
    members = [[[] for _ in range(k)] for _ in range(k)]
    for r in dataset.records:
        p = o_predicted(r.scores)
        counts[r.actual][p] += 1
        members[r.actual][p].append(r.sample_id)
    return counts, members


def o_per_class_counts(dataset):
    out = []
    for c in range(dataset.k):
        tally = {g: 0 for g in GROUPS}
        for r in dataset.records:
            tally[o_outcome(r.actual, r.scores, c)] += 1
        out.append(tally)
    return out


def o_edges(bin_count, lo, hi):
    e = [lo + (hi - lo) * (i / bin_count) for i in range(bin_count + 1)]
    e[0] = lo
    e[-1] = hi
    return e


def o_bin_of(s, edges):
    """Linear scan: half-open bins, the last closed at the top edge.
    Returns None when s is off the axis."""
    bins = len(edges) - 1
    if s < edges[0] or s > edges[-1]:
        return None
    for i in range(bins):
        if edges[i] <= s < edges[i + 1]:
            return i
    return bins - 1  # s == top edge


def o_passes_filter(group, s, groups, tn_min, tp_max):
    if group not in groups:
        return False
    if group == "tn" and s < tn_min:
        return False
    if group == "tp" and s > tp_max:
        return False
    return True


def o_histogram(dataset, c, bin_count=10, lo=0.0, hi=1.0,
                groups=("tp", "fp", "fn"), tn_min=0.01, tp_max=1.0):
    """Returns (bins, excluded_below, excluded_above) where bins is a list
    of {group: [sample_ids]} dicts covering the axis."""
    edges = o_edges(bin_count, lo, hi)
    bins = [{g: [] for g in groups} for _ in range(bin_count)]
    below = above = 0
    for r in dataset.records:
        g = o_outcome(r.actual, r.scores, c)
        s = r.scores[c]
        if not o_passes_filter(g, s, groups, tn_min, tp_max):
            continue
        if s < lo:
            below += 1
        elif s > hi:
            above += 1
        else:
            bins[o_bin_of(s, edges)][g].append(r.sample_id)
    return bins, below, above


def o_effective_range(dataset, c, groups=("tp", "fp", "fn"), tn_min=0.01, tp_max=1.0):
    vals = [
        r.scores[c]
        for r in dataset.records
        if o_passes_filter(o_outcome(r.actual, r.scores, c), r.scores[c], groups, tn_min, tp_max)
    ]
    return (min(vals), max(vals)) if vals else None


def o_highlights(dataset, sample_ids, per_class_specs, skip_class=None):
    """per_class_specs: list of (bin_count, lo, hi, groups, tn_min, tp_max)
    in class order. Returns {class: {bin: {group: count}}}."""
    ids = set(sample_ids)
    out = {}
    for d, (bin_count, lo, hi, groups, tn_min, tp_max) in enumerate(per_class_specs):
        if d == skip_class:
            continue
        edges = o_edges(bin_count, lo, hi)
        per_bin = {}
        for r in dataset.records:
            if r.sample_id not in ids:
                continue
            g = o_outcome(r.actual, r.scores, d)
            s = r.scores[d]
            if not o_passes_filter(g, s, groups, tn_min, tp_max):
                continue
            b = o_bin_of(s, edges)
            if b is None:
                continue
            per_bin.setdefault(b, {}).setdefault(g, 0)
            per_bin[b][g] += 1
        if per_bin:
            out[d] = per_bin
    return out


def o_cells(dataset, sample_ids):
    ids = set(sample_ids)
    cells = []
    for r in dataset.records:
        if r.sample_id in ids:
            cell = (r.actual, o_predicted(r.scores))
            if cell not in cells:
                cells.append(cell)
    return cells


def o_select_bar(dataset, c, bin_index, group, per_class_specs):
    bin_count, lo, hi, groups, tn_min, tp_max = per_class_specs[c]
    bins, _, _ = o_histogram(dataset, c, bin_count, lo, hi, groups, tn_min, tp_max)
    if group is not None:
        ids = list(bins[bin_index].get(group, []))
    else:
        chosen = {sid for mem in bins[bin_index].values() for sid in mem}
        ids = [r.sample_id for r in dataset.records if r.sample_id in chosen]
    return ids, o_highlights(dataset, ids, per_class_specs, skip_class=c), o_cells(dataset, ids)


def o_select_cell(dataset, actual, predicted, per_class_specs):
    ids = [
        r.sample_id
        for r in dataset.records
        if r.actual == actual and o_predicted(r.scores) == predicted
    ]
    cells = [(actual, predicted)] if ids else []
    return ids, o_highlights(dataset, ids, per_class_specs, skip_class=None), cells
