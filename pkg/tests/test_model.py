from __future__ import annotations

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from classilist.model import (
    ClassLabel,
    Dataset,
    Outcome,
    PredictionRecord,
    normalize_scores,
    outcome,
    predicted_class,
    validate_dataset,
)

from .conftest import make_t1, random_dataset
from . import oracle


def rec(actual, scores, sid="x", features=None):
    return PredictionRecord(sample_id=sid, actual=actual, scores=scores, features=features)


class TestPredictedClass:
    def test_unique_maximum(self):
        assert predicted_class(rec(0, (0.9, 0.1, 0.0))) == 0

    def test_tie_breaks_to_lowest_index(self):
        assert predicted_class(rec(0, (0.5, 0.5, 0.0))) == 0
        assert predicted_class(rec(0, (0.1, 0.7, 0.7))) == 1

    def test_t1_s4(self, t1):
        assert predicted_class(t1.record("s4")) == 0

    @given(st.lists(st.floats(min_value=0, max_value=100), min_size=2, max_size=10))
    def test_matches_scan_oracle(self, scores):
        assert predicted_class(rec(0, tuple(scores))) == oracle.o_predicted(scores)


class TestOutcome:
    def test_correct_prediction_is_tp(self):
        assert outcome(rec(0, (0.9, 0.1, 0.0)), 0) is Outcome.TP

    def test_missed_own_class_and_wrongly_predicted(self, t1):
        s2 = t1.record("s2")
        assert outcome(s2, 0) is Outcome.FN
        assert outcome(s2, 1) is Outcome.FP

    def test_unrelated_class_is_tn(self, t1):
        assert outcome(t1.record("s5"), 0) is Outcome.TN

    def test_class_out_of_range(self):
        with pytest.raises(IndexError):
            outcome(rec(0, (0.9, 0.1)), 2)
        with pytest.raises(IndexError):
            outcome(rec(0, (0.9, 0.1)), -1)

    def test_partition_on_t1(self, t1):
        for r in t1.records:
            for c in range(t1.k):
                labels = [
                    g
                    for g in Outcome
                    if outcome(r, c) is g
                ]
                assert len(labels) == 1

    def test_partition_and_marginals_random(self):
        rng = random.Random(11)
        for _ in range(20):
            ds = random_dataset(rng, max_n=60, max_k=6)
            for c in range(ds.k):
                tally = {g: 0 for g in Outcome}
                for r in ds.records:
                    tally[outcome(r, c)] += 1
                actual_c = sum(1 for r in ds.records if r.actual == c)
                predicted_c = sum(1 for r in ds.records if predicted_class(r) == c)
                assert tally[Outcome.TP] + tally[Outcome.FN] == actual_c
                assert tally[Outcome.TP] + tally[Outcome.FP] == predicted_c
                assert sum(tally.values()) == ds.n

    def test_tp_for_exactly_one_class_iff_correct(self):
        rng = random.Random(12)
        ds = random_dataset(rng, n=120, k=5)
        for r in ds.records:
            tp_classes = [c for c in range(ds.k) if outcome(r, c) is Outcome.TP]
            if predicted_class(r) == r.actual:
                assert tp_classes == [r.actual]
            else:
                assert tp_classes == []


class TestNormalizeScores:
    def test_simple(self):
        out = normalize_scores(rec(0, (2.0, 1.0, 1.0)))
        assert out.scores == (0.5, 0.25, 0.25)

    def test_identity_on_normalized_row(self):
        assert normalize_scores(rec(0, (1.0, 0.0, 0.0))).scores == (1.0, 0.0, 0.0)

    def test_tie_row_keeps_argmax(self):
        r = rec(1, (0.3, 0.3, 0.3))
        out = normalize_scores(r)
        assert out.scores == pytest.approx((1 / 3, 1 / 3, 1 / 3))
        assert predicted_class(out) == predicted_class(r) == 0

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            normalize_scores(rec(0, (0.0, 0.0)))

    def test_preserves_metadata(self):
        r = rec(1, (2.0, 2.0), sid="a", features=(1.0, None))
        out = normalize_scores(r)
        assert (out.sample_id, out.actual, out.features) == ("a", 1, (1.0, None))

    @given(
        st.lists(
            st.floats(min_value=0, max_value=1000),
            min_size=2,
            max_size=8,
        ).filter(lambda xs: sum(xs) > 0)
    )
    def test_sums_to_one_and_argmax_stable(self, scores):
        r = rec(0, tuple(scores))
        out = normalize_scores(r)
        assert abs(sum(out.scores) - 1.0) < 1e-9
        assert predicted_class(out) == predicted_class(r)


class TestDatasetConstruction:
    def test_needs_two_classes(self):
        with pytest.raises(ValueError):
            Dataset(classes=(ClassLabel("A", 0),), feature_names=(), records=())

    def test_duplicate_class_names(self):
        with pytest.raises(ValueError):
            Dataset(
                classes=(ClassLabel("A", 0), ClassLabel("A", 1)),
                feature_names=(),
                records=(),
            )

    def test_non_contiguous_indices(self):
        with pytest.raises(ValueError):
            Dataset(
                classes=(ClassLabel("A", 0), ClassLabel("B", 2)),
                feature_names=(),
                records=(),
            )

    def test_empty_class_name(self):
        with pytest.raises(ValueError):
            Dataset(
                classes=(ClassLabel("", 0), ClassLabel("B", 1)),
                feature_names=(),
                records=(),
            )


def two_class_dataset(records, feature_names=(), normalized=False):
    return Dataset(
        classes=(ClassLabel("A", 0), ClassLabel("B", 1)),
        feature_names=feature_names,
        records=records,
        normalized=normalized,
    )


class TestValidateDataset:
    def test_t1_is_clean(self, t1):
        report = validate_dataset(t1)
        assert report.ok
        assert report.violations == ()
        assert report.warnings == ()

    def test_duplicate_sample_id(self):
        ds = two_class_dataset((rec(0, (0.9, 0.1), sid="s1"), rec(1, (0.1, 0.9), sid="s1")))
        report = validate_dataset(ds)
        assert [v.kind for v in report.violations] == ["duplicate-id"]

    def test_negative_score(self):
        ds = two_class_dataset((rec(0, (0.5, -0.1), sid="a"),))
        report = validate_dataset(ds)
        assert [v.kind for v in report.violations] == ["negative-score"]

    def test_non_finite_score(self):
        ds = two_class_dataset((rec(0, (math.nan, 0.1), sid="a"),))
        assert [v.kind for v in validate_dataset(ds).violations] == ["non-finite"]

    def test_all_zero_row(self):
        ds = two_class_dataset((rec(0, (0.0, 0.0), sid="a"),))
        assert [v.kind for v in validate_dataset(ds).violations] == ["all-zero-scores"]

    def test_score_length_mismatch(self):
        ds = two_class_dataset((rec(0, (0.5, 0.4, 0.1), sid="a"),))
        assert [v.kind for v in validate_dataset(ds).violations] == ["score-length"]

    def test_actual_out_of_range(self):
        ds = two_class_dataset((rec(5, (0.5, 0.4), sid="a"),))
        assert [v.kind for v in validate_dataset(ds).violations] == ["actual-out-of-range"]

    def test_feature_length_mismatch(self):
        ds = two_class_dataset(
            (rec(0, (0.5, 0.4), sid="a", features=(1.0, 2.0)),),
            feature_names=("f1",),
        )
        assert [v.kind for v in validate_dataset(ds).violations] == ["feature-length"]

    def test_non_finite_feature(self):
        ds = two_class_dataset(
            (rec(0, (0.5, 0.4), sid="a", features=(math.inf,)),),
            feature_names=("f1",),
        )
        assert [v.kind for v in validate_dataset(ds).violations] == ["non-finite"]

    def test_row_sum_warning_when_flagged_normalized(self):
        ds = two_class_dataset((rec(0, (0.5, 0.4), sid="a"),), normalized=True)
        report = validate_dataset(ds)
        assert report.ok
        assert [w.kind for w in report.warnings] == ["row-sum"]

    def test_no_row_sum_warning_when_unnormalized(self):
        ds = two_class_dataset((rec(0, (0.5, 0.4), sid="a"),), normalized=False)
        assert validate_dataset(ds).warnings == ()

    def test_multiple_violations_all_reported(self):
        ds = two_class_dataset(
            (
                rec(0, (0.5, -0.1), sid="a"),
                rec(9, (0.5, 0.5), sid="a"),
            )
        )
        kinds = sorted(v.kind for v in validate_dataset(ds).violations)
        assert kinds == ["actual-out-of-range", "duplicate-id", "negative-score"]


class TestPartitionProperty:
    """Outcome definitions partition every (record, class) pair."""

    @given(
        st.integers(min_value=2, max_value=6).flatmap(
            lambda k: st.tuples(
                st.just(k),
                st.integers(min_value=0, max_value=k - 1),
                st.lists(
                    st.floats(min_value=0, max_value=1, allow_nan=False),
                    min_size=k,
                    max_size=k,
                ).filter(lambda xs: any(x > 0 for x in xs)),
            )
        )
    )
    def test_exactly_one_outcome(self, kac):
        k, actual, scores = kac
        r = rec(actual, tuple(scores))
        for c in range(k):
            got = outcome(r, c)
            p = predicted_class(r)
            expected = (
                Outcome.TP if (p == c and actual == c)
                else Outcome.FP if p == c
                else Outcome.FN if actual == c
                else Outcome.TN
            )
            assert got is expected


def test_dataset_cached_views_match_records(t1):
    assert t1.score_matrix.shape == (6, 3)
    assert t1.actual_array.tolist() == [r.actual for r in t1.records]
    assert t1.predicted_array.tolist() == [predicted_class(r) for r in t1.records]
    assert t1.record("s3").sample_id == "s3"
    assert make_t1() == t1
