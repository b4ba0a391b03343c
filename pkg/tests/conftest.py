from __future__ import annotations

import random

import pytest

from classilist.model import ClassLabel, Dataset, PredictionRecord

# Six-sample, three-class toy set used as the hand-checkable instance in
# most tests. s6 ties classes A and B, exercising the tie-break rule.
T1_ROWS = [
    ("s1", 0, (0.9, 0.1, 0.0), 1.0),
    ("s2", 0, (0.4, 0.5, 0.1), 2.0),
    ("s3", 1, (0.2, 0.7, 0.1), 3.0),
    ("s4", 2, (0.5, 0.2, 0.3), 4.0),
    ("s5", 2, (0.0, 0.0, 1.0), 5.0),
    ("s6", 1, (0.5, 0.5, 0.0), 6.0),
]


def make_t1() -> Dataset:
    return Dataset(
        classes=tuple(ClassLabel(n, i) for i, n in enumerate("ABC")),
        feature_names=("f1",),
        records=tuple(
            PredictionRecord(sample_id=sid, actual=actual, scores=scores, features=(f,))
            for sid, actual, scores, f in T1_ROWS
        ),
        normalized=False,
    )


@pytest.fixture
def t1() -> Dataset:
    return make_t1()


def random_dataset(
    rng: random.Random,
    max_n: int = 1000,
    max_k: int = 10,
    n: int | None = None,
    k: int | None = None,
    with_features: bool = True,
) -> Dataset:
    """A valid random dataset with scores in [0, 1]. Roughly a third of the
    scores sit exactly on decile bin edges to exercise boundary handling."""
    k = k if k is not None else rng.randint(2, max_k)
    n = n if n is not None else rng.randint(1, max_n)
    f = rng.randint(0, 3) if with_features else 0
    records = []
    for i in range(n):
        scores = [
            round(rng.random(), 1) if rng.random() < 0.3 else rng.random()
            for _ in range(k)
        ]
        if all(s == 0.0 for s in scores):
            scores[rng.randrange(k)] = 0.5
        features = None
        if f:
            if rng.random() < 0.9:
                features = tuple(
                    None if rng.random() < 0.15 else round(rng.uniform(-5.0, 5.0), 3)
                    for _ in range(f)
                )
            else:
                features = (None,) * f
        records.append(
            PredictionRecord(
                sample_id=f"r{i:04d}",
                actual=rng.randrange(k),
                scores=tuple(scores),
                features=features,
            )
        )
    return Dataset(
        classes=tuple(ClassLabel(f"C{i}", i) for i in range(k)),
        feature_names=tuple(f"f{j}" for j in range(f)),
        records=tuple(records),
        normalized=False,
    )
