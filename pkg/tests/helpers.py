"""Shared test builders: canned feature vectors, random training sets for
oracle-equivalence checks, and the engineered stopping-rule datasets.

Everything here is deterministic given its seed; no use of hash(), whose
salt changes per process.
"""

from __future__ import annotations

import random
from fractions import Fraction

from delaytree.cart import TrainingSet
from delaytree.features import (
    CATEGORICAL,
    CONTINUOUS,
    FEATURE_SCHEMA,
    FeatureSchema,
    FeatureSpec,
    FeatureVector,
)

PATTERN_A = "delay-slight delay-slight delay"
PATTERN_B = "slight delay-slight delay-slight delay"


def make_fv(**overrides) -> FeatureVector:
    base = dict(
        month=9,
        season="Fall",
        hour_interval="Morning",
        weekend=0,
        us_holiday=0,
        canada_holiday=0,
        temperature_f=60.0,
        visibility=10,
        precipitation_in=0.0,
        condition="Clear",
    )
    base.update(overrides)
    return FeatureVector(**base)


def _bucket(value, n: int) -> int:
    """Deterministic stand-in for hash(): stable across processes."""
    return sum(str(value).encode()) % n


def random_training_set(
    seed: int,
    max_rows: int = 200,
    max_features: int = 4,
    max_levels: int = 6,
    distinct_continuous: int = 10,
) -> TrainingSet:
    """A random mixed-feature dataset whose labels partially follow one
    anchor feature, so grown trees have real structure to verify."""
    rng = random.Random(seed)
    n_features = rng.randint(1, max_features)
    specs = []
    for i in range(n_features):
        if rng.random() < 0.5:
            specs.append(FeatureSpec(f"f{i}", CONTINUOUS))
        else:
            k = rng.randint(2, max_levels)
            specs.append(FeatureSpec(f"f{i}", CATEGORICAL, tuple("abcdef"[:k])))
    schema = FeatureSchema(specs)
    classes = [f"c{j}" for j in range(rng.randint(2, 4))]
    anchor = specs[rng.randrange(n_features)]
    noise = rng.uniform(0.1, 0.6)
    rows = []
    for _ in range(rng.randint(20, max_rows)):
        feats = {}
        for spec in specs:
            if spec.kind == CONTINUOUS:
                feats[spec.name] = float(rng.randint(0, distinct_continuous - 1))
            else:
                feats[spec.name] = rng.choice(spec.levels)
        if rng.random() < noise:
            label = rng.choice(classes)
        else:
            label = classes[_bucket(feats[anchor.name], len(classes))]
        rows.append((feats, label))
    return TrainingSet(schema, rows)


def weekend_split_set(left_counts: dict, right_counts: dict) -> TrainingSet:
    """Full-schema dataset where only `weekend` varies: weekend=0 rows get
    left_counts labels, weekend=1 rows right_counts. The single available
    split therefore has an exactly computable gain."""
    rows = []
    for weekend, counts in ((0, left_counts), (1, right_counts)):
        for label in sorted(counts):
            rows.extend((make_fv(weekend=weekend), label) for _ in range(counts[label]))
    return TrainingSet(FEATURE_SCHEMA, rows)


def exact_binary_gain(left_counts: dict, right_counts: dict) -> Fraction:
    """Direct rational evaluation of the split gain for weekend_split_set."""

    def gini_fraction(counts: dict) -> Fraction:
        n = sum(counts.values())
        return 1 - sum(Fraction(c, n) ** 2 for c in counts.values())

    parent = {
        k: left_counts.get(k, 0) + right_counts.get(k, 0)
        for k in set(left_counts) | set(right_counts)
    }
    nl = sum(left_counts.values())
    nr = sum(right_counts.values())
    n = nl + nr
    return (
        gini_fraction(parent)
        - Fraction(nl, n) * gini_fraction(left_counts)
        - Fraction(nr, n) * gini_fraction(right_counts)
    )


# Engineered stopping-rule fixtures: the lone candidate split's true gain is
# exactly 1/250 = 0.004 and 3/500 = 0.006 respectively.
GAIN_0004_SIDES = ({PATTERN_A: 0, PATTERN_B: 80}, {PATTERN_A: 9, PATTERN_B: 91})
GAIN_0006_SIDES = ({PATTERN_A: 4, PATTERN_B: 96}, {PATTERN_A: 18, PATTERN_B: 102})
