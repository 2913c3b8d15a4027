import math

import numpy as np
import pytest

from occfer.data import downsample_per_class, join_training_sets

from .fixtures import *


@pytest.fixture()
def imbalanced():
    return make_split([0] * 30 + [1] * 5 + [7] * 12)


@pytest.mark.parametrize("cap", [None, math.inf, 30, 100])
def test__downsample_per_class__cap_not_binding_keeps_all(imbalanced, cap):
    assert downsample_per_class(imbalanced, cap, seed=0).records == imbalanced.records


def test__downsample_per_class__caps_every_class(imbalanced):
    sampled = downsample_per_class(imbalanced, 10, seed=0)
    counts = sampled.class_counts
    assert counts[0] == 10
    assert counts[1] == 5
    assert counts[7] == 10


def test__downsample_per_class__same_seed_same_subset(imbalanced):
    first = downsample_per_class(imbalanced, 4, seed=3)
    second = downsample_per_class(imbalanced, 4, seed=3)
    assert first.records == second.records


def test__downsample_per_class__keeps_input_order(imbalanced):
    sampled = downsample_per_class(imbalanced, 4, seed=1)
    ids = [id(record) for record in imbalanced]
    positions = [ids.index(id(record)) for record in sampled]
    assert positions == sorted(positions)


def test__downsample_per_class__rejects_negative_cap(imbalanced):
    with pytest.raises(ValueError):
        downsample_per_class(imbalanced, -1, seed=0)


def test__join_training_sets__sizes(imbalanced):
    empty = make_split([])
    assert join_training_sets(empty, imbalanced).records == imbalanced.records
    doubled = join_training_sets(imbalanced, imbalanced)
    assert len(doubled) == 2 * len(imbalanced)
    assert np.array_equal(doubled.class_counts, 2 * imbalanced.class_counts)
