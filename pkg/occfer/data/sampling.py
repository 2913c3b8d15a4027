import math

import numpy as np

from occfer.api.data_structures import DatasetSplit
from occfer.api.emotions import NUM_CLASSES


def downsample_per_class(split: DatasetSplit, cap: int | float | None, seed: int) -> DatasetSplit:
    """
    Keep at most `cap` records of every class, sampled uniformly without replacement. Classes are visited in label
    order with a single generator seeded by `seed`; the kept records stay in their input order.

    Args:
        split: the split to down-sample.
        cap: the maximum number of records per class. None or infinity keeps everything.
        seed: the sampling seed.

    Returns:
        the down-sampled split.
    """
    if cap is None or (isinstance(cap, float) and math.isinf(cap)):
        return split
    if cap < 0:
        raise ValueError(f"Cap must be non-negative, got {cap}")
    cap = int(cap)
    rng = np.random.default_rng(seed)
    labels = split.labels
    keep = np.zeros(len(split), dtype=bool)
    for label in range(NUM_CLASSES):
        indices = np.flatnonzero(labels == label)
        if len(indices) <= cap:
            keep[indices] = True
        else:
            keep[rng.choice(indices, size=cap, replace=False)] = True
    return DatasetSplit(tuple(record for record, kept in zip(split.records, keep) if kept))


def join_training_sets(a: DatasetSplit, b: DatasetSplit) -> DatasetSplit:
    """
    Concatenate two splits over the same 8-label space, the records of `a` first.
    """
    return DatasetSplit.concatenate([a, b])
