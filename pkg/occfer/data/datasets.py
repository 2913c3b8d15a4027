from typing import Tuple

import numpy as np
import torch
from torch.utils.data import Dataset
from torchtyping import TensorType

from occfer.api.data_structures import DatasetSplit
from occfer.transforms.functional import gray_to_rgb
from occfer.transforms.pipeline import ImagePipeline


class FaceDataset(Dataset):
    """
    A torch dataset over a `DatasetSplit` that applies an `ImagePipeline` to every record. The flip randomness of
    an item only depends on (seed, epoch, index), so the augmented stream is identical for any number of data
    loader workers. Call `set_epoch` before iterating over a new epoch.
    """

    def __init__(self, split: DatasetSplit, pipeline: ImagePipeline, seed: int = 0):
        self.split = split
        self.pipeline = pipeline
        self.seed = seed
        self.epoch = 0

    def set_epoch(self, epoch: int):
        self.epoch = epoch

    def __len__(self) -> int:
        return len(self.split)

    def __getitem__(self, idx: int) -> Tuple[TensorType[3, "height", "width", float], int]:
        record = self.split[idx]
        rng = (
            np.random.default_rng([self.seed, self.epoch, idx])
            if self.pipeline.flip_augment
            else None
        )
        image = self.pipeline(record.pixels, rng)
        return torch.from_numpy(image), int(record.label)


def compute_channel_means(split: DatasetSplit) -> Tuple[float, float, float]:
    """
    Per-channel mean intensity of a (training) split after gray-to-RGB expansion.
    """
    if len(split) == 0:
        return 0.0, 0.0, 0.0
    sums = np.zeros(3, dtype=np.float64)
    n_pixels = 0
    for record in split:
        rgb = gray_to_rgb(record.pixels)
        sums += rgb.reshape(-1, 3).sum(axis=0, dtype=np.float64)
        n_pixels += rgb.shape[0] * rgb.shape[1]
    means = sums / n_pixels
    return float(means[0]), float(means[1]), float(means[2])
