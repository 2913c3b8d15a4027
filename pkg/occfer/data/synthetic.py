"""
A desk-scale stand-in for FER+/AffectNet. Every class owns a glyph: a fixed set of pixel positions that are bright
on a dark, noisy background. A fraction `lower_signal_weight` of the glyph pixels lies in the lower half of the
image (rows >= floor(height / 2)) and the rest in the upper half, so the amount of class signal removed by an
upper-half occlusion is controlled exactly.
"""
from typing import List

import gin
import numpy as np

from occfer.api.data_structures import DatasetSplit, ImageRecord
from occfer.api.emotions import NUM_CLASSES, EmotionLabel

from .ferplus import CorpusSplits

SPLIT_FRACTIONS = (0.70, 0.15)


def _round_half_up(value: float) -> int:
    return int(np.floor(value + 0.5))


def glyph_templates(
    height: int,
    width: int,
    lower_signal_weight: float,
    rng: np.random.Generator,
    glyph_size: int | None = None,
) -> List[np.ndarray]:
    """
    Draw one glyph per class as an array of flat pixel indices. Exactly round(w * S) of the S glyph pixels have a
    row index >= floor(height / 2).
    """
    glyph_size = glyph_size or max(4, height * width // 16)
    half = height // 2
    upper_positions = np.arange(half * width)
    lower_positions = np.arange(half * width, height * width)
    n_lower = _round_half_up(lower_signal_weight * glyph_size)
    n_upper = glyph_size - n_lower
    if n_lower > len(lower_positions) or n_upper > len(upper_positions):
        raise ValueError(f"Glyph of {glyph_size} pixels does not fit a {height}x{width} image")

    templates: List[np.ndarray] = []
    seen = set()
    while len(templates) < NUM_CLASSES:
        glyph = np.sort(
            np.concatenate(
                [
                    rng.choice(upper_positions, size=n_upper, replace=False),
                    rng.choice(lower_positions, size=n_lower, replace=False),
                ]
            )
        )
        key = glyph.tobytes()
        if key in seen:
            continue
        seen.add(key)
        templates.append(glyph)
    return templates


@gin.configurable()
def generate_synthetic(
    num_per_class: int,
    height: int,
    width: int,
    lower_signal_weight: float,
    seed: int,
    glyph_size: int | None = None,
    background_max: int = 110,
    glyph_min: int = 150,
    glyph_keep_prob: float = 0.75,
) -> CorpusSplits:
    """
    Generate the synthetic corpus, split 70/15/15 per class.

    Args:
        num_per_class: number of images per class.
        height: image height.
        width: image width.
        lower_signal_weight: fraction of the glyph pixels placed in the lower half.
        seed: the generator seed; identical arguments produce identical splits.
        glyph_size: number of pixels per glyph (defaults to height * width / 16).
        background_max: background noise is uniform in [0, background_max].
        glyph_min: glyph pixels are uniform in [glyph_min, 255].
        glyph_keep_prob: probability that a glyph pixel is drawn in a given image.

    Returns:
        the train / val / test splits of single-channel images.
    """
    if num_per_class < 1:
        raise ValueError(f"num_per_class must be >= 1, got {num_per_class}")
    if height < 8 or width < 8:
        raise ValueError(f"Synthetic images must be at least 8x8, got {height}x{width}")
    if not 0.0 <= lower_signal_weight <= 1.0:
        raise ValueError(f"lower_signal_weight must lie in [0, 1], got {lower_signal_weight}")

    rng = np.random.default_rng(seed)
    templates = glyph_templates(height, width, lower_signal_weight, rng, glyph_size)
    n_train = _round_half_up(SPLIT_FRACTIONS[0] * num_per_class)
    n_val = min(num_per_class - n_train, _round_half_up(SPLIT_FRACTIONS[1] * num_per_class))

    splits: dict[str, list[ImageRecord]] = {"train": [], "val": [], "test": []}
    for label, glyph in zip(EmotionLabel, templates):
        for idx in range(num_per_class):
            image = rng.integers(0, background_max + 1, size=height * width)
            shown = glyph[rng.random(len(glyph)) < glyph_keep_prob]
            image[shown] = rng.integers(glyph_min, 256, size=len(shown))
            split = "train" if idx < n_train else "val" if idx < n_train + n_val else "test"
            pixels = image.astype(np.uint8).reshape(height, width, 1)
            splits[split].append(ImageRecord(pixels, label, split, "synthetic"))

    return CorpusSplits(
        train=DatasetSplit(tuple(splits["train"])),
        val=DatasetSplit(tuple(splits["val"])),
        test=DatasetSplit(tuple(splits["test"])),
    )
