from pathlib import Path
from typing import List, Sequence

import numpy as np
import pandas as pd
import pytest
from PIL import Image

from occfer.api import DatasetSplit, ImageRecord

FERPLUS_VOTE_HEADER = [
    "neutral",
    "happiness",
    "surprise",
    "sadness",
    "anger",
    "disgust",
    "fear",
    "contempt",
    "unknown",
    "NF",
]


def write_ferplus_csvs(
    tmp_path: Path, usages: Sequence[str], votes: Sequence[Sequence[int]], seed: int = 0
) -> tuple[Path, Path]:
    rng = np.random.default_rng(seed)
    pixel_rows = [
        (0, " ".join(str(v) for v in rng.integers(0, 256, size=48 * 48)), usage) for usage in usages
    ]
    label_rows = [
        (usage, f"fer{idx:07d}.png", *row) for idx, (usage, row) in enumerate(zip(usages, votes))
    ]
    pixel_path = tmp_path / "fer2013.csv"
    label_path = tmp_path / "fer2013new.csv"
    pd.DataFrame(pixel_rows, columns=["emotion", "pixels", "Usage"]).to_csv(pixel_path, index=False)
    pd.DataFrame(label_rows, columns=["Usage", "Image name", *FERPLUS_VOTE_HEADER]).to_csv(
        label_path, index=False
    )
    return pixel_path, label_path


@pytest.fixture()
def ferplus_csvs(tmp_path: Path) -> tuple[Path, Path]:
    # neutral, happiness, surprise, sadness, anger, disgust, fear, contempt, unknown, NF
    return write_ferplus_csvs(
        tmp_path,
        usages=["Training", "PublicTest", "PrivateTest"],
        votes=[
            [0, 0, 0, 0, 8, 0, 0, 0, 2, 0],
            [1, 0, 6, 0, 0, 0, 3, 0, 0, 0],
            [0, 0, 0, 1, 4, 4, 0, 0, 1, 0],
        ],
    )


@pytest.fixture()
def image_dir(tmp_path: Path) -> Path:
    rng = np.random.default_rng(0)
    root = tmp_path / "images"
    root.mkdir()
    Image.fromarray(rng.integers(0, 256, size=(10, 8), dtype=np.uint8)).save(root / "gray.png")
    Image.fromarray(rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8)).save(root / "rgb.png")
    return root


def make_split(labels: Sequence[int], split: str = "train", size: int = 4) -> DatasetSplit:
    records: List[ImageRecord] = [
        ImageRecord(np.full((size, size), idx % 256, dtype=np.uint8), label, split, "synthetic")
        for idx, label in enumerate(labels)
    ]
    return DatasetSplit(tuple(records))
