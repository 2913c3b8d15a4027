"""
FER+ ingestion. Two files are read side by side, row i of one describing row i of the other:

- the pixel CSV (the FER 2013 file): `emotion,pixels,Usage`, where `pixels` holds 48 * 48 = 2304 space-separated
  grayscale values and `Usage` is one of Training / PublicTest / PrivateTest. The `emotion` column is ignored.
- the label CSV (the FER+ file): `Usage,Image name,<10 vote columns>`. The vote columns are looked up by header
  name, so their order does not matter. The expected names are listed in `FERPLUS_LABEL_COLUMNS`: the eight
  emotions plus `unknown` and `NF` (not a face).
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from occfer.api.data_structures import SPLIT_TAGS, DatasetSplit, ImageRecord, IngestionReport
from occfer.api.emotions import EmotionLabel
from occfer.api.errors import DatasetFormatError

FERPLUS_IMAGE_SIZE = 48
FERPLUS_USAGE_TO_SPLIT = {"Training": "train", "PublicTest": "val", "PrivateTest": "test"}
FERPLUS_LABEL_COLUMNS: Dict[str, EmotionLabel | None] = {
    "neutral": EmotionLabel.NEUTRAL,
    "happiness": EmotionLabel.HAPPINESS,
    "surprise": EmotionLabel.SURPRISE,
    "sadness": EmotionLabel.SADNESS,
    "anger": EmotionLabel.ANGER,
    "disgust": EmotionLabel.DISGUST,
    "fear": EmotionLabel.FEAR,
    "contempt": EmotionLabel.CONTEMPT,
    "unknown": None,
    "nf": None,
}


@dataclass(frozen=True)
class CorpusSplits:
    train: DatasetSplit
    val: DatasetSplit
    test: DatasetSplit
    report: IngestionReport = field(default_factory=IngestionReport, compare=False)

    def __getitem__(self, split: str) -> DatasetSplit:
        if split not in SPLIT_TAGS:
            raise KeyError(split)
        return getattr(self, split)

    def as_dict(self) -> Dict[str, DatasetSplit]:
        return {split: self[split] for split in SPLIT_TAGS}


def _vote_columns(label_df: pd.DataFrame, path: Path) -> Dict[str, str]:
    normalized = {str(column).strip().lower(): column for column in label_df.columns}
    missing = [name for name in FERPLUS_LABEL_COLUMNS if name not in normalized]
    if missing:
        raise DatasetFormatError(path, 0, f"missing vote columns {missing}")
    return {name: normalized[name] for name in FERPLUS_LABEL_COLUMNS}


def majority_vote(votes: np.ndarray) -> tuple[EmotionLabel | None, bool]:
    """
    Turn the vote counts of one image into a label.

    Args:
        votes: an array of 10 counts ordered as [8 emotions in label order, unknown, not-a-face].

    Returns:
        a pair (label, is_tie). The label is None when the plurality falls on unknown / not-a-face (or when no
        emotion received a vote); ties between emotions resolve to the lowest label index.
    """
    emotion_votes = votes[:8]
    best = emotion_votes.max()
    if best <= 0 or votes[8:].max() > best:
        return None, False
    winners = np.flatnonzero(emotion_votes == best)
    return EmotionLabel(int(winners[0])), len(winners) > 1


def load_ferplus(pixel_csv_path: str | Path, label_csv_path: str | Path) -> CorpusSplits:
    """
    Load FER+ into train / val / test splits labeled by majority vote. Rows whose plurality vote is unknown or not a
    face are dropped and counted in the report, as well as the number of emotion ties.
    """
    pixel_csv_path, label_csv_path = Path(pixel_csv_path), Path(label_csv_path)
    pixel_df = pd.read_csv(pixel_csv_path, dtype=str, keep_default_na=False)
    label_df = pd.read_csv(label_csv_path, dtype=str, keep_default_na=False)
    if len(pixel_df) != len(label_df):
        raise DatasetFormatError(
            label_csv_path,
            min(len(pixel_df), len(label_df)) + 1,
            f"{len(pixel_df)} pixel rows but {len(label_df)} label rows",
        )
    columns = {str(column).strip().lower(): column for column in pixel_df.columns}
    if "pixels" not in columns or "usage" not in columns:
        raise DatasetFormatError(pixel_csv_path, 0, "expected `pixels` and `Usage` columns")
    vote_columns = _vote_columns(label_df, label_csv_path)
    emotion_order = sorted(
        (name for name, label in FERPLUS_LABEL_COLUMNS.items() if label is not None),
        key=lambda name: FERPLUS_LABEL_COLUMNS[name],
    )
    ordered_vote_columns = [vote_columns[name] for name in emotion_order] + [
        vote_columns["unknown"],
        vote_columns["nf"],
    ]

    report = IngestionReport(n_rows=len(pixel_df))
    records: Dict[str, List[ImageRecord]] = {split: [] for split in SPLIT_TAGS}
    n_pixels = FERPLUS_IMAGE_SIZE * FERPLUS_IMAGE_SIZE
    for idx in range(len(pixel_df)):
        row_number = idx + 1
        usage = pixel_df.at[idx, columns["usage"]].strip()
        if usage not in FERPLUS_USAGE_TO_SPLIT:
            raise DatasetFormatError(pixel_csv_path, row_number, f"unknown usage {usage!r}")
        try:
            values = np.array(pixel_df.at[idx, columns["pixels"]].split(), dtype=np.int64)
            votes = np.array(
                [float(label_df.at[idx, column] or 0) for column in ordered_vote_columns]
            )
        except ValueError as error:
            raise DatasetFormatError(pixel_csv_path, row_number, str(error)) from None
        if values.size != n_pixels:
            raise DatasetFormatError(
                pixel_csv_path, row_number, f"expected {n_pixels} pixel values, got {values.size}"
            )
        if values.min() < 0 or values.max() > 255:
            raise DatasetFormatError(pixel_csv_path, row_number, "pixel value outside [0, 255]")

        label, is_tie = majority_vote(votes)
        if label is None:
            report.n_dropped_non_face += 1
            continue
        report.n_ties += int(is_tie)
        split = FERPLUS_USAGE_TO_SPLIT[usage]
        pixels = values.astype(np.uint8).reshape(FERPLUS_IMAGE_SIZE, FERPLUS_IMAGE_SIZE, 1)
        records[split].append(ImageRecord(pixels, label, split, "ferplus"))
        report.n_emitted += 1

    return CorpusSplits(
        train=DatasetSplit(tuple(records["train"])),
        val=DatasetSplit(tuple(records["val"])),
        test=DatasetSplit(tuple(records["test"])),
        report=report,
    )
