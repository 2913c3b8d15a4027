"""
Manifest CSV: one image per row with the columns `relpath,label,split` (header row required) and an optional
`source` column. `relpath` is resolved against the image root; absolute paths are used as they are.
"""
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from occfer.api.data_structures import SPLIT_TAGS, DatasetSplit, ImageRecord, IngestionReport
from occfer.api.emotions import NUM_CLASSES, EmotionLabel
from occfer.api.errors import DatasetFormatError, LabelRangeError, MissingImageError

from .ferplus import CorpusSplits

MANIFEST_COLUMNS = ("relpath", "label", "split")
SPLIT_ALIASES = {
    "train": "train",
    "training": "train",
    "val": "val",
    "valid": "val",
    "validation": "val",
    "test": "test",
}


def decode_image(path: Path) -> np.ndarray:
    """
    Decode a PNG / JPEG file into an uint8 (height, width, channels) array with 1 or 3 channels.
    """
    if not path.is_file():
        raise MissingImageError(path)
    try:
        with Image.open(path) as image:
            mode = "L" if image.mode in ("1", "L", "I;16", "I") else "RGB"
            pixels = np.asarray(image.convert(mode), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as error:
        raise MissingImageError(path, str(error)) from None
    return pixels[:, :, None] if pixels.ndim == 2 else pixels


def _parse_rows(manifest_path: Path) -> List[Tuple[int, str, EmotionLabel, str, str | None]]:
    df = pd.read_csv(manifest_path, dtype=str, keep_default_na=False)
    missing = [column for column in MANIFEST_COLUMNS if column not in df.columns]
    if missing:
        raise DatasetFormatError(manifest_path, 0, f"missing columns {missing}")
    has_source = "source" in df.columns
    rows = []
    for idx in range(len(df)):
        row_number = idx + 1
        relpath = df.at[idx, "relpath"].strip()
        if not relpath:
            raise DatasetFormatError(manifest_path, row_number, "empty relpath")
        raw_label = df.at[idx, "label"].strip()
        try:
            label_value = int(raw_label)
        except ValueError:
            raise DatasetFormatError(
                manifest_path, row_number, f"label {raw_label!r} is not an integer"
            ) from None
        if not 0 <= label_value < NUM_CLASSES:
            raise LabelRangeError(manifest_path, row_number, label_value)
        split = SPLIT_ALIASES.get(df.at[idx, "split"].strip().lower())
        if split is None:
            raise DatasetFormatError(
                manifest_path, row_number, f"unknown split {df.at[idx, 'split']!r}"
            )
        source = (df.at[idx, "source"].strip() or None) if has_source else None
        rows.append((row_number, relpath, EmotionLabel(label_value), split, source))
    return rows


def load_manifest_with_report(
    manifest_path: str | Path,
    image_root: str | Path,
    strict: bool = True,
    source: str = "affectnet",
    num_workers: int = 0,
) -> Tuple[DatasetSplit, IngestionReport]:
    """
    Read a manifest and decode its images.

    Args:
        manifest_path: path to the manifest CSV.
        image_root: directory the relative paths are resolved against.
        strict: whether a missing or unreadable image raises `MissingImageError` (True) or is skipped and listed
            in the report (False).
        source: the source tag of rows that do not carry a `source` column.
        num_workers: number of decoding threads. The record order follows the manifest for any value.

    Returns:
        the decoded split and the ingestion report.
    """
    manifest_path, image_root = Path(manifest_path), Path(image_root)
    rows = _parse_rows(manifest_path)
    report = IngestionReport(n_rows=len(rows))

    def _decode(row: Tuple[int, str, EmotionLabel, str, str | None]) -> np.ndarray | None:
        path = image_root / row[1]
        try:
            return decode_image(path)
        except MissingImageError:
            if strict:
                raise
            return None

    if num_workers > 0:
        with ThreadPoolExecutor(max_workers=num_workers) as executor:
            decoded = list(executor.map(_decode, rows))
    else:
        decoded = [_decode(row) for row in rows]

    records = []
    for row, pixels in zip(rows, decoded):
        _, relpath, label, split, row_source = row
        if pixels is None:
            report.missing_files.append(str(image_root / relpath))
            continue
        records.append(ImageRecord(pixels, label, split, row_source or source))
    report.n_emitted = len(records)
    return DatasetSplit(tuple(records)), report


def load_manifest(
    manifest_path: str | Path,
    image_root: str | Path,
    strict: bool = True,
    source: str = "affectnet",
    num_workers: int = 0,
) -> DatasetSplit:
    split, report = load_manifest_with_report(
        manifest_path, image_root, strict=strict, source=source, num_workers=num_workers
    )
    if report.missing_files:
        print(f"Skipped {len(report.missing_files)} unreadable images listed in {manifest_path}")
    return split


def partition_by_split(split: DatasetSplit) -> CorpusSplits:
    """
    Group the records of a mixed split by their split tag, keeping the relative order.
    """
    groups = {tag: [record for record in split if record.split == tag] for tag in SPLIT_TAGS}
    return CorpusSplits(
        train=DatasetSplit(tuple(groups["train"])),
        val=DatasetSplit(tuple(groups["val"])),
        test=DatasetSplit(tuple(groups["test"])),
    )


def write_manifest(
    splits: Sequence[DatasetSplit],
    out_dir: str | Path,
    manifest_name: str = "manifest.csv",
    image_subdir: str = "images",
) -> Path:
    """
    Write every record as a PNG file under `out_dir/image_subdir/<split>/<emotion>/` and list them in a manifest
    with paths relative to `out_dir`.

    Returns:
        the path of the written manifest.
    """
    out_dir = Path(out_dir)
    rows = []
    counter = 0
    for split in splits:
        for record in split:
            relpath = (
                Path(image_subdir)
                / record.split
                / record.label.display_name
                / f"{record.source}_{counter:07d}.png"
            )
            path = out_dir / relpath
            path.parent.mkdir(parents=True, exist_ok=True)
            pixels = record.pixels[:, :, 0] if record.channels == 1 else record.pixels
            Image.fromarray(np.ascontiguousarray(pixels)).save(path)
            rows.append((relpath.as_posix(), int(record.label), record.split, record.source))
            counter += 1
    manifest_path = out_dir / manifest_name
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=[*MANIFEST_COLUMNS, "source"]).to_csv(manifest_path, index=False)
    return manifest_path
