from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Literal, Sequence, Tuple

import gin
import numpy as np

from .emotions import NUM_CLASSES, EmotionLabel

TSplitTag = Literal["train", "val", "test"]
TSource = Literal["ferplus", "affectnet", "synthetic"]
SPLIT_TAGS: Tuple[TSplitTag, ...] = ("train", "val", "test")


@dataclass(frozen=True)
class ImageRecord:
    """
    A single labeled face image.

    Attributes:
        pixels: an uint8 array of shape (height, width, channels). A 2-D grid is promoted to a single channel. The
            array is made read-only so that records can be shared between splits and workers.
        label: the emotion label.
        split: the split tag of the record in its source corpus.
        source: the corpus the record comes from.
    """

    pixels: np.ndarray
    label: EmotionLabel
    split: TSplitTag
    source: TSource

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim == 2:
            pixels = pixels[:, :, None]
        if pixels.ndim != 3:
            raise ValueError(f"Pixels must be a 2-D or 3-D grid, got shape {pixels.shape}")
        height, width, channels = pixels.shape
        if height < 2 or width < 1:
            raise ValueError(f"Image must be at least 2x1, got {height}x{width}")
        if channels not in (1, 3):
            raise ValueError(f"Image must have 1 or 3 channels, got {channels}")
        if pixels.dtype != np.uint8:
            if pixels.min(initial=0) < 0 or pixels.max(initial=0) > 255:
                raise ValueError("Pixel values must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        pixels = np.array(pixels, copy=True)
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "label", EmotionLabel(int(self.label)))
        if self.split not in SPLIT_TAGS:
            raise ValueError(f"Unknown split tag: {self.split!r}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class DatasetSplit:
    """
    An immutable, ordered collection of image records.
    """

    records: Tuple[ImageRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ImageRecord]:
        return iter(self.records)

    def __getitem__(self, idx: int) -> ImageRecord:
        return self.records[idx]

    @property
    def labels(self) -> np.ndarray:
        return np.array([int(record.label) for record in self.records], dtype=np.int64)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=NUM_CLASSES)

    def class_counts_dict(self) -> Dict[str, int]:
        return {label.display_name: int(c) for label, c in zip(EmotionLabel, self.class_counts)}

    @classmethod
    def concatenate(cls, splits: Sequence["DatasetSplit"]) -> "DatasetSplit":
        return cls(tuple(record for split in splits for record in split.records))


@dataclass
class IngestionReport:
    """
    Book-keeping of a single ingestion: how many input rows were read, kept, and why the others were dropped.
    """

    n_rows: int = 0
    n_emitted: int = 0
    n_dropped_non_face: int = 0
    n_ties: int = 0
    missing_files: List[str] = field(default_factory=list)

    @property
    def n_dropped(self) -> int:
        return self.n_dropped_non_face + len(self.missing_files)

    def summary(self) -> str:
        return (
            f"rows={self.n_rows} emitted={self.n_emitted} dropped_non_face={self.n_dropped_non_face} "
            f"ties={self.n_ties} missing_files={len(self.missing_files)}"
        )


@gin.configurable()
@dataclass(frozen=True)
class OcclusionMode:
    """
    The occlusion applied to the faces.

    Attributes:
        kind: either "none" or "upper_half". The fill value is ignored when kind is "none".
        fill: the intensity written over the occluded rows.
    """

    kind: Literal["none", "upper_half"] = "none"
    fill: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "upper_half"):
            raise ValueError(f"Unknown occlusion kind: {self.kind!r}")
        if not 0 <= self.fill <= 255:
            raise ValueError(f"Occlusion fill must lie in [0, 255], got {self.fill}")

    @property
    def is_occluded(self) -> bool:
        return self.kind == "upper_half"

    @property
    def face_mode(self) -> Literal["full_faces", "lower_half"]:
        return "lower_half" if self.is_occluded else "full_faces"

    @classmethod
    def none(cls) -> "OcclusionMode":
        return cls("none")

    @classmethod
    def upper_half(cls, fill: int = 0) -> "OcclusionMode":
        return cls("upper_half", fill)

    @classmethod
    def from_name(cls, name: str, fill: int = 0) -> "OcclusionMode":
        aliases = {
            "none": "none",
            "full": "none",
            "full_faces": "none",
            "upper_half": "upper_half",
            "upperhalf": "upper_half",
            "lower": "upper_half",
            "lower_half": "upper_half",
            "occluded": "upper_half",
        }
        key = name.strip().lower().replace("-", "_")
        if key not in aliases:
            raise ValueError(f"Unknown occlusion mode: {name!r}")
        return cls(aliases[key], fill)
