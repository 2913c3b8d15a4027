from pathlib import Path

__all__ = [
    "OccferError",
    "ConfigError",
    "DatasetFormatError",
    "LabelRangeError",
    "MissingImageError",
    "ShapeMismatchError",
    "CheckpointVersionError",
    "CheckpointCorruptedError",
    "TrainingAbortedError",
]


class OccferError(Exception):
    """
    The base class of all the errors raised on purpose by the package.
    """


class ConfigError(OccferError):
    pass


class DatasetFormatError(OccferError):
    def __init__(self, path: str | Path, row: int, reason: str):
        super().__init__(f"{path}: malformed row {row}: {reason}")
        self.path = Path(path)
        self.row = row


class LabelRangeError(OccferError):
    def __init__(self, path: str | Path, row: int, label: object):
        super().__init__(f"{path}: row {row} has label {label!r} outside of [0, 7]")
        self.path = Path(path)
        self.row = row


class MissingImageError(OccferError):
    def __init__(self, path: str | Path, reason: str = "file does not exist"):
        super().__init__(f"Cannot read image {path}: {reason}")
        self.path = Path(path)


class ShapeMismatchError(OccferError):
    def __init__(self, what: str, expected: object, actual: object):
        super().__init__(f"{what}: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class CheckpointVersionError(OccferError):
    pass


class CheckpointCorruptedError(OccferError):
    pass


class TrainingAbortedError(OccferError):
    """
    Raised when the training loss becomes non-finite. The last good checkpoint (if any was written) is left untouched.
    """

    def __init__(self, epoch: int, last_checkpoint_path: Path | None):
        super().__init__(
            f"Non-finite training loss in epoch {epoch}; last good checkpoint: {last_checkpoint_path}"
        )
        self.epoch = epoch
        self.last_checkpoint_path = last_checkpoint_path
