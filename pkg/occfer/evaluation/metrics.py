from dataclasses import dataclass
from typing import Dict, Literal, Sequence

import numpy as np
import torch
from more_itertools import chunked
from torchmetrics.functional.classification import multiclass_confusion_matrix

from occfer.api.data_structures import DatasetSplit, OcclusionMode
from occfer.api.emotions import EMOTION_NAMES, NUM_CLASSES
from occfer.models.network import FaceExpressionNet
from occfer.transforms.pipeline import ImagePipeline

TFaceMode = Literal["full_faces", "lower_half"]

DATASET_DISPLAY_NAMES = {"affectnet": "AffectNet", "ferplus": "FER+", "synthetic": "Synthetic"}


def dataset_display_name(source: str) -> str:
    return DATASET_DISPLAY_NAMES.get(source, source)


@dataclass(frozen=True)
class EvalReport:
    """
    The result of evaluating one model on one split under one occlusion mode.

    Attributes:
        model_name: a human readable model name (e.g. "VGG-face").
        train_set: the face mode the model was trained on.
        test_set: the face mode the model was tested on.
        dataset: the dataset name (e.g. "FER+").
        confusion: an 8x8 count matrix, rows are the true classes and columns the predicted ones.
    """

    model_name: str
    train_set: TFaceMode
    test_set: TFaceMode
    dataset: str
    confusion: np.ndarray

    def __post_init__(self):
        confusion = np.asarray(self.confusion, dtype=np.int64)
        if confusion.shape != (NUM_CLASSES, NUM_CLASSES):
            raise ValueError(f"Confusion matrix must be 8x8, got {confusion.shape}")
        if confusion.sum() == 0:
            raise ValueError("Empty evaluation: the confusion matrix has no entries")
        confusion.setflags(write=False)
        object.__setattr__(self, "confusion", confusion)

    @property
    def n(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion)) / self.n

    @property
    def per_class_recall(self) -> Dict[str, float]:
        return per_class_recall(self.confusion)

    def to_row(self) -> Dict[str, object]:
        return {
            "model": self.model_name,
            "train_set": self.train_set,
            "test_set": self.test_set,
            "dataset": self.dataset,
            "accuracy": self.accuracy,
            "n": self.n,
            "is_reference": False,
        }


def per_class_recall(confusion: np.ndarray) -> Dict[str, float]:
    """
    Recall of every class (nan for classes absent from the split).
    """
    confusion = np.asarray(confusion, dtype=np.float64)
    row_sums = confusion.sum(axis=1)
    recalls = {}
    for idx, name in enumerate(EMOTION_NAMES):
        recalls[name] = confusion[idx, idx] / row_sums[idx] if row_sums[idx] > 0 else float("nan")
    return recalls


@torch.no_grad()
def predict_labels(
    model: FaceExpressionNet,
    split: DatasetSplit,
    pipeline: ImagePipeline,
    batch_size: int = 64,
    device: str = "cpu",
) -> np.ndarray:
    """
    Argmax predictions (ties go to the lowest class index) for every record of the split, in record order. The
    model is switched to evaluation mode and the pipeline never flips.
    """
    pipeline = pipeline.evaluation_copy()
    was_training = model.training
    model.eval()
    predictions = []
    for indices in chunked(range(len(split)), batch_size):
        batch = torch.stack([torch.from_numpy(pipeline(split[idx].pixels)) for idx in indices])
        logits = model(batch.to(device))
        predictions.append(torch.argmax(logits, dim=1).cpu().numpy())
    model.train(was_training)
    if not predictions:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(predictions).astype(np.int64)


def evaluate_predictions(
    predictions: Sequence[int] | np.ndarray,
    labels: Sequence[int] | np.ndarray,
    model_name: str = "model",
    train_set: TFaceMode = "full_faces",
    test_set: TFaceMode = "full_faces",
    dataset: str = "unknown",
) -> EvalReport:
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        raise ValueError("Cannot evaluate on an empty split")
    if predictions.shape != labels.shape:
        raise ValueError(
            f"Predictions and labels differ in shape: {predictions.shape} vs {labels.shape}"
        )
    confusion = multiclass_confusion_matrix(
        torch.from_numpy(predictions), torch.from_numpy(labels), num_classes=NUM_CLASSES
    )
    return EvalReport(
        model_name=model_name,
        train_set=train_set,
        test_set=test_set,
        dataset=dataset,
        confusion=confusion.numpy(),
    )


def evaluate(
    model: FaceExpressionNet,
    split: DatasetSplit,
    occlusion: OcclusionMode,
    model_name: str = "model",
    train_set: TFaceMode = "full_faces",
    dataset: str | None = None,
    target_size: int | None = None,
    batch_size: int = 64,
    device: str = "cpu",
) -> EvalReport:
    """
    Evaluate a model on a split with the deterministic test pipeline.

    Args:
        model: the model.
        split: the split to evaluate on. It must not be empty.
        occlusion: the occlusion applied to the test images.
        model_name: the model name reported in the tables.
        train_set: the face mode the model was trained on.
        dataset: the dataset name. Derived from the records' source when missing.
        target_size: the input size; defaults to the model's input size.
        batch_size: the inference batch size.
        device: the device to run the model on.

    Returns:
        the evaluation report.
    """
    if len(split) == 0:
        raise ValueError("Cannot evaluate on an empty split")
    pipeline = ImagePipeline(
        occlusion=occlusion,
        flip_augment=False,
        target_size=target_size or model.descriptor.input_size,
    )
    predictions = predict_labels(model, split, pipeline, batch_size=batch_size, device=device)
    return evaluate_predictions(
        predictions,
        split.labels,
        model_name=model_name,
        train_set=train_set,
        test_set=occlusion.face_mode,
        dataset=dataset or dataset_display_name(split[0].source),
    )


def improvement_summary(before: EvalReport, after: EvalReport) -> Dict[str, float]:
    """
    The accuracy change from `before` to `after` in percentage points.
    """
    if before.dataset != after.dataset:
        raise ValueError(
            f"Cannot compare reports on different datasets: {before.dataset} vs {after.dataset}"
        )
    if before.test_set != after.test_set:
        raise ValueError(
            f"Cannot compare reports on different test sets: {before.test_set} vs {after.test_set}"
        )
    return {"delta": round((after.accuracy - before.accuracy) * 100.0, 10)}
