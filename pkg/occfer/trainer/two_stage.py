from dataclasses import dataclass
from pathlib import Path
from typing import Any

from occfer.api.data_structures import DatasetSplit
from occfer.models.network import FaceExpressionNet

from .checkpoint import checkpoint_digest
from .trainer import StageResult, Trainer, TrainStageConfig

STAGE_DIRS = {"full_faces": "stage1", "occluded_faces": "stage2"}


@dataclass
class TwoStageResult:
    stage1: StageResult
    stage2: StageResult


def run_single_stage(
    model: FaceExpressionNet,
    train_split: DatasetSplit,
    val_split: DatasetSplit,
    config: TrainStageConfig,
    run_dir: str | Path | None = None,
    provenance: dict | None = None,
    **trainer_kwargs: Any,
) -> StageResult:
    """
    Train one stage, writing its outputs into `run_dir/stage1` or `run_dir/stage2`.
    """
    stage_dir = Path(run_dir) / STAGE_DIRS[config.stage] if run_dir is not None else None
    trainer = Trainer(run_dir=stage_dir, **trainer_kwargs)
    try:
        return trainer.train_stage(model, train_split, val_split, config, provenance=provenance)
    finally:
        trainer.close()


def run_two_stage(
    model: FaceExpressionNet,
    train_split: DatasetSplit,
    val_split: DatasetSplit,
    stage1: TrainStageConfig,
    stage2: TrainStageConfig,
    run_dir: str | Path | None = None,
    **trainer_kwargs: Any,
) -> TwoStageResult:
    """
    Fine-tune on full faces, then continue from the resulting model on occluded faces. The second stage starts
    with a fresh learning rate scheduler and records the first stage's checkpoint (name and sha256) as its parent.

    Args:
        model: the initial (pretrained) model. It is not modified.
        train_split: the training records. The occlusion of each stage is applied on the fly.
        val_split: the validation records.
        stage1: the full-faces stage configuration.
        stage2: the occluded-faces stage configuration.
        run_dir: the output directory. None disables writing.
        trainer_kwargs: additional `Trainer` arguments.

    Returns:
        the results of both stages.
    """
    if stage1.stage != "full_faces":
        raise ValueError(f"The first stage must train on full faces, got {stage1.stage!r}")
    if stage2.stage != "occluded_faces":
        raise ValueError(f"The second stage must train on occluded faces, got {stage2.stage!r}")

    first = run_single_stage(model, train_split, val_split, stage1, run_dir, **trainer_kwargs)
    provenance = {"parent_stage": stage1.stage}
    if first.checkpoint_path is not None:
        provenance |= {
            "parent_checkpoint": f"{first.checkpoint_path.parent.name}/{first.checkpoint_path.name}",
            "parent_sha256": checkpoint_digest(first.checkpoint_path),
        }
    second = run_single_stage(
        first.model, train_split, val_split, stage2, run_dir, provenance, **trainer_kwargs
    )
    return TwoStageResult(stage1=first, stage2=second)
