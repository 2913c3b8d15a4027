import copy
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal

import gin
import torch
import torch.nn.functional as F
from torch.utils.data import DataLoader
from tqdm import tqdm

from occfer.api.data_structures import DatasetSplit, OcclusionMode
from occfer.api.errors import TrainingAbortedError
from occfer.api.training_hooks_mixin import TrainingHooksMixin
from occfer.data.datasets import FaceDataset
from occfer.dsd.dsd_controller import DSDController
from occfer.dsd.pruning import achieved_sparsity
from occfer.dsd.schedules import PhasePlan, SparsitySchedule, build_phase_plan
from occfer.evaluation.metrics import predict_labels
from occfer.models.network import FaceExpressionNet
from occfer.transforms.pipeline import ImagePipeline
from occfer.utils.helpers import resolve_device, seed_everything

from .checkpoint import Checkpoint, save_checkpoint
from .logger.dummy_logger import DummyLogger
from .logger.file_logger import FileLogger
from .logger.logger_base import LoggerBase
from .optimizers.lr_scheduler import PlateauLRScheduler
from .optimizers.optimizer_base import OptimizerBase, OptimizerConfig

TStage = Literal["full_faces", "occluded_faces"]


@gin.configurable()
@dataclass(frozen=True)
class TrainStageConfig:
    """
    Args:
        stage: "full_faces" (stage 1) or "occluded_faces" (stage 2).
        epochs: the total epoch budget of the stage, across all DSD phases.
        optimizer: the optimizer configuration.
        sparsity: the per-conv-layer pruning rates. Without it the stage is plain momentum SGD.
        phase_plan: the DSD phase plan. Defaults to a single dense-sparse-dense round over `epochs`.
        occlusion: the occlusion applied to the training and validation images. Defaults to the stage's natural
            mode (none for full faces, upper half for occluded faces).
        flip_augment: whether training images are flipped horizontally with probability 0.5.
        seed: the seed of the shuffling, the flips and the dropout masks.
    """

    stage: TStage
    epochs: int
    optimizer: OptimizerConfig
    sparsity: SparsitySchedule | None = None
    phase_plan: PhasePlan | None = None
    occlusion: OcclusionMode | None = None
    flip_augment: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.stage not in ("full_faces", "occluded_faces"):
            raise ValueError(f"Unknown stage: {self.stage!r}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.occlusion is None:
            default = (
                OcclusionMode.upper_half() if self.stage == "occluded_faces" else OcclusionMode.none()
            )
            object.__setattr__(self, "occlusion", default)
        if self.stage == "occluded_faces" and not self.occlusion.is_occluded:
            raise ValueError("An occluded-faces stage needs the upper-half occlusion")
        if self.sparsity is not None:
            if self.phase_plan is None:
                object.__setattr__(self, "phase_plan", build_phase_plan(self.epochs))
            if self.phase_plan.total_epochs != self.epochs:
                raise ValueError(
                    f"The phase plan covers {self.phase_plan.total_epochs} epochs, "
                    f"the stage has {self.epochs}"
                )

    @property
    def uses_dsd(self) -> bool:
        return self.sparsity is not None and self.epochs > 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stage": self.stage,
            "epochs": self.epochs,
            "optimizer": asdict(self.optimizer),
            "sparsity": list(self.sparsity.rates) if self.sparsity is not None else None,
            "phase_plan": self.phase_plan.to_list() if self.phase_plan is not None else None,
            "occlusion": asdict(self.occlusion),
            "flip_augment": self.flip_augment,
            "seed": self.seed,
        }


@dataclass
class StageResult:
    model: FaceExpressionNet
    history: List[Dict[str, Any]] = field(default_factory=list)
    checkpoint_path: Path | None = None


@gin.configurable()
class Trainer(TrainingHooksMixin):
    """
    Trains a model for one stage with mini-batch momentum SGD. After every epoch the training hooks run (DSD
    pruning during sparse phases), the validation error is computed and the plateau scheduler updates the learning
    rate. The per-epoch metrics go to the logger and, when `run_dir` is set, the model is checkpointed after every
    epoch so that an aborted stage keeps its last good checkpoint.

    Args:
        run_dir: the directory of the stage outputs (checkpoint, metrics). None disables writing.
        logger: the logger. Defaults to a `FileLogger` in `run_dir` (or a `DummyLogger` without it).
        device: the device to train on ("auto" picks cuda when available).
        num_workers: number of data loader workers. The batch order does not depend on it.
        val_batch_size: the batch size of the validation passes.
        config_snapshot: the run configuration embedded in the checkpoints.
        checkpoint_name: the file name of the stage checkpoint.
    """

    def __init__(
        self,
        run_dir: str | Path | None = None,
        logger: LoggerBase | None = None,
        device: str = "cpu",
        num_workers: int = 0,
        val_batch_size: int = 256,
        config_snapshot: str = "",
        checkpoint_name: str = "model.ckpt",
    ):
        self.run_dir = Path(run_dir) if run_dir is not None else None
        if logger is None:
            logger = FileLogger(self.run_dir) if self.run_dir is not None else DummyLogger()
        self.logger = logger
        self.device = resolve_device(device)
        self.num_workers = num_workers
        self.val_batch_size = val_batch_size
        self.config_snapshot = config_snapshot
        self.checkpoint_name = checkpoint_name
        self._hooks: List[TrainingHooksMixin] = []

    @property
    def hook_objects(self) -> List[TrainingHooksMixin]:
        return self._hooks

    @property
    def checkpoint_path(self) -> Path | None:
        return self.run_dir / self.checkpoint_name if self.run_dir is not None else None

    def make_checkpoint(
        self,
        model: FaceExpressionNet,
        config: TrainStageConfig,
        epoch: int,
        history: List[Dict[str, Any]],
        provenance: Dict[str, Any],
    ) -> Path | None:
        if self.checkpoint_path is None:
            return None
        state = {name: tensor.detach().cpu() for name, tensor in model.state_dict().items()}
        checkpoint = Checkpoint(
            model_state=state,
            descriptor=model.descriptor.to_dict(),
            preprocessing={
                "occlusion": asdict(config.occlusion),
                "flip_augment": config.flip_augment,
                "target_size": model.descriptor.input_size,
                "channel_means": model.channel_mean.flatten().tolist(),
                "input_scale": model.descriptor.input_scale,
            },
            provenance={"stage": config.stage} | provenance,
            epoch=epoch,
            history=copy.deepcopy(history),
            config_snapshot=self.config_snapshot,
        )
        save_checkpoint(checkpoint, self.checkpoint_path)
        return self.checkpoint_path

    def validation_error(
        self, model: FaceExpressionNet, val_split: DatasetSplit, pipeline: ImagePipeline
    ) -> float:
        predictions = predict_labels(
            model, val_split, pipeline, batch_size=self.val_batch_size, device=self.device
        )
        return 1.0 - float((predictions == val_split.labels).mean())

    def train_stage(
        self,
        model: FaceExpressionNet,
        train_split: DatasetSplit,
        val_split: DatasetSplit,
        config: TrainStageConfig,
        provenance: Dict[str, Any] | None = None,
    ) -> StageResult:
        """
        Train a copy of `model` for one stage.

        Args:
            model: the initial model. It is not modified.
            train_split: the training records.
            val_split: the validation records driving the plateau scheduler.
            config: the stage configuration.
            provenance: extra provenance stored in the checkpoints (e.g. the parent checkpoint).

        Returns:
            the trained model, the per-epoch history and the checkpoint path.
        """
        if len(train_split) == 0 and config.epochs > 0:
            raise ValueError("Cannot train on an empty training split")
        if len(val_split) == 0 and config.epochs > 0:
            raise ValueError("The validation split is empty")
        provenance = provenance or {}
        seed_everything(config.seed)
        model = copy.deepcopy(model).to(self.device)
        history: List[Dict[str, Any]] = []
        last_checkpoint = self.make_checkpoint(model, config, 0, history, provenance)
        if config.epochs == 0:
            return StageResult(model=model, history=history, checkpoint_path=last_checkpoint)

        self.logger.restart()
        self.logger.log_config(config.to_dict())
        self._hooks = (
            [DSDController(config.sparsity, config.phase_plan)] if config.uses_dsd else []
        )
        pipeline = ImagePipeline(
            occlusion=config.occlusion,
            flip_augment=config.flip_augment,
            target_size=model.descriptor.input_size,
        )
        dataset = FaceDataset(train_split, pipeline, seed=config.seed)
        loader = DataLoader(
            dataset,
            batch_size=config.optimizer.batch_size,
            shuffle=True,
            generator=torch.Generator().manual_seed(config.seed),
            num_workers=self.num_workers,
        )
        optimizer = OptimizerBase(config.optimizer)
        optimizer.initialize(model)
        lr_scheduler = PlateauLRScheduler(config.optimizer)
        lr_scheduler.initialize(optimizer)

        for epoch_idx in (pbar := tqdm(range(config.epochs), desc=config.stage)):
            model.train()
            dataset.set_epoch(epoch_idx)
            hook_update_dict = self.on_start_epoch(epoch_idx)
            lr = optimizer.lr
            loss_sum, n_seen = 0.0, 0
            for images, labels in loader:
                images, labels = images.to(self.device), labels.to(self.device)
                optimizer.zero_grad()
                loss = F.cross_entropy(model(images), labels)
                if not torch.isfinite(loss):
                    raise TrainingAbortedError(epoch_idx + 1, last_checkpoint)
                loss.backward()
                optimizer.step()
                loss_sum += loss.item() * len(labels)
                n_seen += len(labels)

            hook_update_dict |= self.on_end_epoch(epoch_idx, model)
            if not config.uses_dsd:
                hook_update_dict |= {
                    f"sparsity_l{idx}": fraction
                    for idx, fraction in enumerate(achieved_sparsity(model))
                }
            val_error = self.validation_error(model, val_split, pipeline)
            lr_scheduler.step(val_error)

            train_loss = loss_sum / n_seen
            metrics = {
                "epoch": epoch_idx + 1,
                "phase": config.phase_plan.kind_at(epoch_idx) if config.uses_dsd else "dense",
                "lr": lr,
                "train_loss": train_loss,
                "val_error": val_error,
            } | hook_update_dict
            history.append(metrics)
            self.logger.log_metrics(metrics=metrics, prefix="")
            pbar.set_description(
                f"{config.stage} loss: {train_loss:.4f} val_error: {val_error:.4f} lr: {lr:.1e}"
            )
            if not math.isfinite(train_loss):
                raise TrainingAbortedError(epoch_idx + 1, last_checkpoint)
            last_checkpoint = self.make_checkpoint(
                model, config, epoch_idx + 1, history, provenance
            )

        self._hooks = []
        return StageResult(model=model, history=history, checkpoint_path=last_checkpoint)

    def close(self):
        self.logger.close()


def train_stage(
    model: FaceExpressionNet,
    train_split: DatasetSplit,
    val_split: DatasetSplit,
    config: TrainStageConfig,
    run_dir: str | Path | None = None,
    **trainer_kwargs: Any,
) -> StageResult:
    """
    Train one stage with a fresh `Trainer`; see `Trainer.train_stage`.
    """
    trainer = Trainer(run_dir=run_dir, **trainer_kwargs)
    try:
        return trainer.train_stage(model, train_split, val_split, config)
    finally:
        trainer.close()

