from .checkpoint import (
    CHECKPOINT_FORMAT_VERSION,
    Checkpoint,
    checkpoint_digest,
    is_checkpoint_file,
    load_checkpoint,
    save_checkpoint,
)
from .logger import DummyLogger, FileLogger, LoggerBase
from .optimizers import (
    LRSchedulerState,
    OptimizerBase,
    OptimizerConfig,
    PlateauLRScheduler,
    plateau_step,
)
from .trainer import StageResult, Trainer, TrainStageConfig, train_stage
from .two_stage import TwoStageResult, run_single_stage, run_two_stage
