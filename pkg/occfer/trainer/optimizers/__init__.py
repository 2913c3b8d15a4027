from .lr_scheduler import LRSchedulerState, PlateauLRScheduler, plateau_step
from .optimizer_base import OptimizerBase, OptimizerConfig
