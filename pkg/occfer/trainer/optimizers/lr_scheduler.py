import math
from dataclasses import dataclass, replace

from .optimizer_base import OptimizerBase, OptimizerConfig


@dataclass(frozen=True)
class LRSchedulerState:
    current_lr: float
    best_val_error: float = math.inf
    epochs_since_improvement: int = 0


def plateau_step(
    state: LRSchedulerState,
    val_error: float,
    patience: int = 10,
    drop_factor: float = 10.0,
    min_lr: float | None = None,
) -> LRSchedulerState:
    """
    One epoch of plateau-driven learning rate control. A strictly lower validation error resets the counter;
    otherwise the counter grows and, once it exceeds `patience`, the learning rate is divided by `drop_factor` (but
    not below `min_lr`) and the counter is reset.
    """
    if val_error < 0:
        raise ValueError(f"Validation error must be non-negative, got {val_error}")
    if val_error < state.best_val_error:
        return replace(state, best_val_error=val_error, epochs_since_improvement=0)
    counter = state.epochs_since_improvement + 1
    if counter > patience:
        new_lr = state.current_lr / drop_factor
        if min_lr is not None:
            new_lr = max(new_lr, min_lr)
        return replace(state, current_lr=new_lr, epochs_since_improvement=0)
    return replace(state, epochs_since_improvement=counter)


class PlateauLRScheduler:
    """
    Applies `plateau_step` after every validation pass and writes the learning rate into the optimizer.
    """

    def __init__(self, config: OptimizerConfig):
        self.config = config
        self.state = LRSchedulerState(current_lr=config.initial_lr)
        self.optimizer: OptimizerBase | None = None

    def initialize(self, optimizer: OptimizerBase):
        self.optimizer = optimizer
        self.optimizer.set_lr(self.state.current_lr)

    @property
    def lr(self) -> float:
        return self.state.current_lr

    def step(self, val_error: float) -> LRSchedulerState:
        self.state = plateau_step(
            self.state,
            val_error,
            patience=self.config.plateau_patience,
            drop_factor=self.config.lr_drop_factor,
            min_lr=self.config.min_lr,
        )
        if self.optimizer is not None:
            self.optimizer.set_lr(self.state.current_lr)
        return self.state
