from dataclasses import dataclass

import gin
import torch
from torch import nn


@gin.configurable()
@dataclass(frozen=True)
class OptimizerConfig:
    """
    Args:
        initial_lr: the learning rate at the beginning of the stage.
        momentum: the SGD momentum.
        batch_size: the mini-batch size.
        lr_drop_factor: the learning rate is divided by this factor on a plateau.
        plateau_patience: number of epochs without improvement of the validation error that are tolerated.
        min_lr: a floor for the learning rate (None means no floor).
    """

    initial_lr: float
    momentum: float = 0.9
    batch_size: int = 64
    lr_drop_factor: float = 10.0
    plateau_patience: int = 10
    min_lr: float | None = None

    def __post_init__(self):
        if self.initial_lr <= 0:
            raise ValueError(f"initial_lr must be positive, got {self.initial_lr}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr_drop_factor <= 1.0:
            raise ValueError(f"lr_drop_factor must exceed 1, got {self.lr_drop_factor}")
        if self.plateau_patience < 0:
            raise ValueError(f"plateau_patience must be >= 0, got {self.plateau_patience}")


class OptimizerBase:
    """
    A thin wrapper around a torch optimizer used in Trainer. Momentum SGD without weight decay and without
    dampening: v <- momentum * v + grad, w <- w - lr * v.

    Args:
        config: the optimizer configuration.
        cls_name: the name of the torch optimizer class.
        kwargs: additional arguments to pass to the optimizer.
    """

    def __init__(self, config: OptimizerConfig, cls_name: str = "SGD", **kwargs):
        self.config = config
        self.cls_name = cls_name
        self.kwargs = kwargs
        self.optimizer: torch.optim.Optimizer = ...

    def initialize(self, model: nn.Module):
        self.optimizer = getattr(torch.optim, self.cls_name)(
            model.parameters(),
            lr=self.config.initial_lr,
            momentum=self.config.momentum,
            **self.kwargs,
        )

    @property
    def lr(self) -> float:
        return self.optimizer.param_groups[0]["lr"]

    def set_lr(self, lr: float):
        for param_group in self.optimizer.param_groups:
            param_group["lr"] = lr

    def step(self):
        self.optimizer.step()

    def zero_grad(self):
        self.optimizer.zero_grad()
