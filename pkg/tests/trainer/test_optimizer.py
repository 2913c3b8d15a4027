import pytest
import torch
from torch import nn

from occfer.trainer import OptimizerBase, OptimizerConfig


class Quadratic(nn.Module):
    def __init__(self, w0: float):
        super().__init__()
        self.w = nn.Parameter(torch.tensor([w0], dtype=torch.float64))

    def forward(self, a: float, b: float) -> torch.Tensor:
        return 0.5 * a * (self.w - b) ** 2


@pytest.mark.parametrize("momentum", [0.0, 0.5, 0.9])
def test__optimizer_base__momentum_sgd_recurrence(momentum: float):
    a, b, lr, w0 = 3.0, -1.5, 0.05, 2.0
    model = Quadratic(w0)
    optimizer = OptimizerBase(OptimizerConfig(initial_lr=lr, momentum=momentum))
    optimizer.initialize(model)

    w, v = w0, 0.0
    for _ in range(100):
        optimizer.zero_grad()
        model(a, b).sum().backward()
        optimizer.step()
        v = momentum * v - lr * a * (w - b)
        w = w + v
        assert model.w.item() == pytest.approx(w, abs=1e-12)


def test__optimizer_base__set_lr():
    model = Quadratic(0.0)
    optimizer = OptimizerBase(OptimizerConfig(initial_lr=0.1))
    optimizer.initialize(model)
    assert optimizer.lr == 0.1
    optimizer.set_lr(0.01)
    assert optimizer.lr == 0.01


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(initial_lr=0.0),
        dict(initial_lr=0.1, momentum=1.0),
        dict(initial_lr=0.1, batch_size=0),
        dict(initial_lr=0.1, lr_drop_factor=1.0),
        dict(initial_lr=0.1, plateau_patience=-1),
    ],
)
def test__optimizer_config__invalid(kwargs: dict):
    with pytest.raises(ValueError):
        OptimizerConfig(**kwargs)
