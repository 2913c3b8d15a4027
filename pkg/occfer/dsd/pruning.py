import math
from typing import Dict, List

import torch
from torchtyping import TensorType

from occfer.api.errors import ShapeMismatchError
from occfer.models.network import FaceExpressionNet

from .schedules import SparsitySchedule

PruneMaskSet = Dict[str, TensorType[bool]]


def compute_prune_mask(weights: torch.Tensor, rate: float) -> TensorType[bool]:
    """
    Magnitude pruning mask: exactly floor(rate * N) entries with the smallest absolute values are set to False.
    Equal magnitudes are pruned in flat index order (lower index first).

    Args:
        weights: the weight tensor.
        rate: the fraction of weights to prune, in [0, 1).

    Returns:
        a boolean tensor of the shape of `weights`, False where the weight is pruned.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"Pruning rate must lie in [0, 1), got {rate}")
    n_pruned = math.floor(rate * weights.numel())
    mask = torch.ones(weights.numel(), dtype=torch.bool, device=weights.device)
    if n_pruned > 0:
        order = torch.argsort(weights.detach().abs().flatten(), stable=True)
        mask[order[:n_pruned]] = False
    return mask.view(weights.shape)


def compute_masks(model: FaceExpressionNet, schedule: SparsitySchedule) -> PruneMaskSet:
    """
    One mask per conv weight tensor, computed from the current magnitudes. Biases are never pruned.
    """
    names = model.conv_weight_names()
    if len(names) != len(schedule):
        raise ShapeMismatchError("sparsity schedule length", len(names), len(schedule))
    parameters = dict(model.named_parameters())
    return {
        name: compute_prune_mask(parameters[name], rate)
        for name, rate in zip(names, schedule.rates)
    }


def apply_masks(model: FaceExpressionNet, masks: PruneMaskSet) -> FaceExpressionNet:
    """
    Multiply the masked weights by their masks in place. Parameters without a mask are untouched.
    """
    parameters = dict(model.named_parameters())
    for name, mask in masks.items():
        if name not in parameters:
            raise KeyError(f"Unknown parameter: {name}")
        if tuple(parameters[name].shape) != tuple(mask.shape):
            raise ShapeMismatchError(name, tuple(parameters[name].shape), tuple(mask.shape))
    with torch.no_grad():
        for name, mask in masks.items():
            parameters[name].mul_(mask.to(parameters[name].dtype))
    return model


def sparse_epoch_hook(
    model: FaceExpressionNet, schedule: SparsitySchedule
) -> FaceExpressionNet:
    """
    Called at the end of every sparse-phase epoch: recompute the masks from the current magnitudes (masks are not
    frozen across epochs) and apply them.
    """
    return apply_masks(model, compute_masks(model, schedule))


def achieved_sparsity(model: FaceExpressionNet) -> List[float]:
    """
    The fraction of exactly-zero weights of every conv layer.
    """
    parameters = dict(model.named_parameters())
    fractions = []
    for name in model.conv_weight_names():
        weight = parameters[name].detach()
        fractions.append(int((weight == 0).sum().item()) / weight.numel())
    return fractions
