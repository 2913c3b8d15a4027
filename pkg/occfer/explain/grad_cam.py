from dataclasses import dataclass
from typing import Tuple

import numpy as np
import torch
import torch.nn.functional as F
from torchtyping import TensorType

from occfer.api.emotions import EmotionLabel
from occfer.models.network import FaceExpressionNet


@dataclass(frozen=True)
class HeatMap:
    """
    A Grad-CAM heat map on the spatial grid of the explained conv layer.

    Attributes:
        values: non-negative float64 array of shape (height, width); its maximum is 1 unless it is all zero.
        target_class: the explained class.
        probability: the predicted probability of the target class.
    """

    values: np.ndarray
    target_class: EmotionLabel
    probability: float = float("nan")

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"A heat map is a 2-D grid, got shape {values.shape}")
        if (values < 0).any():
            raise ValueError("Heat map values must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "target_class", EmotionLabel(self.target_class))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


def grad_cam_from_activations(
    activations: TensorType["channels", "height", "width", float],
    gradients: TensorType["channels", "height", "width", float],
    normalize: bool = True,
) -> TensorType["height", "width", float]:
    """
    ReLU of the activation maps weighted by the spatially averaged gradients of the class score, divided by its
    maximum unless it is all zero.
    """
    if activations.shape != gradients.shape:
        raise ValueError(
            f"Activations {tuple(activations.shape)} and gradients {tuple(gradients.shape)} differ"
        )
    weights = gradients.mean(dim=(1, 2))
    cam = F.relu((weights.view(-1, 1, 1) * activations).sum(dim=0))
    if normalize:
        peak = cam.max()
        if peak > 0:
            cam = cam / peak
    return cam


class GradCAM:
    """
    Grad-CAM over one conv layer of a `FaceExpressionNet`. The explained activation is the post-ReLU output of the
    conv layer and the class score is the pre-softmax logit.

    Args:
        model: the model. It is put in evaluation mode while explaining.
        layer_index: the conv layer index; negative values count from the end (-1 is the last conv layer).
    """

    def __init__(self, model: FaceExpressionNet, layer_index: int = -1):
        n_layers = len(model.convs)
        if not -n_layers <= layer_index < n_layers:
            raise ValueError(f"Layer index {layer_index} out of range for {n_layers} conv layers")
        self.model = model
        self.layer_index = layer_index % n_layers

    def __call__(
        self,
        image: TensorType[3, "height", "width", float],
        target_class: EmotionLabel | int | None = None,
    ) -> HeatMap:
        x = torch.as_tensor(image, dtype=torch.float32)
        if x.dim() == 3:
            x = x.unsqueeze(0)
        was_training = self.model.training
        self.model.eval()
        try:
            with torch.enable_grad():
                feature_map, activation = self.model.features(x, capture_layer=self.layer_index)
                logits = self.model.classify_features(feature_map)
                probabilities = torch.softmax(logits.detach(), dim=1)
                if target_class is None:
                    target_class = int(torch.argmax(probabilities, dim=1).item())
                target_class = int(target_class)
                (gradients,) = torch.autograd.grad(logits[0, target_class], activation)
        finally:
            self.model.train(was_training)
        cam = grad_cam_from_activations(activation[0].detach(), gradients[0])
        return HeatMap(
            values=cam.cpu().double().numpy(),
            target_class=EmotionLabel(target_class),
            probability=float(probabilities[0, target_class]),
        )


def grad_cam(
    model: FaceExpressionNet,
    image: TensorType[3, "height", "width", float],
    target_class: EmotionLabel | int | None = None,
    layer_index: int = -1,
) -> HeatMap:
    """
    Grad-CAM heat map of a preprocessed image (see `ImagePipeline`). The target class defaults to the predicted
    one and the layer to the last conv layer.
    """
    return GradCAM(model, layer_index)(image, target_class)


def heatmap_half_masses(values: np.ndarray) -> Tuple[float, float]:
    """
    The heat map mass of the upper half (rows [0, H // 2)) and of the lower half.
    """
    values = np.asarray(values, dtype=np.float64)
    half = values.shape[0] // 2
    return float(values[:half].sum()), float(values[half:].sum())
