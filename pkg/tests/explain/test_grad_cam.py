import numpy as np
import pytest
import torch

from occfer.api import EmotionLabel
from occfer.explain import (
    GradCAM,
    HeatMap,
    grad_cam,
    grad_cam_from_activations,
    heatmap_half_masses,
)
from occfer.models import FaceExpressionNet, build_toy_descriptor


@pytest.fixture()
def toy_model() -> FaceExpressionNet:
    torch.manual_seed(0)
    return FaceExpressionNet(build_toy_descriptor(conv_channels=(4, 8, 8), input_size=16))


def test__grad_cam_from_activations__hand_computed():
    activations = torch.tensor(
        [[[1.0, 2.0], [3.0, 4.0]], [[0.0, 1.0], [1.0, 0.0]]], dtype=torch.float64
    )
    gradients = torch.tensor(
        [[[0.5, 0.5], [0.5, 0.5]], [[1.0, -1.0], [-1.0, -1.0]]], dtype=torch.float64
    )
    # channel weights 0.5 and -0.5
    raw = grad_cam_from_activations(activations, gradients, normalize=False)
    assert raw.tolist() == [[0.5, 0.5], [1.0, 2.0]]
    cam = grad_cam_from_activations(activations, gradients)
    assert cam.tolist() == [[0.25, 0.25], [0.5, 1.0]]


def test__grad_cam_from_activations__zero_gradients():
    activations = torch.rand(3, 4, 4)
    cam = grad_cam_from_activations(activations, torch.zeros(3, 4, 4))
    assert torch.equal(cam, torch.zeros(4, 4))


@pytest.mark.parametrize("gradient", [0.3, -0.7])
def test__grad_cam_from_activations__single_channel(gradient: float):
    activations = torch.rand(1, 5, 5, generator=torch.Generator().manual_seed(0))
    raw = grad_cam_from_activations(activations, torch.full((1, 5, 5), gradient), normalize=False)
    assert torch.allclose(raw, torch.relu(gradient * activations[0]))


def test__grad_cam_from_activations__shape_mismatch():
    with pytest.raises(ValueError):
        grad_cam_from_activations(torch.zeros(2, 3, 3), torch.zeros(2, 3, 4))


def test__grad_cam__heatmap_on_layer_grid(toy_model: FaceExpressionNet):
    image = torch.rand(3, 16, 16) * 255
    heatmap = grad_cam(toy_model, image)
    assert heatmap.shape == (4, 4)
    assert heatmap.values.min() >= 0.0
    assert heatmap.values.max() in (0.0, 1.0)
    probabilities = toy_model.predict_proba(image[None])[0]
    assert heatmap.target_class == int(torch.argmax(probabilities))
    assert heatmap.probability == pytest.approx(probabilities.max().item(), abs=1e-6)

    first_layer = grad_cam(toy_model, image, target_class=EmotionLabel.FEAR, layer_index=0)
    assert first_layer.shape == (16, 16)
    assert first_layer.target_class == EmotionLabel.FEAR


def test__grad_cam__restores_training_mode(toy_model: FaceExpressionNet):
    toy_model.train()
    GradCAM(toy_model)(torch.rand(3, 16, 16) * 255, target_class=2)
    assert toy_model.training
    assert all(parameter.grad is None for parameter in toy_model.parameters())


def test__grad_cam__rejects_layer_out_of_range(toy_model: FaceExpressionNet):
    with pytest.raises(ValueError):
        GradCAM(toy_model, layer_index=3)
    assert GradCAM(toy_model, layer_index=-3).layer_index == 0


def test__heatmap__validation():
    with pytest.raises(ValueError):
        HeatMap(np.zeros(4), target_class=0)
    with pytest.raises(ValueError):
        HeatMap(-np.ones((2, 2)), target_class=0)
    heatmap = HeatMap(np.ones((2, 2)), target_class=7)
    assert heatmap.target_class == EmotionLabel.SURPRISE
    with pytest.raises(ValueError):
        heatmap.values[0, 0] = 0.5


def test__heatmap_half_masses():
    values = np.array([[1.0, 1.0], [0.5, 0.0], [0.0, 0.25]])
    assert heatmap_half_masses(values) == (2.0, 0.75)
