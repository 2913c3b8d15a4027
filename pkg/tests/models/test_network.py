import math

import numpy as np
import pytest
import torch
from helpers.oracles import forward_loop

from occfer.api import ShapeMismatchError
from occfer.models import FaceExpressionNet, cross_entropy_from_probabilities, predict_proba

from .fixtures import *


@pytest.mark.parametrize("seed", [0, 1, 2])
def test__face_expression_net__matches_loop_oracle(tiny_model: FaceExpressionNet, seed: int):
    rng = np.random.default_rng(seed)
    batch = rng.uniform(0, 255, size=(2, 3, 8, 8))
    probabilities = predict_proba(tiny_model, torch.tensor(batch, dtype=torch.float32))
    for image, row in zip(batch, probabilities.detach().numpy()):
        assert np.allclose(row, forward_loop(tiny_model, image), atol=1e-5)


def test__face_expression_net__probabilities_sum_to_one(tiny_model: FaceExpressionNet):
    batch = torch.rand(5, 3, 8, 8) * 255
    probabilities = tiny_model.predict_proba(batch)
    assert probabilities.shape == (5, 8)
    assert torch.allclose(probabilities.sum(dim=1), torch.ones(5), atol=1e-6)
    assert torch.all(probabilities >= 0)


def test__face_expression_net__zero_weights_give_uniform_probabilities(
    tiny_model: FaceExpressionNet,
):
    with torch.no_grad():
        for parameter in tiny_model.parameters():
            parameter.zero_()
    probabilities = tiny_model.predict_proba(torch.rand(3, 3, 8, 8) * 255)
    assert torch.allclose(probabilities, torch.full((3, 8), 0.125))


def test__cross_entropy_from_probabilities__uniform_is_log_eight():
    probabilities = torch.full((4, 8), 0.125)
    labels = torch.tensor([0, 3, 5, 7])
    assert cross_entropy_from_probabilities(probabilities, labels).item() == pytest.approx(
        math.log(8)
    )


def test__cross_entropy_from_probabilities__matches_torch(tiny_model: FaceExpressionNet):
    batch = torch.rand(6, 3, 8, 8) * 255
    labels = torch.tensor([0, 1, 2, 3, 4, 5])
    logits = tiny_model(batch)
    expected = torch.nn.functional.cross_entropy(logits, labels)
    actual = cross_entropy_from_probabilities(torch.softmax(logits, dim=1), labels)
    assert actual.item() == pytest.approx(expected.item(), rel=1e-5)


@pytest.mark.parametrize("seed", list(range(5)))
def test__face_expression_net__gradient_matches_finite_differences(
    three_block_descriptor, seed: int
):
    torch.manual_seed(seed)
    model = FaceExpressionNet(three_block_descriptor).double().train()
    batch = torch.rand(2, 3, 8, 8, dtype=torch.float64) * 255
    labels = torch.tensor([seed % 8, (seed + 3) % 8])

    def _loss() -> torch.Tensor:
        # same dropout mask on every evaluation
        torch.manual_seed(100 + seed)
        return cross_entropy_from_probabilities(predict_proba(model, batch), labels)

    parameters = dict(model.named_parameters())
    assert len(model.convs) == 3
    analytic = torch.autograd.grad(_loss(), list(parameters.values()))
    generator = torch.Generator().manual_seed(seed)
    eps = 1e-6
    for (name, parameter), grad in zip(parameters.items(), analytic):
        flat = parameter.data.view(-1)
        for idx in torch.randint(0, flat.numel(), (3,), generator=generator).tolist():
            original = flat[idx].item()
            with torch.no_grad():
                flat[idx] = original + eps
                plus = _loss().item()
                flat[idx] = original - eps
                minus = _loss().item()
                flat[idx] = original
            numeric = (plus - minus) / (2 * eps)
            exact = grad.view(-1)[idx].item()
            assert abs(numeric - exact) <= 1e-4 * max(abs(numeric), abs(exact), 1e-3), name


def test__face_expression_net__rejects_wrong_input_size(tiny_model: FaceExpressionNet):
    with pytest.raises(ShapeMismatchError):
        tiny_model(torch.zeros(1, 3, 16, 16))
    with pytest.raises(ShapeMismatchError):
        tiny_model(torch.zeros(3, 8, 8))


def test__face_expression_net__features_capture_post_relu(tiny_model: FaceExpressionNet):
    batch = torch.rand(2, 3, 8, 8) * 255
    feature_map, captured = tiny_model.features(batch, capture_layer=0)
    assert captured.shape == (2, 2, 8, 8)
    assert torch.all(captured >= 0)
    assert feature_map.shape == (2, 3, 4, 4)
    assert torch.allclose(tiny_model.classify_features(feature_map), tiny_model(batch))


def test__face_expression_net__channel_means_in_state_dict(tiny_model: FaceExpressionNet):
    state = tiny_model.state_dict()
    assert state["channel_mean"].view(-1).tolist() == [10.0, 20.0, 30.0]
    tiny_model.set_channel_means((1.0, 2.0, 3.0))
    assert tiny_model.channel_mean.view(-1).tolist() == [1.0, 2.0, 3.0]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test__classify_features__invariant_to_spatial_permutation(
    tiny_model: FaceExpressionNet, seed: int
):
    generator = torch.Generator().manual_seed(seed)
    feature_map = torch.rand(2, 3, 4, 4, generator=generator)
    order = torch.randperm(16, generator=generator)
    permuted = feature_map.flatten(2)[:, :, order].view(2, 3, 4, 4)
    assert not torch.equal(permuted, feature_map)
    assert torch.equal(
        tiny_model.classify_features(permuted), tiny_model.classify_features(feature_map)
    )
