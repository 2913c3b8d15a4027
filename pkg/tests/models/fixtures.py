import pytest
import torch

from occfer.models import FaceExpressionNet, build_toy_descriptor


@pytest.fixture()
def tiny_descriptor():
    return build_toy_descriptor(conv_channels=(2, 3), input_size=8)


@pytest.fixture()
def tiny_model(tiny_descriptor) -> FaceExpressionNet:
    torch.manual_seed(0)
    model = FaceExpressionNet(tiny_descriptor, channel_means=(10.0, 20.0, 30.0))
    return model.eval()


@pytest.fixture()
def three_block_descriptor():
    return build_toy_descriptor(conv_channels=(2, 3, 4), input_size=8, dropout_rate=0.5)
