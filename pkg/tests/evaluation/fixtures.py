import numpy as np
import pytest
import torch

from occfer.evaluation import EvalReport, evaluate_predictions
from occfer.models import FaceExpressionNet, build_toy_descriptor


def report_with_accuracy(
    accuracy: float, dataset: str = "FER+", test_set: str = "lower_half", n: int = 10000
) -> EvalReport:
    n_correct = round(accuracy * n)
    labels = np.zeros(n, dtype=np.int64)
    predictions = np.where(np.arange(n) < n_correct, 0, 1)
    return evaluate_predictions(
        predictions, labels, model_name="VGG-face", test_set=test_set, dataset=dataset
    )


@pytest.fixture()
def zero_model() -> FaceExpressionNet:
    model = FaceExpressionNet(build_toy_descriptor(conv_channels=(4, 8), input_size=16))
    with torch.no_grad():
        for parameter in model.parameters():
            parameter.zero_()
    return model
