import pytest

from occfer.data import CorpusSplits, generate_synthetic
from occfer.dsd import build_sparsity_schedule
from occfer.models import FaceExpressionNet, build_model, build_toy_descriptor
from occfer.trainer import OptimizerConfig, TrainStageConfig


@pytest.fixture(scope="module")
def toy_corpus() -> CorpusSplits:
    return generate_synthetic(
        num_per_class=40, height=16, width=16, lower_signal_weight=0.6, seed=0
    )


@pytest.fixture()
def toy_model() -> FaceExpressionNet:
    return build_model(build_toy_descriptor(conv_channels=(8, 16, 32), input_size=16))


def make_stage_config(
    stage: str = "full_faces", epochs: int = 5, dsd: bool = True, seed: int = 0, **optimizer_kwargs
) -> TrainStageConfig:
    optimizer = OptimizerConfig(
        **({"initial_lr": 0.05, "momentum": 0.9, "batch_size": 32} | optimizer_kwargs)
    )
    return TrainStageConfig(
        stage=stage,
        epochs=epochs,
        optimizer=optimizer,
        sparsity=build_sparsity_schedule(0.2, 0.5, 3) if dsd else None,
        flip_augment=False,
        seed=seed,
    )
