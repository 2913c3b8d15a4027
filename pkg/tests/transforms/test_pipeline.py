import numpy as np
import pytest

from occfer.api import OcclusionMode
from occfer.transforms import ImagePipeline, build_pipeline


@pytest.fixture()
def face() -> np.ndarray:
    rng = np.random.default_rng(0)
    return rng.integers(1, 256, size=(48, 48), dtype=np.uint8)


def test__image_pipeline__output_shape_and_dtype(face: np.ndarray):
    pipeline = ImagePipeline(OcclusionMode.none(), flip_augment=False, target_size=224)
    output = pipeline(face)
    assert output.shape == (3, 224, 224)
    assert output.dtype == np.float32
    assert output.min() >= 0.0 and output.max() <= 255.0


@pytest.mark.parametrize("fill", [0, 128])
def test__image_pipeline__occluded_band_equals_fill(face: np.ndarray, fill: int):
    pipeline = ImagePipeline(OcclusionMode.upper_half(fill), flip_augment=False, target_size=224)
    output = pipeline(face)
    assert np.all(output[:, :112] == fill)
    assert not np.all(output[:, 112:] == fill)


def test__image_pipeline__occlusion_after_resize(face: np.ndarray):
    pipeline = ImagePipeline(
        OcclusionMode.upper_half(), flip_augment=False, target_size=224, occlude_before_resize=False
    )
    output = pipeline(face)
    assert np.all(output[:, :112] == 0)


def test__image_pipeline__flip_stream_is_deterministic(face: np.ndarray):
    pipeline = build_pipeline(OcclusionMode.none(), flip_augment=True, target_size=32)
    rng_a, rng_b = np.random.default_rng(3), np.random.default_rng(3)
    outputs_a = [pipeline(face, rng_a) for _ in range(10)]
    outputs_b = [pipeline(face, rng_b) for _ in range(10)]
    assert all(np.array_equal(a, b) for a, b in zip(outputs_a, outputs_b))
    assert outputs_a[0].shape == (3, 32, 32)


def test__image_pipeline__flips_only_with_rng(face: np.ndarray):
    pipeline = ImagePipeline(OcclusionMode.none(), flip_augment=True, target_size=48)
    unflipped = pipeline(face)
    outputs = [pipeline(face, np.random.default_rng(seed)) for seed in range(20)]
    flipped = [o for o in outputs if not np.array_equal(o, unflipped)]
    assert 0 < len(flipped) < len(outputs)
    for output in flipped:
        assert np.array_equal(output, unflipped[:, :, ::-1])


def test__image_pipeline__evaluation_copy_disables_flip(face: np.ndarray):
    pipeline = ImagePipeline(OcclusionMode.upper_half(), flip_augment=True, target_size=48)
    evaluation = pipeline.evaluation_copy()
    assert not evaluation.flip_augment
    assert evaluation.occlusion == pipeline.occlusion
    assert np.array_equal(evaluation(face, np.random.default_rng(0)), evaluation(face))
