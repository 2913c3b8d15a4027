from pathlib import Path
from typing import Tuple

import gin
import pandas as pd
import pytest

from occfer.cli import load_config
from occlusion_experiment import occlusion_experiment

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def toy_run(tmp_path_factory: pytest.TempPathFactory) -> Tuple[Path, pd.DataFrame]:
    out_dir = tmp_path_factory.mktemp("occlusion")
    load_config("toy", [], [])
    try:
        yield out_dir, occlusion_experiment(out_dir=out_dir)
    finally:
        gin.clear_config()


def test__occlusion_experiment__occluding_costs_and_fine_tuning_recovers(
    toy_run: Tuple[Path, pd.DataFrame],
):
    _, summary = toy_run
    assert summary["seed"].tolist() == [0, 1, 2, 3, 4]
    drop = summary["full_full"] - summary["full_lower"]
    gain = summary["lower_lower"] - summary["full_lower"]
    assert ((drop >= 10.0) & (gain >= 5.0)).sum() >= 4
    assert summary["passed"].sum() >= 4


def test__occlusion_experiment__grad_cam_mass_stays_in_lower_half(
    toy_run: Tuple[Path, pd.DataFrame],
):
    _, summary = toy_run
    assert (summary["lower_half_localisation"] >= 0.9).sum() >= 4


def test__occlusion_experiment__writes_summary_and_checkpoints(
    toy_run: Tuple[Path, pd.DataFrame],
):
    out_dir, summary = toy_run
    written = pd.read_csv(out_dir / "summary.csv")
    assert written["seed"].tolist() == summary["seed"].tolist()
    for seed in summary["seed"]:
        assert (out_dir / f"seed_{seed}" / "stage2" / "model.ckpt").exists()
