import json
from pathlib import Path

import pandas as pd
import pytest

from occfer.trainer import DummyLogger, FileLogger


def test__file_logger__appends_metrics_rows(tmp_path: Path):
    logger = FileLogger(tmp_path / "logs")
    row = {"epoch": 1, "phase": "dense", "lr": 0.01, "train_loss": 2.0, "val_error": 0.5}
    logger.log_metrics(row | {"sparsity_l10": 0.5, "sparsity_l2": 0.25}, prefix="")
    logger.log_metrics(row | {"epoch": 2, "sparsity_l10": 0.5, "sparsity_l2": 0.3}, prefix="")
    metrics = pd.read_csv(tmp_path / "logs" / "metrics.csv")
    assert list(metrics.columns)[-2:] == ["sparsity_l2", "sparsity_l10"]
    assert metrics["epoch"].tolist() == [1, 2]
    assert metrics["sparsity_l2"].tolist() == [0.25, 0.3]


def test__file_logger__restart_rewrites_header(tmp_path: Path):
    logger = FileLogger(tmp_path)
    row = {"epoch": 1, "phase": "dense", "lr": 0.01, "train_loss": 2.0, "val_error": 0.5}
    logger.log_metrics(row, prefix="")
    logger.restart()
    logger.log_metrics(row | {"epoch": 7}, prefix="")
    assert pd.read_csv(tmp_path / "metrics.csv")["epoch"].tolist() == [7]


def test__file_logger__log_to_file(tmp_path: Path):
    logger = FileLogger(tmp_path)
    logger.log_to_file({"a": 1}, name="config", type="json")
    logger.log_to_file("x = 1", name="config", type="gin")
    assert json.loads((tmp_path / "config.json").read_text()) == {"a": 1}
    assert (tmp_path / "config.gin").read_text() == "x = 1"
    with pytest.raises(ValueError):
        logger.log_to_file("x", name="config", type="yaml")


def test__dummy_logger__writes_nothing(tmp_path: Path):
    logger = DummyLogger()
    logger.log_metrics({"epoch": 1}, prefix="")
    logger.log_to_file("x", name="x")
    assert list(tmp_path.iterdir()) == []


def test__file_logger__floats_read_back_exactly(tmp_path: Path):
    logger = FileLogger(tmp_path)
    sparsity = [403 / 1152, 151 / 432, 921 / 4608]
    row = {"epoch": 1, "phase": "sparse", "lr": 1e-4, "train_loss": 1 / 3, "val_error": 0.1}
    logger.log_metrics(row | {f"sparsity_l{idx}": value for idx, value in enumerate(sparsity)}, "")
    metrics = pd.read_csv(tmp_path / "metrics.csv", float_precision="round_trip")
    assert [metrics[f"sparsity_l{idx}"][0] for idx in range(3)] == sparsity
    assert metrics["train_loss"][0] == 1 / 3


def test__file_logger__log_config_and_files(tmp_path: Path):
    logger = FileLogger(tmp_path / "run")
    logger.log_config({"stage": "full_faces", "epochs": 3})
    assert json.loads((tmp_path / "run" / "config.json").read_text())["epochs"] == 3
    extra = tmp_path / "extra.gin"
    extra.write_text("x = 1")
    logger.log_files([extra, tmp_path / "run" / "config.json"])
    assert (tmp_path / "run" / "extra.gin").read_text() == "x = 1"
    written = sorted(path.name for path in (tmp_path / "run").iterdir())
    assert written == ["config.json", "extra.gin"]
