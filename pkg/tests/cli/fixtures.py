from pathlib import Path
from typing import List

import pytest

from occfer.cli import main

TOY_BINDINGS = [
    "generate_synthetic.num_per_class = 10",
    "stage1/TrainStageConfig.epochs = 3",
    "stage2/TrainStageConfig.epochs = 3",
    "RunConfig.eval_batch_size = 32",
]


def run_cli(command: str, out: Path, *extra: str, bindings: List[str] = ()) -> int:
    argv = [command, "--preset", "toy", "--out", str(out), "--seed", "0"]
    for binding in [*TOY_BINDINGS, *bindings]:
        argv += ["--binding", binding]
    return main([*argv, *extra])


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory: pytest.TempPathFactory) -> Path:
    out = tmp_path_factory.mktemp("toy_run")
    assert run_cli("prepare", out) == 0
    assert run_cli("train", out) == 0
    return out
