import json
import math
import shutil
from pathlib import Path
from typing import Any, Dict, List, Sequence

import gin
import pandas as pd

from .logger_base import LoggerBase

METRICS_COLUMNS = ("epoch", "phase", "lr", "train_loss", "val_error")


@gin.configurable()
class FileLogger(LoggerBase):
    """
    A logger that writes everything into the run directory. Epoch metrics are appended to `<prefix>metrics.csv`
    (one row per epoch, columns `epoch,phase,lr,train_loss,val_error,sparsity_l0...`); other artifacts are written
    as named text or json files.

    Args:
        logdir: the directory to write into.
        metrics_file_name: the name of the metrics file.
        float_format: the format used for floats in the metrics file. None writes the shortest representation
            that reads back to the same float.
    """

    def __init__(
        self,
        logdir: str | Path,
        metrics_file_name: str = "metrics.csv",
        float_format: str | None = None,
    ):
        super().__init__(logdir)
        self.metrics_file_name = metrics_file_name
        self.float_format = float_format
        self._columns: Dict[Path, List[str]] = {}

    def metrics_path(self, prefix: str = "") -> Path:
        return self.logdir / f"{prefix}{self.metrics_file_name}"

    @staticmethod
    def _metrics_columns(metrics: Dict[str, Any]) -> List[str]:
        sparsity = sorted(
            (key for key in metrics if key.startswith("sparsity_l")),
            key=lambda key: int(key.removeprefix("sparsity_l")),
        )
        return list(METRICS_COLUMNS) + sparsity

    def log_metrics(self, metrics: Dict[str, Any], prefix: str = ""):
        path = self.metrics_path(prefix)
        if path not in self._columns:
            self._columns[path] = self._metrics_columns(metrics)
            write_header = True
        else:
            write_header = False
        columns = self._columns[path]
        row = {column: metrics.get(column, math.nan) for column in columns}
        pd.DataFrame([row], columns=columns).to_csv(
            path,
            mode="w" if write_header else "a",
            header=write_header,
            index=False,
            float_format=self.float_format,
        )

    def log_to_file(self, content: Any, name: str, type: str = "txt"):
        if type == "json":
            path = self.logdir / f"{name}.json"
            content = content if isinstance(content, str) else json.dumps(content, indent=2)
        elif type in ("txt", "gin", "csv"):
            path = self.logdir / f"{name}.{type}"
        else:
            raise ValueError(f"Unknown type {type}")
        path.write_text(str(content))

    def log_config(self, config: Dict[str, Any]):
        self.log_to_file(config, name="config", type="json")

    def log_files(self, file_paths: Sequence[Path | str]):
        for file_path in file_paths:
            file_path = Path(file_path)
            if file_path.parent.resolve() != self.logdir.resolve():
                shutil.copy(file_path, self.logdir / file_path.name)

    def close(self):
        pass

    def restart(self):
        self._columns = {}
