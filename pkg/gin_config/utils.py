import os
from datetime import datetime
from pathlib import Path

import gin

from occfer import ROOT_DIR

CONFIG_DIR = ROOT_DIR / "configs"
PRESETS = ("vggface", "vggf", "toy")


@gin.configurable()
def get_time_stamp() -> str:
    return datetime.now().strftime("%Y-%m-%d_%H-%M-%S")


def preset_config_path(preset: str) -> Path:
    if preset not in PRESETS:
        raise ValueError(f"Unknown preset {preset!r}; expected one of {PRESETS}")
    return CONFIG_DIR / f"{preset}.gin"


def data_path(path: str | Path | None, root_env: str = "FER_DATA_ROOT") -> Path | None:
    """
    Resolve a dataset path. Relative paths are taken relative to the `FER_DATA_ROOT` directory when it is set.
    """
    if path is None:
        return None
    path = Path(path).expanduser()
    root = os.environ.get(root_env)
    if not path.is_absolute() and root:
        return Path(root).expanduser() / path
    return path
