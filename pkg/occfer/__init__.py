from pathlib import Path

ROOT_DIR = Path(__file__).parent.parent
