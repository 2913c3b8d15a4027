"""
Command-line entry point: `prepare`, `train`, `eval`, `explain` and `report`. Every command reads a gin preset
(`--preset`), optional extra config files (`--config`) and single bindings (`--binding`). Exit codes: 0 on
success, 1 on a runtime failure, 2 on an input or configuration error.
"""
import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Sequence

import gin
import numpy as np
import torch

from gin_config import CONFIG_DIR, PRESETS, data_path, get_time_stamp, preset_config_path
from occfer.api.data_structures import DatasetSplit, OcclusionMode
from occfer.api.errors import (
    CheckpointCorruptedError,
    CheckpointVersionError,
    ConfigError,
    DatasetFormatError,
    LabelRangeError,
    MissingImageError,
    TrainingAbortedError,
)
from occfer.data.datasets import compute_channel_means
from occfer.data.ferplus import CorpusSplits, load_ferplus
from occfer.data.manifest import (
    decode_image,
    load_manifest,
    load_manifest_with_report,
    partition_by_split,
    write_manifest,
)
from occfer.data.sampling import downsample_per_class, join_training_sets
from occfer.data.synthetic import generate_synthetic
from occfer.evaluation.metrics import EvalReport, evaluate
from occfer.evaluation.reporting import (
    ResultRow,
    build_reference_rows,
    read_report_csv,
    render_results_table,
    write_confusion_csv,
    write_report_csv,
)
from occfer.explain.grad_cam import grad_cam
from occfer.explain.panel import render_panel
from occfer.models.descriptors import ArchitectureDescriptor
from occfer.models.factory import build_model
from occfer.trainer.checkpoint import checkpoint_digest, load_checkpoint
from occfer.trainer.logger.file_logger import FileLogger
from occfer.trainer.trainer import TrainStageConfig
from occfer.trainer.two_stage import run_single_stage, run_two_stage
from occfer.transforms.pipeline import ImagePipeline

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_INPUT_ERROR = 2

INPUT_ERRORS = (
    ConfigError,
    FileNotFoundError,
    MissingImageError,
    DatasetFormatError,
    LabelRangeError,
    CheckpointVersionError,
    CheckpointCorruptedError,
)


@gin.configurable()
@dataclass(frozen=True)
class RunConfig:
    """
    Args:
        descriptor: the architecture of the model.
        model_name: the model name shown in the result tables.
        seed: the default seed (the `--seed` flag takes precedence).
        data_dir: the prepared data directory. Defaults to `<out>/data`.
        device: the training and inference device.
        num_workers: number of data loader workers.
        eval_batch_size: the inference batch size.
        ferplus_eval_split: the FER+ split used for evaluation ("test" or "val").
    """

    descriptor: ArchitectureDescriptor
    model_name: str = "model"
    seed: int = 0
    data_dir: str | None = None
    device: str = "cpu"
    num_workers: int = 0
    eval_batch_size: int = 64
    ferplus_eval_split: Literal["test", "val"] = "test"


@gin.configurable()
@dataclass(frozen=True)
class PrepareConfig:
    """
    Args:
        source: "synthetic", "ferplus", "affectnet" or "joint" (AffectNet and FER+ training sets joined).
        ferplus_pixel_csv: the FER2013 pixel CSV.
        ferplus_label_csv: the FER+ vote CSV.
        affectnet_manifest: the AffectNet manifest (`relpath,label,split`).
        affectnet_image_root: the directory the AffectNet paths are relative to.
        affectnet_max_per_class: the per-class cap of the AffectNet training set.
        val_source: the corpus whose validation split drives the plateau scheduler on the joint set.
        num_workers: number of image decoding threads.
    """

    source: Literal["synthetic", "ferplus", "affectnet", "joint"] = "synthetic"
    ferplus_pixel_csv: str | None = None
    ferplus_label_csv: str | None = None
    affectnet_manifest: str | None = None
    affectnet_image_root: str | None = None
    affectnet_max_per_class: int | None = 15000
    val_source: Literal["ferplus", "affectnet"] = "ferplus"
    num_workers: int = 0

    def __post_init__(self):
        if self.source not in ("synthetic", "ferplus", "affectnet", "joint"):
            raise ConfigError(f"Unknown data source: {self.source!r}")
        if self.val_source not in ("ferplus", "affectnet"):
            raise ConfigError(f"Unknown validation source: {self.val_source!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", choices=PRESETS, default=None, help="named preset config")
    common.add_argument(
        "--config", action="append", default=[], help="extra gin config file (repeatable)"
    )
    common.add_argument(
        "--binding", action="append", default=[], help="single gin binding (repeatable)"
    )
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", type=Path, default=Path("experiments/run"))

    parser = argparse.ArgumentParser(
        prog="occfer", description="Facial expression recognition under upper-half occlusion."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("prepare", parents=[common], help="build the data manifests")

    train = commands.add_parser("train", parents=[common], help="two-stage training")
    train.add_argument(
        "--stage", choices=("both", "full-only", "occluded-only"), default="both"
    )
    train.add_argument(
        "--init-checkpoint",
        type=Path,
        default=None,
        help="initial model of `--stage occluded-only` (default: <out>/stage1/model.ckpt)",
    )

    evaluate_parser = commands.add_parser("eval", parents=[common], help="evaluation matrix")
    evaluate_parser.add_argument("--checkpoint", type=Path, action="append", default=[])
    evaluate_parser.add_argument(
        "--test-mode", choices=("both", "full", "occluded"), default="both"
    )

    explain = commands.add_parser("explain", parents=[common], help="Grad-CAM panel")
    explain.add_argument("--checkpoint", type=Path, default=None)
    explain.add_argument("--images", type=Path, nargs="+", default=None)
    explain.add_argument("--n-images", type=int, default=4)
    explain.add_argument("--occlusion", choices=("none", "upper_half"), default=None)
    explain.add_argument("--layer-index", type=int, default=-1)

    report = commands.add_parser("report", parents=[common], help="re-render the result table")
    report.add_argument("--reports", type=Path, nargs="+", default=None)
    return parser


def load_config(preset: str | None, config_files: Sequence[str], bindings: Sequence[str]):
    """
    Parse the preset and the extra config files and bindings. Unknown configurables or parameters are rejected.
    """
    gin.clear_config()
    gin.add_config_file_search_path(str(CONFIG_DIR))
    files = [str(preset_config_path(preset))] if preset is not None else []
    files += [str(path) for path in config_files]
    for path in files:
        if not Path(path).is_file() and not (CONFIG_DIR / path).is_file():
            raise ConfigError(f"Config file not found: {path}")
    try:
        gin.parse_config_files_and_bindings(files, bindings=list(bindings))
    except (ValueError, SyntaxError, KeyError, TypeError) as error:
        raise ConfigError(f"Invalid configuration: {error}") from error


def _required_path(value: str | None, name: str) -> Path:
    path = data_path(value)
    if path is None:
        raise ConfigError(f"PrepareConfig.{name} is required for this data source")
    if not path.exists():
        raise FileNotFoundError(f"{name}: {path} does not exist")
    return path


def _retag(split: DatasetSplit, tag: str) -> DatasetSplit:
    return DatasetSplit(tuple(dataclasses.replace(record, split=tag) for record in split))


def load_sources(config: PrepareConfig, seed: int) -> Dict[str, CorpusSplits]:
    sources: Dict[str, CorpusSplits] = {}
    if config.source == "synthetic":
        sources["synthetic"] = generate_synthetic(seed=seed)
    if config.source in ("ferplus", "joint"):
        sources["ferplus"] = load_ferplus(
            _required_path(config.ferplus_pixel_csv, "ferplus_pixel_csv"),
            _required_path(config.ferplus_label_csv, "ferplus_label_csv"),
        )
    if config.source in ("affectnet", "joint"):
        manifest = _required_path(config.affectnet_manifest, "affectnet_manifest")
        image_root = _required_path(config.affectnet_image_root, "affectnet_image_root")
        split, report = load_manifest_with_report(
            manifest, image_root, source="affectnet", num_workers=config.num_workers
        )
        affectnet = partition_by_split(split)
        sources["affectnet"] = CorpusSplits(
            train=downsample_per_class(affectnet.train, config.affectnet_max_per_class, seed),
            val=affectnet.val,
            test=affectnet.test,
            report=report,
        )
    return sources


def assemble_splits(sources: Dict[str, CorpusSplits], val_source: str) -> CorpusSplits:
    """
    Combine the corpora into one train / val / test layout. The training sets are joined; the validation split
    comes from `val_source` (or the only corpus). AffectNet has no public test labels, so its validation split is
    evaluated as a test set.
    """
    if len(sources) == 1:
        return next(iter(sources.values()))
    train = join_training_sets(sources["ferplus"].train, sources["affectnet"].train)
    val = sources[val_source].val
    test = DatasetSplit.concatenate(
        [sources["ferplus"].test, _retag(sources["affectnet"].val, "test")]
    )
    return CorpusSplits(train=train, val=val, test=test)


def cmd_prepare(args: argparse.Namespace, run_seed: int) -> int:
    config = PrepareConfig()
    sources = load_sources(config, run_seed)
    splits = assemble_splits(sources, config.val_source)
    data_dir = args.out / "data"
    manifest_path = write_manifest([splits.train, splits.val, splits.test], data_dir)
    stats = {
        "source": config.source,
        "splits": {tag: splits[tag].class_counts_dict() for tag in ("train", "val", "test")},
        "sizes": {tag: len(splits[tag]) for tag in ("train", "val", "test")},
        "ingestion": {name: corpus.report.summary() for name, corpus in sources.items()},
    }
    (data_dir / "stats.json").write_text(json.dumps(stats, indent=2))
    print(f"Wrote {sum(stats['sizes'].values())} records to {manifest_path}")
    for tag, size in stats["sizes"].items():
        print(f"  {tag}: {size}")
    return EXIT_OK


def load_prepared(run: RunConfig, out: Path) -> CorpusSplits:
    data_dir = data_path(run.data_dir) if run.data_dir is not None else out / "data"
    manifest_path = data_dir / "manifest.csv"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"No prepared data at {manifest_path}; run `prepare` first")
    split = load_manifest(manifest_path, data_dir, source="synthetic", num_workers=run.num_workers)
    return partition_by_split(split)


def _stage_configs() -> tuple[TrainStageConfig, TrainStageConfig]:
    with gin.config_scope("stage1"):
        stage1 = TrainStageConfig()
    with gin.config_scope("stage2"):
        stage2 = TrainStageConfig()
    return stage1, stage2


def _with_seed(config: TrainStageConfig, seed: int) -> TrainStageConfig:
    return dataclasses.replace(config, seed=seed)


def cmd_train(args: argparse.Namespace, run: RunConfig, run_seed: int) -> int:
    data = load_prepared(run, args.out)
    stage1, stage2 = (_with_seed(config, run_seed) for config in _stage_configs())
    trainer_kwargs = dict(device=run.device, num_workers=run.num_workers)

    if args.stage == "occluded-only":
        parent_path = args.init_checkpoint or args.out / "stage1" / "model.ckpt"
        if not parent_path.is_file():
            raise FileNotFoundError(f"Initial checkpoint {parent_path} does not exist")
        model = load_checkpoint(parent_path).build_model()
        provenance = {
            "parent_stage": "full_faces",
            "parent_checkpoint": f"{parent_path.parent.name}/{parent_path.name}",
            "parent_sha256": checkpoint_digest(parent_path),
        }
    else:
        means = compute_channel_means(data.train)
        model = build_model(
            descriptor=run.descriptor, channel_means=means, head_init_seed=run_seed
        )
        provenance = {}

    snapshot = gin.operative_config_str()
    logger = FileLogger(args.out)
    logger.log_to_file(snapshot, name="config", type="gin")
    logger.log_files(args.config)
    logger.log_to_file(
        f"started: {get_time_stamp()}\ncommand: train --stage {args.stage}\n", name="run_info"
    )
    trainer_kwargs["config_snapshot"] = snapshot

    if args.stage == "both":
        result = run_two_stage(
            model, data.train, data.val, stage1, stage2, args.out, **trainer_kwargs
        )
        paths = [result.stage1.checkpoint_path, result.stage2.checkpoint_path]
    elif args.stage == "full-only":
        result = run_single_stage(model, data.train, data.val, stage1, args.out, **trainer_kwargs)
        paths = [result.checkpoint_path]
    else:
        result = run_single_stage(
            model, data.train, data.val, stage2, args.out, provenance, **trainer_kwargs
        )
        paths = [result.checkpoint_path]
    for path in paths:
        print(f"Checkpoint: {path}")
    return EXIT_OK


def _default_checkpoints(out: Path) -> List[Path]:
    candidates = (out / "stage1" / "model.ckpt", out / "stage2" / "model.ckpt")
    return [path for path in candidates if path.is_file()]


def evaluation_splits(data: CorpusSplits, ferplus_eval_split: str) -> Dict[str, DatasetSplit]:
    """
    The evaluation records of every corpus present in the prepared data, keyed by corpus.
    """
    splits: Dict[str, DatasetSplit] = {}
    for source in dict.fromkeys(record.source for record in data.test):
        tag = "val" if source == "ferplus" and ferplus_eval_split == "val" else "test"
        records = tuple(record for record in data[tag] if record.source == source)
        if records:
            splits[source] = DatasetSplit(records)
    return splits


def cmd_eval(args: argparse.Namespace, run: RunConfig) -> int:
    checkpoints = args.checkpoint or _default_checkpoints(args.out)
    if not checkpoints:
        raise FileNotFoundError(f"No checkpoints given and none found under {args.out}")
    for path in checkpoints:
        if not path.is_file():
            raise FileNotFoundError(f"Checkpoint {path} does not exist")
    data = load_prepared(run, args.out)
    splits = evaluation_splits(data, run.ferplus_eval_split)
    if not splits:
        raise ConfigError("The prepared data has no evaluation records")
    test_modes = {
        "both": [OcclusionMode.none(), OcclusionMode.upper_half()],
        "full": [OcclusionMode.none()],
        "occluded": [OcclusionMode.upper_half()],
    }[args.test_mode]

    eval_dir = args.out / "eval"
    reports: List[EvalReport] = []
    for path in checkpoints:
        checkpoint = load_checkpoint(path)
        model = checkpoint.build_model().to(run.device)
        train_set = OcclusionMode(**checkpoint.preprocessing["occlusion"]).face_mode
        for occlusion in test_modes:
            # the test occlusion keeps the fill the model was trained with
            if occlusion.is_occluded:
                occlusion = OcclusionMode.upper_half(checkpoint.preprocessing["occlusion"]["fill"])
            for source, split in splits.items():
                report = evaluate(
                    model,
                    split,
                    occlusion,
                    model_name=run.model_name,
                    train_set=train_set,
                    batch_size=run.eval_batch_size,
                    device=run.device,
                )
                name = f"{path.parent.name}__{report.test_set}__{source}"
                write_report_csv([report], eval_dir / f"{name}.csv")
                write_confusion_csv(report, eval_dir / f"{name}__confusion.csv")
                reports.append(report)
                print(f"{name}: accuracy {report.accuracy:.4f} (n={report.n})")

    table = render_results_table(reports, build_reference_rows())
    table.write(eval_dir)
    print(table.text)
    return EXIT_OK


def _display_image(image: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(image.transpose(1, 2, 0)), 0, 255).astype(np.uint8)


def cmd_explain(args: argparse.Namespace, run: RunConfig) -> int:
    checkpoint_path = args.checkpoint or args.out / "stage2" / "model.ckpt"
    if not checkpoint_path.is_file():
        raise FileNotFoundError(f"Checkpoint {checkpoint_path} does not exist")
    checkpoint = load_checkpoint(checkpoint_path)
    model = checkpoint.build_model()
    if args.occlusion is not None:
        occlusion = OcclusionMode.from_name(args.occlusion)
    else:
        occlusion = OcclusionMode(**checkpoint.preprocessing["occlusion"])

    if args.images:
        for path in args.images:
            if not path.is_file():
                raise FileNotFoundError(f"Image {path} does not exist")
        raw_images = [decode_image(path) for path in args.images]
    else:
        test = load_prepared(run, args.out).test
        raw_images = [test[idx].pixels for idx in range(min(args.n_images, len(test)))]
    if not raw_images:
        raise ConfigError("No images to explain")

    pipeline = ImagePipeline(occlusion, flip_augment=False, target_size=model.descriptor.input_size)
    images, heatmaps, labels = [], [], []
    for pixels in raw_images:
        image = pipeline(pixels)
        heatmap = grad_cam(model, torch.from_numpy(image), layer_index=args.layer_index)
        images.append(_display_image(image))
        heatmaps.append(heatmap)
        labels.append(heatmap.target_class)
    path = render_panel(images, heatmaps, labels, args.out / "explain" / "panel.png")
    print(f"Panel: {path}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    paths = args.reports or [args.out / "eval" / "results.csv"]
    rows: List[ResultRow] = []
    for path in paths:
        if not path.is_file():
            raise FileNotFoundError(f"Report {path} does not exist")
        rows += [row for row in read_report_csv(path) if not row.is_reference]
    table = render_results_table(rows, build_reference_rows())
    table.write(args.out / "report")
    print(table.text)
    return EXIT_OK


def _configured_seed() -> int:
    try:
        return int(gin.query_parameter("RunConfig.seed"))
    except ValueError:
        return 0


def run_command(args: argparse.Namespace) -> int:
    load_config(args.preset, args.config, args.binding)
    if args.command == "report":
        return cmd_report(args)
    if args.command == "prepare":
        seed = args.seed if args.seed is not None else _configured_seed()
        return cmd_prepare(args, seed)
    try:
        run = RunConfig()
    except TypeError as error:
        raise ConfigError(f"Incomplete run configuration (missing preset?): {error}") from error
    seed = args.seed if args.seed is not None else run.seed
    if args.command == "train":
        return cmd_train(args, run, seed)
    if args.command == "eval":
        return cmd_eval(args, run)
    return cmd_explain(args, run)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run_command(args)
    except INPUT_ERRORS as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except TrainingAbortedError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    except Exception as error:  # noqa: BLE001
        print(f"error: {type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
