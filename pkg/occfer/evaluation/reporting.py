import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import gin
import pandas as pd

from occfer.api.emotions import EMOTION_NAMES

from .metrics import EvalReport

FACE_MODE_DISPLAY_NAMES = {"full_faces": "full faces", "lower_half": "lower-half faces"}
REPORT_COLUMNS = ("model", "train_set", "test_set", "dataset", "accuracy", "n", "is_reference")


@dataclass(frozen=True)
class ResultRow:
    """
    One accuracy value of the results table, either computed or a static reference.
    """

    model: str
    train_set: str
    test_set: str
    dataset: str
    accuracy: float | None
    n: int | None = None
    is_reference: bool = False

    @classmethod
    def from_report(cls, report: EvalReport) -> "ResultRow":
        return cls(
            model=report.model_name,
            train_set=report.train_set,
            test_set=report.test_set,
            dataset=report.dataset,
            accuracy=report.accuracy,
            n=report.n,
        )


@dataclass(frozen=True)
class ReferenceRow:
    """
    A published result shown for reference. It is never recomputed.

    Attributes:
        model: the model name.
        train_set: the face mode of the training set.
        test_set: the face mode of the test set.
        accuracies: accuracy (in [0, 1]) per dataset name, None when not reported.
    """

    model: str
    train_set: str
    test_set: str
    accuracies: Tuple[Tuple[str, float | None], ...]

    def result_rows(self) -> List[ResultRow]:
        return [
            ResultRow(self.model, self.train_set, self.test_set, dataset, accuracy, None, True)
            for dataset, accuracy in self.accuracies
        ]


@gin.configurable()
def build_reference_rows(
    rows: Sequence[Tuple[str, str, str, Dict[str, float | None]]] = ()
) -> List[ReferenceRow]:
    """
    Build the reference rows from `(model, train_set, test_set, {dataset: accuracy})` tuples (see
    configs/reference_rows.gin).
    """
    return [
        ReferenceRow(model, train_set, test_set, tuple(accuracies.items()))
        for model, train_set, test_set, accuracies in rows
    ]


@dataclass(frozen=True)
class ResultsTable:
    """
    Attributes:
        rows: the long-format rows (one per model, face modes and dataset).
        frame: the wide table, one column per dataset, accuracies formatted as percentages.
        text: the plain-text rendering of `frame`.
    """

    rows: Tuple[ResultRow, ...]
    frame: pd.DataFrame
    text: str

    def to_csv(self, path: str | Path):
        write_report_csv(self.rows, path)

    def write(self, out_dir: str | Path, name: str = "results"):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{name}.txt").write_text(self.text + "\n")
        self.to_csv(out_dir / f"{name}.csv")


def _format_accuracy(accuracy: float | None) -> str:
    if accuracy is None or math.isnan(accuracy):
        return "-"
    return f"{accuracy * 100:.2f}%"


def render_results_table(
    reports: Sequence[EvalReport | ResultRow],
    references: Sequence[ReferenceRow] = (),
) -> ResultsTable:
    """
    Lay out the results the way the published accuracy table does: one line per (model, train set, test set) and
    one column per dataset. Reference rows come first and are flagged.
    """
    rows: List[ResultRow] = [row for reference in references for row in reference.result_rows()]
    rows += [r if isinstance(r, ResultRow) else ResultRow.from_report(r) for r in reports]

    datasets = list(dict.fromkeys(row.dataset for row in rows))
    groups: Dict[Tuple[str, str, str, bool], Dict[str, float | None]] = {}
    for row in rows:
        key = (row.model, row.train_set, row.test_set, row.is_reference)
        groups.setdefault(key, {})[row.dataset] = row.accuracy

    columns = ["Model", "Train set", "Test set", *datasets, "Reference"]
    records = []
    for (model, train_set, test_set, is_reference), accuracies in groups.items():
        records.append(
            [
                model,
                FACE_MODE_DISPLAY_NAMES.get(train_set, train_set),
                FACE_MODE_DISPLAY_NAMES.get(test_set, test_set),
                *(_format_accuracy(accuracies.get(dataset)) for dataset in datasets),
                "yes" if is_reference else "",
            ]
        )
    frame = pd.DataFrame(records, columns=columns)
    text = frame.to_string(index=False) if records else "  ".join(columns)
    return ResultsTable(rows=tuple(rows), frame=frame, text=text)


def write_report_csv(rows: Sequence[EvalReport | ResultRow], path: str | Path):
    rows = [r if isinstance(r, ResultRow) else ResultRow.from_report(r) for r in rows]
    frame = pd.DataFrame(
        [
            {
                "model": row.model,
                "train_set": row.train_set,
                "test_set": row.test_set,
                "dataset": row.dataset,
                "accuracy": row.accuracy,
                "n": row.n,
                "is_reference": row.is_reference,
            }
            for row in rows
        ],
        columns=list(REPORT_COLUMNS),
    )
    frame["n"] = frame["n"].astype("Int64")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)


def read_report_csv(path: str | Path) -> List[ResultRow]:
    frame = pd.read_csv(path, dtype={"model": str, "dataset": str}, keep_default_na=False)
    missing = set(REPORT_COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"{path}: missing report columns {sorted(missing)}")
    rows = []
    for record in frame.to_dict(orient="records"):
        accuracy = record["accuracy"]
        n = record["n"]
        is_reference = record["is_reference"]
        rows.append(
            ResultRow(
                model=record["model"],
                train_set=record["train_set"],
                test_set=record["test_set"],
                dataset=record["dataset"],
                accuracy=None if accuracy == "" else float(accuracy),
                n=None if n == "" else int(n),
                is_reference=str(is_reference).lower() == "true",
            )
        )
    return rows


def write_confusion_csv(report: EvalReport, path: str | Path):
    frame = pd.DataFrame(report.confusion, index=list(EMOTION_NAMES), columns=list(EMOTION_NAMES))
    frame.index.name = "true/predicted"
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path)
