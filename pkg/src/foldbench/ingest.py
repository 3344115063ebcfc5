"""Parsers for per-fold experiment artifacts and the directory scanner.

Expected layout under an experiment root:

    <root>/<model>/meta.json
    <root>/<model>/fold_<i>/predictions.jsonl
    <root>/<model>/fold_<i>/epochs.csv        (optional)

predictions.jsonl holds one JSON object per line with keys
``sample_id``, ``true`` and ``pred``; it carries the predictions made at
the fold's best-validation-accuracy epoch. epochs.csv needs ``epoch``
and ``val_accuracy`` columns; any extra columns are kept as numbers.
"""

from __future__ import annotations

import csv
import io
import json
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import HarnessWarning, ParseError, ValidationError

_FOLD_DIR = re.compile(r"^fold_(\d+)$")

PREDICTIONS_FILENAME = "predictions.jsonl"
EPOCHS_FILENAME = "epochs.csv"
META_FILENAME = "meta.json"


@dataclass(frozen=True)
class PredictionRecord:
    """One sample's ground truth and prediction at the reported epoch."""

    sample_id: str
    true_label: str
    pred_label: str


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    val_accuracy: float
    extra: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class RunMeta:
    model_name: str
    strategy: str
    category: str
    total_params_millions: float
    trainable_params_millions: float
    epoch_time_seconds: float


@dataclass
class FoldRun:
    fold_index: int
    predictions: list[PredictionRecord]
    epochs: list[EpochMetrics] = field(default_factory=list)


@dataclass
class ModelRun:
    meta: RunMeta
    folds: list[FoldRun]


@dataclass
class ExperimentIndex:
    dataset_name: str
    runs: list[ModelRun]


def _as_text(data) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    if isinstance(data, str):
        return data
    raw = data.read()
    return raw.decode("utf-8") if isinstance(raw, bytes) else raw


def parse_prediction_file(data, source: str = "predictions") -> list[PredictionRecord]:
    """Parse JSONL prediction records, preserving file order.

    Blank lines are skipped. A malformed line raises ParseError with its
    line number; a repeated sample_id raises ValidationError naming it.
    """
    text = _as_text(data)
    records: list[PredictionRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", source=source, line=lineno) from exc
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", source=source, line=lineno)
        try:
            sample_id = obj["sample_id"]
            true_label = obj["true"]
            pred_label = obj["pred"]
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", source=source, line=lineno) from exc
        if not all(isinstance(v, str) for v in (sample_id, true_label, pred_label)):
            raise ParseError("sample_id, true and pred must be strings", source=source, line=lineno)
        sample_id = sample_id.strip()
        true_label = true_label.strip()
        pred_label = pred_label.strip()
        if not sample_id or not true_label or not pred_label:
            raise ParseError("empty sample_id or label", source=source, line=lineno)
        if sample_id in seen:
            raise ValidationError(f"duplicate sample_id: {sample_id!r}")
        seen.add(sample_id)
        records.append(PredictionRecord(sample_id, true_label, pred_label))
    return records


def serialize_prediction_records(records: list[PredictionRecord]) -> str:
    """Render records back to JSONL with canonical field order."""
    lines = [
        json.dumps(
            {"sample_id": r.sample_id, "true": r.true_label, "pred": r.pred_label},
            ensure_ascii=False,
        )
        for r in records
    ]
    return "".join(line + "\n" for line in lines)


def parse_epoch_log(data, source: str = "epochs") -> list[EpochMetrics]:
    """Parse an epochs.csv log: epoch, val_accuracy, extras pass through."""
    text = _as_text(data)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ParseError("missing CSV header", source=source, line=1)
    fields = [f.strip() for f in reader.fieldnames]
    for required in ("epoch", "val_accuracy"):
        if required not in fields:
            raise ParseError(f"missing required column {required!r}", source=source, line=1)
    extras = [f for f in fields if f not in ("epoch", "val_accuracy")]
    entries: list[EpochMetrics] = []
    last_epoch = None
    for lineno, row in enumerate(reader, start=2):
        row = {(k.strip() if k else k): v for k, v in row.items()}
        try:
            epoch = int(row["epoch"])
            val_accuracy = float(row["val_accuracy"])
            extra = tuple((name, float(row[name])) for name in extras)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad numeric value ({exc})", source=source, line=lineno) from exc
        if epoch < 0:
            raise ValidationError(f"{source}: line {lineno}: negative epoch {epoch}")
        if not 0.0 <= val_accuracy <= 1.0:
            raise ValidationError(
                f"{source}: line {lineno}: val_accuracy {val_accuracy} outside [0, 1]"
            )
        if last_epoch is not None and epoch <= last_epoch:
            raise ValidationError(
                f"{source}: line {lineno}: epochs must be strictly increasing"
            )
        last_epoch = epoch
        entries.append(EpochMetrics(epoch=epoch, val_accuracy=val_accuracy, extra=extra))
    return entries


def parse_run_meta(data, source: str = "meta") -> RunMeta:
    """Parse meta.json into a RunMeta, enforcing the parameter-count bound."""
    text = _as_text(data)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", source=source, line=exc.lineno) from exc
    if not isinstance(obj, dict):
        raise ParseError("meta must be a JSON object", source=source)
    try:
        meta = RunMeta(
            model_name=str(obj["model"]),
            strategy=str(obj["strategy"]),
            category=str(obj["category"]),
            total_params_millions=float(obj["total_params_m"]),
            trainable_params_millions=float(obj["train_params_m"]),
            epoch_time_seconds=float(obj["epoch_time_s"]),
        )
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}", source=source) from exc
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad field value ({exc})", source=source) from exc
    for name in ("total_params_millions", "trainable_params_millions", "epoch_time_seconds"):
        if getattr(meta, name) < 0:
            raise ValidationError(f"{source}: {name} must be non-negative")
    if meta.trainable_params_millions > meta.total_params_millions:
        raise ValidationError(
            f"{source}: trainable params ({meta.trainable_params_millions}) exceed "
            f"total params ({meta.total_params_millions})"
        )
    return meta


def select_best_epoch(log: list[EpochMetrics]) -> int:
    """Epoch with the highest val_accuracy; ties go to the earliest epoch."""
    if not log:
        raise ValidationError("cannot select the best epoch of an empty log")
    best = None
    for entry in sorted(log, key=lambda e: e.epoch):
        if best is None or entry.val_accuracy > best.val_accuracy:
            best = entry
    return best.epoch


def scan_experiment_dir(root: Path | str) -> ExperimentIndex:
    """Build an in-memory index of every run under an experiment root.

    One run per direct subdirectory; folds sorted by index. A fold
    without predictions.jsonl is an error; a missing epochs.csv is
    tolerated (best-epoch selection is simply unavailable).
    """
    root = Path(root)
    if not root.is_dir():
        raise ValidationError(f"experiment root does not exist: {root}")
    model_dirs = sorted(d for d in root.iterdir() if d.is_dir())
    if not model_dirs:
        warnings.warn(f"no model directories under {root}", HarnessWarning, stacklevel=2)
    runs: list[ModelRun] = []
    for model_dir in model_dirs:
        meta_path = model_dir / META_FILENAME
        try:
            meta = parse_run_meta(meta_path.read_text(encoding="utf-8"), source=str(meta_path))
        except OSError as exc:
            raise ValidationError(f"unreadable meta for run {model_dir.name}: {exc}") from exc
        folds: list[FoldRun] = []
        indices: set[int] = set()
        for sub in sorted(model_dir.iterdir()):
            if not sub.is_dir():
                continue
            match = _FOLD_DIR.match(sub.name)
            if not match:
                continue
            fold_index = int(match.group(1))
            if fold_index in indices:
                raise ValidationError(f"duplicate fold index {fold_index} in {model_dir}")
            indices.add(fold_index)
            pred_path = sub / PREDICTIONS_FILENAME
            if not pred_path.is_file():
                raise ValidationError(f"missing predictions file: {pred_path}")
            predictions = parse_prediction_file(
                pred_path.read_text(encoding="utf-8"), source=str(pred_path)
            )
            epochs_path = sub / EPOCHS_FILENAME
            epochs: list[EpochMetrics] = []
            if epochs_path.is_file():
                epochs = parse_epoch_log(
                    epochs_path.read_text(encoding="utf-8"), source=str(epochs_path)
                )
            folds.append(FoldRun(fold_index=fold_index, predictions=predictions, epochs=epochs))
        if not folds:
            raise ValidationError(f"run {model_dir.name} has no fold_<i> directories")
        folds.sort(key=lambda f: f.fold_index)
        runs.append(ModelRun(meta=meta, folds=folds))
    return ExperimentIndex(dataset_name=root.name, runs=runs)
