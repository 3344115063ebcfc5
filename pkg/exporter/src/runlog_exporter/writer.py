"""Per-fold run writer for the evaluation harness's on-disk formats.

One ``RunWriter`` handles one fold of one run. The caller logs an epoch
row after every validation pass and then submits that epoch's
predictions; the writer keeps only the prediction set belonging to the
best-validation-accuracy epoch seen so far (ties keep the earlier
epoch). ``close()`` materializes

    <run_dir>/fold_<i>/epochs.csv
    <run_dir>/fold_<i>/predictions.jsonl
    <run_dir>/meta.json

atomically: everything goes to temp files first, and on any failure the
temps and any files already moved into place are removed again.

The writer only records; it never computes metrics.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

META_KEYS = (
    "model",
    "strategy",
    "category",
    "total_params_m",
    "train_params_m",
    "epoch_time_s",
)


class ExporterError(Exception):
    """Misuse of the writer or an unwritable target."""


def _check_label(value, what):
    if not isinstance(value, str) or not value:
        raise ExporterError(f"{what} must be a non-empty string, got {value!r}")
    if value != value.strip():
        raise ExporterError(
            f"{what} {value!r} has surrounding whitespace; the harness would "
            "strip it on read, breaking the exact round trip"
        )


class RunWriter:
    """Buffers one fold's epoch rows and best-epoch predictions."""

    def __init__(self, run_dir, fold_index: int, meta: dict):
        if fold_index < 0:
            raise ExporterError(f"fold_index must be >= 0, got {fold_index}")
        missing = [key for key in META_KEYS if key not in meta]
        if missing:
            raise ExporterError(f"meta is missing keys: {', '.join(missing)}")
        for key in ("total_params_m", "train_params_m", "epoch_time_s"):
            if float(meta[key]) < 0:
                raise ExporterError(f"meta[{key!r}] must be non-negative")
        if float(meta["train_params_m"]) > float(meta["total_params_m"]):
            raise ExporterError("meta train_params_m exceeds total_params_m")
        self.run_dir = Path(run_dir)
        self.fold_index = fold_index
        self._meta = {key: meta[key] for key in META_KEYS}
        self._epoch_rows: list[tuple[int, float, dict]] = []
        self._extra_names: tuple[str, ...] | None = None
        self._best_accuracy: float | None = None
        self._best_records: list[tuple[str, str, str]] | None = None
        self._capture_pending = False
        self._closed = False

    # -- recording --------------------------------------------------------

    def log_epoch(self, epoch: int, val_accuracy: float, extras: dict | None = None):
        """Append one epoch row; arms prediction capture on a new best."""
        self._require_open()
        if self._epoch_rows and epoch <= self._epoch_rows[-1][0]:
            raise ExporterError(
                f"epoch {epoch} is not greater than the last logged "
                f"epoch {self._epoch_rows[-1][0]}"
            )
        if epoch < 0:
            raise ExporterError(f"epoch must be non-negative, got {epoch}")
        if not 0.0 <= val_accuracy <= 1.0:
            raise ExporterError(f"val_accuracy {val_accuracy} outside [0, 1]")
        extras = dict(extras or {})
        names = tuple(extras)
        for name in names:
            if not name or any(ch in name for ch in ',"\r\n'):
                raise ExporterError(f"extra column name {name!r} is not CSV-safe")
        if self._extra_names is None:
            self._extra_names = names
        elif names != self._extra_names:
            raise ExporterError(
                f"extra columns changed: expected {self._extra_names}, got {names}"
            )
        self._epoch_rows.append((epoch, val_accuracy, extras))
        if self._best_accuracy is None or val_accuracy > self._best_accuracy:
            self._best_accuracy = val_accuracy
            self._capture_pending = True

    def submit_predictions(self, records):
        """Offer the latest epoch's predictions as (sample_id, true, pred).

        Kept only if the latest logged epoch set a new best accuracy;
        otherwise the call is a no-op.
        """
        self._require_open()
        if not self._epoch_rows:
            raise ExporterError("submit_predictions called before any log_epoch")
        if not self._capture_pending:
            return
        staged = []
        seen = set()
        for sample_id, true_label, pred_label in records:
            _check_label(sample_id, "sample_id")
            _check_label(true_label, "true label")
            _check_label(pred_label, "pred label")
            if sample_id in seen:
                raise ExporterError(f"duplicate sample_id {sample_id!r}")
            seen.add(sample_id)
            staged.append((sample_id, true_label, pred_label))
        if not staged:
            raise ExporterError("prediction set must not be empty")
        self._best_records = staged
        self._capture_pending = False

    # -- finalization ------------------------------------------------------

    def close(self):
        """Write all three files; the writer cannot be used afterwards."""
        self._require_open()
        if not self._epoch_rows:
            raise ExporterError("close called with no epochs logged")
        if self._capture_pending:
            raise ExporterError(
                "best epoch has no predictions: submit_predictions was not "
                "called after the last improvement"
            )
        if self._best_records is None:
            raise ExporterError("no prediction set was ever submitted")
        self._closed = True
        fold_dir = self.run_dir / f"fold_{self.fold_index}"
        fold_dir.mkdir(parents=True, exist_ok=True)

        targets = {
            fold_dir / "epochs.csv": self._render_epochs(),
            fold_dir / "predictions.jsonl": self._render_predictions(),
            self.run_dir / "meta.json": self._render_meta(),
        }
        temps = []
        placed = []
        try:
            for path, text in targets.items():
                tmp = path.with_name(path.name + ".tmp")
                tmp.write_text(text, encoding="utf-8")
                temps.append(tmp)
            for tmp, path in zip(list(temps), targets):
                os.replace(tmp, path)
                temps.remove(tmp)
                placed.append(path)
        except BaseException:
            for leftover in temps + placed:
                try:
                    leftover.unlink()
                except OSError:
                    pass
            raise

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        return False

    # -- rendering ---------------------------------------------------------

    def _require_open(self):
        if self._closed:
            raise ExporterError("writer is already closed")

    def _render_epochs(self) -> str:
        header = ["epoch", "val_accuracy", *(self._extra_names or ())]
        lines = [",".join(header)]
        for epoch, acc, extras in self._epoch_rows:
            cells = [str(epoch), repr(acc)]
            cells += [repr(float(extras[name])) for name in self._extra_names or ()]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def _render_predictions(self) -> str:
        lines = [
            json.dumps(
                {"sample_id": s, "true": t, "pred": p}, ensure_ascii=False
            )
            for s, t, p in self._best_records
        ]
        return "\n".join(lines) + "\n"

    def _render_meta(self) -> str:
        return json.dumps(self._meta, ensure_ascii=False, indent=2) + "\n"
