"""Confusion matrices and the multi-class metric suite built on them.

Conventions that matter for aggregate numbers:

* balanced accuracy and the macro averages are unweighted means over
  classes that actually have true samples (zero-support classes are
  reported per class, flagged, and excluded from the means);
* precision of a class nobody predicted is 0, flagged per class;
* weighted F1 is the support-weighted mean over all classes;
* Cohen's kappa is (p_o - p_e) / (1 - p_e), defined as 0 when p_e = 1.

Internal values are full precision; rounding to two decimals happens in
the reporting layer only.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .ingest import PredictionRecord


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square tally of true class (row) versus predicted class (column)."""

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    total: int

    def row_sum(self, i: int) -> int:
        return sum(self.counts[i])

    def col_sum(self, j: int) -> int:
        return sum(row[j] for row in self.counts)


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    support: int
    precision: float
    recall: float
    f1: float
    no_support: bool = False  # no true samples; recall reported as 0
    no_predictions: bool = False  # no predicted samples; precision reported as 0


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    balanced_accuracy: float
    macro_f1: float
    weighted_f1: float
    macro_precision: float
    macro_recall: float
    cohen_kappa: float
    per_class: tuple[ClassMetrics, ...]


def confusion_matrix(
    records: list[PredictionRecord], label_order: list[str] | None = None
) -> ConfusionMatrix:
    """Tally records into a confusion matrix.

    Without an explicit label_order the label set is the union of
    observed true and predicted labels, sorted lexicographically.
    """
    if label_order is not None:
        labels = list(label_order)
        if len(set(labels)) != len(labels):
            raise ValidationError("label_order contains duplicates")
    else:
        seen = {r.true_label for r in records} | {r.pred_label for r in records}
        labels = sorted(seen)
    index = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for r in records:
        if r.true_label not in index:
            raise ValidationError(f"label not in label_order: {r.true_label!r}")
        if r.pred_label not in index:
            raise ValidationError(f"label not in label_order: {r.pred_label!r}")
        counts[index[r.true_label]][index[r.pred_label]] += 1
    return ConfusionMatrix(
        labels=tuple(labels),
        counts=tuple(tuple(row) for row in counts),
        total=len(records),
    )


def merge_matrices(a: ConfusionMatrix, b: ConfusionMatrix) -> ConfusionMatrix:
    """Elementwise sum of two matrices over the same ordered label set."""
    if a.labels != b.labels:
        raise ValidationError("cannot merge matrices with different label sets")
    counts = tuple(
        tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a.counts, b.counts)
    )
    return ConfusionMatrix(labels=a.labels, counts=counts, total=a.total + b.total)


def summarize(cm: ConfusionMatrix) -> MetricsReport:
    """Compute the full metric suite from a non-empty confusion matrix."""
    if cm.total <= 0 or not cm.labels:
        raise ValidationError("cannot summarize an empty confusion matrix")
    n = len(cm.labels)
    row_sums = [cm.row_sum(i) for i in range(n)]
    col_sums = [cm.col_sum(j) for j in range(n)]
    total = cm.total

    per_class = []
    for i, label in enumerate(cm.labels):
        tp = cm.counts[i][i]
        support = row_sums[i]
        predicted = col_sums[i]
        recall = tp / support if support > 0 else 0.0
        precision = tp / predicted if predicted > 0 else 0.0
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append(
            ClassMetrics(
                label=label,
                support=support,
                precision=precision,
                recall=recall,
                f1=f1,
                no_support=support == 0,
                no_predictions=predicted == 0,
            )
        )

    supported = [c for c in per_class if not c.no_support]
    if not supported:
        raise ValidationError("confusion matrix has no class with true samples")
    n_sup = len(supported)
    accuracy = sum(cm.counts[i][i] for i in range(n)) / total
    macro_recall = sum(c.recall for c in supported) / n_sup
    macro_precision = sum(c.precision for c in supported) / n_sup
    macro_f1 = sum(c.f1 for c in supported) / n_sup
    weighted_f1 = sum(c.support * c.f1 for c in per_class) / total

    p_o = accuracy
    p_e = sum(r * c for r, c in zip(row_sums, col_sums)) / (total * total)
    kappa = 0.0 if p_e == 1.0 else (p_o - p_e) / (1.0 - p_e)

    return MetricsReport(
        accuracy=accuracy,
        balanced_accuracy=macro_recall,
        macro_f1=macro_f1,
        weighted_f1=weighted_f1,
        macro_precision=macro_precision,
        macro_recall=macro_recall,
        cohen_kappa=kappa,
        per_class=tuple(per_class),
    )


def report_as_dict(report: MetricsReport) -> dict:
    """JSON-ready view of a report; fractions stay full precision."""
    return {
        "accuracy": report.accuracy,
        "balanced_accuracy": report.balanced_accuracy,
        "macro_f1": report.macro_f1,
        "weighted_f1": report.weighted_f1,
        "macro_precision": report.macro_precision,
        "macro_recall": report.macro_recall,
        "cohen_kappa": report.cohen_kappa,
        "per_class": [
            {
                "label": c.label,
                "support": c.support,
                "precision": c.precision,
                "recall": c.recall,
                "f1": c.f1,
                "no_support": c.no_support,
                "no_predictions": c.no_predictions,
            }
            for c in report.per_class
        ],
    }
