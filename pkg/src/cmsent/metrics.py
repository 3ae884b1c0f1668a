"""Three-class classification metrics: confusion matrix and F1 variants."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LABELS, Label

_N_CLASSES = len(LABELS)


@dataclass
class ConfusionMatrix:
    """3x3 counts; rows are gold labels, columns predictions.

    Class order is (negative, neutral, positive).
    """

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (_N_CLASSES, _N_CLASSES):
            raise ValueError("confusion matrix must be 3x3")
        if (self.counts < 0).any():
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(gold: list[Label], pred: list[Label]) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted")
    if not gold:
        raise ValueError("cannot build a confusion matrix from zero examples")
    counts = np.zeros((_N_CLASSES, _N_CLASSES), dtype=np.int64)
    for g, p in zip(gold, pred):
        counts[LABELS.index(g), LABELS.index(p)] += 1
    return ConfusionMatrix(counts)


def f1_report(cm: ConfusionMatrix) -> dict:
    """Per-class precision/recall/F1 plus macro and support-weighted F1.

    Zero-division convention: 0/0 -> 0 for precision, recall, and F1.
    """
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    pred_totals = counts.sum(axis=0)
    gold_totals = counts.sum(axis=1)

    def _safe(num, den):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)

    precision = _safe(tp, pred_totals)
    recall = _safe(tp, gold_totals)
    f1 = _safe(2 * precision * recall, precision + recall)
    support = gold_totals
    weighted = float((f1 * support).sum() / support.sum())
    per_class = {
        label: {
            "precision": float(precision[i]),
            "recall": float(recall[i]),
            "f1": float(f1[i]),
            "support": int(support[i]),
        }
        for i, label in enumerate(LABELS)
    }
    return {
        "per_class": per_class,
        "macro_f1": float(f1.mean()),
        "weighted_f1": weighted,
        "accuracy": float(tp.sum() / counts.sum()),
        "total": cm.total,
    }


def format_report(cm: ConfusionMatrix, report: dict) -> str:
    """Fixed-width human-readable table of the report."""
    lines = ["label      precision  recall     f1         support"]
    for label in LABELS:
        row = report["per_class"][label]
        lines.append(
            f"{label:<10} {row['precision']:<10.4f} {row['recall']:<10.4f} "
            f"{row['f1']:<10.4f} {row['support']}"
        )
    lines.append(f"macro_f1   {report['macro_f1']:.4f}")
    lines.append(f"weighted_f1 {report['weighted_f1']:.4f}")
    lines.append(f"accuracy   {report['accuracy']:.4f}")
    return "\n".join(lines)
