import numpy as np
import pytest

from cmsent.data import LABELS
from cmsent.metrics import ConfusionMatrix, confusion, f1_report, format_report


def test_confusion_single_correct():
    cm = confusion(["positive"], ["positive"])
    assert cm.counts[2, 2] == 1
    assert cm.total == 1


def test_confusion_single_error():
    cm = confusion(["positive"], ["negative"])
    assert cm.counts[2, 0] == 1


def test_confusion_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        confusion(["positive"], [])


def test_confusion_empty():
    with pytest.raises(ValueError):
        confusion([], [])


def test_confusion_matrix_validation():
    with pytest.raises(ValueError):
        ConfusionMatrix(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        ConfusionMatrix(np.full((3, 3), -1))


def test_perfect_diagonal():
    report = f1_report(ConfusionMatrix(np.diag([5, 3, 2])))
    assert report["macro_f1"] == 1.0
    assert report["accuracy"] == 1.0


def test_worked_example_macro_seven_ninths():
    gold = ["positive", "positive", "negative", "neutral"]
    pred = ["positive", "negative", "negative", "neutral"]
    report = f1_report(confusion(gold, pred))
    assert report["per_class"]["negative"]["f1"] == pytest.approx(2 / 3)
    assert report["per_class"]["neutral"]["f1"] == pytest.approx(1.0)
    assert report["per_class"]["positive"]["f1"] == pytest.approx(2 / 3)
    assert report["macro_f1"] == pytest.approx(7 / 9)


def test_zero_support_class_scores_zero():
    # no neutral gold, no neutral predictions: F1 = 0 by the 0/0 convention
    gold = ["positive", "negative"]
    pred = ["positive", "negative"]
    report = f1_report(confusion(gold, pred))
    assert report["per_class"]["neutral"]["f1"] == 0.0
    assert report["macro_f1"] == pytest.approx(2 / 3)


def _brute_force(gold, pred):
    out = {}
    for label in LABELS:
        tp = sum(g == label and p == label for g, p in zip(gold, pred))
        fp = sum(g != label and p == label for g, p in zip(gold, pred))
        fn = sum(g == label and p != label for g, p in zip(gold, pred))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[label] = (precision, recall, f1, tp + fn)
    macro = sum(v[2] for v in out.values()) / 3
    total = len(gold)
    weighted = sum(v[2] * v[3] for v in out.values()) / total
    accuracy = sum(g == p for g, p in zip(gold, pred)) / total
    return out, macro, weighted, accuracy


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 40))
        gold = [LABELS[i] for i in rng.integers(0, 3, n)]
        pred = [LABELS[i] for i in rng.integers(0, 3, n)]
        report = f1_report(confusion(gold, pred))
        per_class, macro, weighted, accuracy = _brute_force(gold, pred)
        for label in LABELS:
            p, r, f1, support = per_class[label]
            row = report["per_class"][label]
            assert row["precision"] == pytest.approx(p)
            assert row["recall"] == pytest.approx(r)
            assert row["f1"] == pytest.approx(f1)
            assert row["support"] == support
        assert report["macro_f1"] == pytest.approx(macro)
        assert report["weighted_f1"] == pytest.approx(weighted)
        assert report["accuracy"] == pytest.approx(accuracy)


def test_format_report_structure():
    cm = confusion(["positive", "negative"], ["positive", "negative"])
    text = format_report(cm, f1_report(cm))
    lines = text.splitlines()
    assert lines[0].startswith("label")
    assert any(line.startswith("negative") for line in lines)
    assert any(line.startswith("macro_f1") for line in lines)
    assert any(line.startswith("accuracy") for line in lines)
