"""Classification reports built on scikit-learn's metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from ..errors import DimensionError


@dataclass
class EvalReport:
    classes: list
    class_names: list
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    confusion: np.ndarray  # rows: true class, columns: predicted class

    def to_dict(self):
        return {
            "classes": [int(c) if isinstance(c, (int, np.integer)) else c for c in self.classes],
            "class_names": list(self.class_names),
            "accuracy": self.accuracy,
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
            "support": self.support.tolist(),
            "confusion": self.confusion.tolist(),
        }


def evaluate(predictions, labels, class_names=None, classes=None):
    """Accuracy, per-class precision/recall/F1 and the confusion matrix.

    ``classes`` fixes the row/column order; by default the sorted union of
    labels and predictions. Classes absent from both score 0.
    """
    pred = np.asarray(predictions)
    true = np.asarray(labels)
    if pred.shape != true.shape or pred.ndim != 1:
        raise DimensionError("predictions and labels must be 1-D arrays of equal length")
    if len(true) == 0:
        raise DimensionError("nothing to evaluate")
    classes = list(np.unique(np.concatenate([true, pred]))) if classes is None else list(classes)
    names = [str(c) for c in classes] if class_names is None else list(class_names)
    if len(names) != len(classes):
        raise DimensionError("need one class name per class")
    cm = confusion_matrix(true, pred, labels=classes)
    p, r, f, s = precision_recall_fscore_support(true, pred, labels=classes, zero_division=0)
    acc = float(np.trace(cm) / cm.sum())
    return EvalReport(classes, names, acc, p, r, f, s, cm)
