"""Top-1 accuracy, per-class and macro precision/recall, confusion matrix."""

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import UsageError


@dataclass
class MetricsReport:
    top1_accuracy: float
    macro_precision: float
    macro_recall: float
    per_class_precision: list
    per_class_recall: list
    confusion_matrix: list  # rows = true class, columns = predicted
    class_names: list
    loss: float
    num_samples: int

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def confusion_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true\\pred"] + list(self.class_names))
        for name, row in zip(self.class_names, self.confusion_matrix):
            w.writerow([name] + list(row))
        return buf.getvalue()

    def write(self, json_path, csv_path):
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.confusion_csv())


def confusion_matrix(y_true, y_pred, num_classes):
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true, dtype=np.int64), np.asarray(y_pred, dtype=np.int64)), 1)
    return cm


def compute_metrics(y_true, y_pred, class_names, loss=float("nan")):
    """Percentages throughout; a class never predicted gets precision 0."""
    y_true = np.asarray(y_true)
    if y_true.size == 0:
        raise UsageError("cannot compute metrics on an empty split")
    k = len(class_names)
    cm = confusion_matrix(y_true, y_pred, k)
    tp = np.diag(cm).astype(np.float64)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros(k), where=predicted > 0) * 100
    recall = np.divide(tp, actual, out=np.zeros(k), where=actual > 0) * 100
    present = actual > 0
    return MetricsReport(
        top1_accuracy=float(tp.sum() / cm.sum() * 100),
        macro_precision=float(precision[present].mean()),
        macro_recall=float(recall[present].mean()),
        per_class_precision=[float(v) for v in precision],
        per_class_recall=[float(v) for v in recall],
        confusion_matrix=cm.tolist(),
        class_names=list(class_names),
        loss=float(loss),
        num_samples=int(cm.sum()),
    )
