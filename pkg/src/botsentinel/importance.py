"""Leave-one-feature-out accuracy scores."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

# trainer(X, labels, seed) -> object with .predict(X) returning labels
Trainer = Callable[[np.ndarray, Sequence, int], object]


@dataclass
class ImportanceReport:
    baseline_accuracy: float
    per_feature: dict  # name -> (accuracy_without, accuracy_score)
    degenerate: bool

    def ranked(self) -> list:
        """Features by accuracy score, highest first; equal scores keep column order."""
        return sorted(self.per_feature.items(), key=lambda kv: -kv[1][1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["feature_name", "accuracy_without", "accuracy_score"])
        for name, (acc, score) in self.ranked():
            w.writerow([name, repr(float(acc)), repr(float(score))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "baseline_accuracy": self.baseline_accuracy,
            "degenerate": self.degenerate,
            "features": [
                {"feature_name": n, "accuracy_without": a, "accuracy_score": s} for n, (a, s) in self.ranked()
            ],
        }


def _accuracy(model, X, labels) -> float:
    pred = model.predict(X)
    return float(np.mean([p == t for p, t in zip(pred, labels)]))


def accuracy_scores(
    trainer: Trainer,
    X,
    labels: Sequence,
    eval_rows,
    eval_labels: Sequence,
    seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
) -> ImportanceReport:
    """Share of the total accuracy drop attributable to each feature.

    ``AS_i = 100 * (acc - acc_i) / sum_j (acc - acc_j)`` where ``acc_i`` is
    held-out accuracy after retraining without column ``i``.  If the total
    drop is not positive the report is flagged degenerate and carries the
    raw drops instead.
    """
    X = np.asarray(X, dtype=float)
    E = np.asarray(eval_rows, dtype=float)
    d = X.shape[1]
    if d < 2:
        raise ValueError("leave-one-feature-out needs at least 2 features")
    names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(d)]
    if len(names) != d:
        raise ValueError("feature_names length does not match columns")
    labels, eval_labels = list(labels), list(eval_labels)

    base = _accuracy(trainer(X, labels, seed), E, eval_labels)
    without = []
    for j in range(d):
        keep = [k for k in range(d) if k != j]
        without.append(_accuracy(trainer(X[:, keep], labels, seed), E[:, keep], eval_labels))
    drops = np.array([base - a for a in without])
    total = float(drops.sum())
    degenerate = total <= 0
    scores = drops if degenerate else 100.0 * drops / total
    per = {n: (float(a), float(s)) for n, a, s in zip(names, without, scores)}
    return ImportanceReport(base, per, degenerate)
