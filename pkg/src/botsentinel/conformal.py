"""Split conformal prediction for binary classifiers.

The classifier is only touched through ``model.classes`` and
``model.predict_proba(X)``, whose columns follow ``model.classes``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

DEFAULT_ALPHA = 0.1
N_PVALUE_BINS = 10


@dataclass(frozen=True)
class ConformalCalibration:
    scores: np.ndarray  # sorted ascending
    alpha: float
    label_space: tuple

    def __post_init__(self):
        s = np.sort(np.asarray(self.scores, dtype=float))
        if len(s) == 0:
            raise ValueError("calibration set is empty")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "label_space", tuple(self.label_space))

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class PredictionSet:
    p_values: Mapping
    members: tuple
    alpha: float

    @property
    def size(self) -> int:
        return len(self.members)

    def __contains__(self, label) -> bool:
        return label in self.members


@dataclass
class CoverageReport:
    empirical_coverage: float
    mean_set_size: float
    size_histogram: dict
    pvalue_histogram: list
    pvalue_bin_edges: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "empirical_coverage": self.empirical_coverage,
            "mean_set_size": self.mean_set_size,
            "size_histogram": {str(k): v for k, v in self.size_histogram.items()},
            "pvalue_histogram": list(self.pvalue_histogram),
            "pvalue_bin_edges": list(self.pvalue_bin_edges),
        }


def nonconformity(proba):
    """``1 - P(label | x)``; works elementwise on arrays."""
    p = np.asarray(proba, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    out = 1.0 - p
    return float(out) if out.ndim == 0 else out


def _label_column(model, label) -> int:
    try:
        return list(model.classes).index(label)
    except ValueError:
        raise ValueError(f"label {label!r} not in model classes {model.classes}") from None


def calibrate(model, rows, labels: Sequence, alpha: float = DEFAULT_ALPHA) -> ConformalCalibration:
    """Nonconformity of each calibration example's true label.

    The calibration rows must not have been used to train ``model``.
    """
    labels = list(labels)
    if len(labels) == 0:
        raise ValueError("calibration set is empty")
    proba = np.asarray(model.predict_proba(rows))
    if proba.shape[0] != len(labels):
        raise ValueError("rows and labels differ in length")
    cols = [_label_column(model, lab) for lab in labels]
    true_p = proba[np.arange(len(labels)), cols]
    return ConformalCalibration(nonconformity(np.atleast_1d(true_p)), alpha, tuple(model.classes))


def p_value(test_score, calib: ConformalCalibration):
    """``(#{calibration scores >= test_score} + 1) / (n + 1)``; elementwise on arrays."""
    s = np.asarray(test_score, dtype=float)
    n = len(calib.scores)
    at_least = n - np.searchsorted(calib.scores, s, side="left")
    out = (at_least + 1) / (n + 1)
    return float(out) if out.ndim == 0 else out


def prediction_sets(model, rows, calib: ConformalCalibration, alpha: float | None = None) -> list:
    alpha = calib.alpha if alpha is None else alpha
    proba = np.atleast_2d(np.asarray(model.predict_proba(rows)))
    classes = list(model.classes)
    pv = np.column_stack([p_value(nonconformity(proba[:, k]), calib) for k in range(len(classes))])
    out = []
    for row in pv:
        pvals = {lab: float(v) for lab, v in zip(classes, row)}
        members = tuple(lab for lab in classes if pvals[lab] > alpha)
        out.append(PredictionSet(pvals, members, alpha))
    return out


def prediction_set(model, row, calib: ConformalCalibration, alpha: float | None = None) -> PredictionSet:
    return prediction_sets(model, np.atleast_2d(row), calib, alpha)[0]


def forced_label(pset: PredictionSet, positive=None):
    """Single label with the largest p-value; ties go to ``positive``."""
    labels = list(pset.p_values)
    if positive is None:
        positive = labels[0]
    best = max(pset.p_values.values())
    tied = [lab for lab in labels if pset.p_values[lab] == best]
    return positive if positive in tied else tied[0]


def coverage_report(sets: Sequence[PredictionSet], truths: Sequence, n_bins: int = N_PVALUE_BINS) -> CoverageReport:
    sets, truths = list(sets), list(truths)
    if len(sets) != len(truths):
        raise ValueError("sets and truths differ in length")
    if not sets:
        raise ValueError("no prediction sets")
    covered = [t in s for s, t in zip(sets, truths)]
    sizes = [s.size for s in sets]
    size_hist = {k: sizes.count(k) for k in (0, 1, 2)}
    true_p = [s.p_values[t] for s, t in zip(sets, truths)]
    hist, edges = np.histogram(true_p, bins=n_bins, range=(0.0, 1.0))
    return CoverageReport(
        empirical_coverage=float(np.mean(covered)),
        mean_set_size=float(np.mean(sizes)),
        size_histogram=size_hist,
        pvalue_histogram=[int(h) for h in hist],
        pvalue_bin_edges=[float(e) for e in edges],
    )


def uniformity_chi2(histogram: Sequence[int], level: float = 0.01) -> tuple[float, float]:
    """Pearson chi-square statistic against equal bin counts, and its critical value."""
    h = np.asarray(histogram, dtype=float)
    expected = h.sum() / len(h)
    stat = float(np.sum((h - expected) ** 2 / expected))
    return stat, float(stats.chi2.ppf(1 - level, len(h) - 1))
