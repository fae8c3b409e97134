"""Confusion-matrix statistics, ROC curve and AUC for binary predictions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .corpus import INORGANIC, ORGANIC

TABLE1_FIELDS = (
    "accuracy",
    "accuracy_ci_low",
    "accuracy_ci_high",
    "nir",
    "acc_vs_nir_pvalue",
    "kappa",
    "mcnemar_pvalue",
    "sensitivity",
    "specificity",
    "ppv",
    "npv",
    "prevalence",
    "detection_rate",
    "detection_prevalence",
    "balanced_accuracy",
)


@dataclass
class EvalReport:
    confusion: list  # rows = predicted (positive, negative), cols = actual
    classes: tuple
    accuracy: float
    accuracy_ci_low: float
    accuracy_ci_high: float
    nir: float
    acc_vs_nir_pvalue: float
    kappa: float
    mcnemar_pvalue: float
    sensitivity: float
    specificity: float
    ppv: float
    npv: float
    prevalence: float
    detection_rate: float
    detection_prevalence: float
    balanced_accuracy: float
    f_score: float
    roc_points: Optional[list] = None
    auc: Optional[float] = None
    roc_defined: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classes"] = list(self.classes)
        d["positive_class"] = self.classes[0]
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
        return d


def _div(a: float, b: float) -> float:
    return a / b if b else math.nan


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    a = (1 - level) / 2
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a, k + 1, n - k))
    return lo, hi


def mcnemar_exact(b: int, c: int) -> float:
    """Two-sided exact binomial McNemar test on the discordant counts."""
    if b + c == 0:
        return 1.0
    return min(1.0, 2.0 * float(stats.binom.cdf(min(b, c), b + c, 0.5)))


def confusion_statistics(confusion) -> dict:
    """All Table-1 style statistics from a 2x2 matrix.

    ``confusion[0]`` is the predicted-positive row and ``confusion[:, 0]``
    the actual-positive column.
    """
    (tp, fp), (fn, tn) = np.asarray(confusion, dtype=int).tolist()
    n = tp + fp + fn + tn
    if n == 0:
        raise ValueError("empty confusion matrix")
    correct = tp + tn
    acc = correct / n
    lo, hi = clopper_pearson(correct, n)
    prevalence = (tp + fn) / n
    nir = max(prevalence, 1 - prevalence)
    p_nir = float(stats.binom.sf(correct - 1, n, nir))
    pred_pos = (tp + fp) / n
    p_e = prevalence * pred_pos + (1 - prevalence) * (1 - pred_pos)
    kappa = _div(acc - p_e, 1 - p_e)
    sens = _div(tp, tp + fn)
    spec = _div(tn, tn + fp)
    ppv = _div(tp, tp + fp)
    npv = _div(tn, tn + fn)
    f = _div(2 * ppv * sens, ppv + sens) if not (math.isnan(ppv) or math.isnan(sens)) else math.nan
    return {
        "accuracy": acc,
        "accuracy_ci_low": lo,
        "accuracy_ci_high": hi,
        "nir": nir,
        "acc_vs_nir_pvalue": p_nir,
        "kappa": kappa,
        "mcnemar_pvalue": mcnemar_exact(fp, fn),
        "sensitivity": sens,
        "specificity": spec,
        "ppv": ppv,
        "npv": npv,
        "prevalence": prevalence,
        "detection_rate": tp / n,
        "detection_prevalence": pred_pos,
        "balanced_accuracy": (sens + spec) / 2,
        "f_score": f,
    }


def roc_curve(scores, is_positive) -> list:
    """(fpr, tpr) points from sweeping the threshold down through the scores."""
    scores = np.asarray(scores, dtype=float)
    pos = np.asarray(is_positive, dtype=bool)
    P, N = int(pos.sum()), int((~pos).sum())
    order = np.argsort(-scores, kind="stable")
    s, lab = scores[order], pos[order]
    tps = np.cumsum(lab)
    fps = np.cumsum(~lab)
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]  # end of each tie block
    pts = [(0.0, 0.0)]
    pts += [(float(fps[i] / N), float(tps[i] / P)) for i in last]
    return pts


def auc_rank(scores, is_positive) -> float:
    """Mann-Whitney AUC with mid-ranks for ties."""
    scores = np.asarray(scores, dtype=float)
    pos = np.asarray(is_positive, dtype=bool)
    P, N = int(pos.sum()), int((~pos).sum())
    ranks = stats.rankdata(scores)
    return float((ranks[pos].sum() - P * (P + 1) / 2) / (P * N))


def evaluate(
    predicted: Sequence,
    scores: Optional[Sequence[float]],
    truth: Sequence,
    positive_class=ORGANIC,
    classes: Optional[tuple] = None,
) -> EvalReport:
    """Score predictions against the truth.

    ``scores`` rank how strongly each row belongs to ``positive_class``;
    pass ``None`` to skip the ROC curve.
    """
    predicted, truth = list(predicted), list(truth)
    if len(predicted) != len(truth) or not truth:
        raise ValueError("predicted and truth must have equal nonzero length")
    if classes is None:
        negative = INORGANIC if positive_class == ORGANIC else ORGANIC
        others = {lab for lab in truth + predicted if lab != positive_class}
        if len(others) == 1:
            negative = others.pop()
        elif len(others) > 1:
            raise ValueError("evaluate handles binary labels only")
        classes = (positive_class, negative)
    pp = np.array([p == positive_class for p in predicted])
    tp_mask = np.array([t == positive_class for t in truth])
    confusion = [
        [int(np.sum(pp & tp_mask)), int(np.sum(pp & ~tp_mask))],
        [int(np.sum(~pp & tp_mask)), int(np.sum(~pp & ~tp_mask))],
    ]
    st = confusion_statistics(confusion)
    roc, auc, defined = None, None, True
    if scores is not None:
        if len(scores) != len(truth):
            raise ValueError("scores length does not match truth")
        if tp_mask.all() or not tp_mask.any():
            defined = False
        else:
            roc = roc_curve(scores, tp_mask)
            auc = auc_rank(scores, tp_mask)
    return EvalReport(confusion=confusion, classes=tuple(classes), roc_points=roc, auc=auc,
                      roc_defined=defined, **st)
