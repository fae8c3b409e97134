"""Feature matrix assembly, standardisation and VIF-based pruning."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .semantic import SemanticFeatures
from .temporal import TemporalFeatures

TEMPORAL_NAMES = (
    "periodicity",
    "loglik",
    "sumsq_ar",
    "error_var",
    "fit_length",
    "n_local_maxima",
    "secondary_power_ratio",
)
SEMANTIC_NAMES = (
    "lexical_diversity",
    "mean_words",
    "var_words",
    "hashtag_freq",
    "rho1",
    "rho2",
    "rho3",
    "rho4",
    "rho5",
    "sent_afinn",
    "sent_bing",
    "sent_nrc",
)
FEATURE_NAMES = TEMPORAL_NAMES + SEMANTIC_NAMES

DEFAULT_VIF_THRESHOLD = 5.0
_R2_EXACT = 1.0 - 1e-12


@dataclass(frozen=True)
class FeatureMatrix:
    user_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    values: np.ndarray
    labels: Optional[tuple] = None
    means: Optional[np.ndarray] = None
    sds: Optional[np.ndarray] = None
    constant: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            values = values.reshape(len(self.user_ids), len(self.feature_names))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "user_ids", tuple(self.user_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        if values.shape != (len(self.user_ids), len(self.feature_names)):
            raise ValueError(f"values shape {values.shape} does not match ids/names")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature matrix contains non-finite values")
        if self.labels is not None and len(self.labels) != len(self.user_ids):
            raise ValueError("labels length does not match rows")
        unknown = set(self.feature_names) - set(FEATURE_NAMES)
        if unknown:
            raise ValueError(f"unknown feature names {sorted(unknown)}")

    @property
    def standardized(self) -> bool:
        return self.means is not None

    def rows(self, ids: Sequence[str]) -> "FeatureMatrix":
        """Sub-matrix for the given user ids, in matrix order."""
        wanted = set(ids)
        idx = [i for i, u in enumerate(self.user_ids) if u in wanted]
        if len(idx) != len(wanted):
            raise KeyError(f"unknown user ids: {sorted(wanted - set(self.user_ids))[:5]}")
        return replace(
            self,
            user_ids=[self.user_ids[i] for i in idx],
            values=self.values[idx],
            labels=None if self.labels is None else [self.labels[i] for i in idx],
        )

    def columns(self, names: Sequence[str]) -> "FeatureMatrix":
        """Sub-matrix for the given feature names, kept in canonical order."""
        missing = set(names) - set(self.feature_names)
        if missing:
            raise KeyError(f"unknown features {sorted(missing)}")
        keep = [j for j, n in enumerate(self.feature_names) if n in set(names)]
        return replace(
            self,
            feature_names=[self.feature_names[j] for j in keep],
            values=self.values[:, keep],
            means=None if self.means is None else self.means[keep],
            sds=None if self.sds is None else self.sds[keep],
            constant=tuple(c for c in self.constant if c in set(names)),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["user_id", *self.feature_names, "label"])
        labels = self.labels or [None] * len(self.user_ids)
        for uid, row, lab in zip(self.user_ids, self.values, labels):
            w.writerow([uid, *(repr(float(v)) for v in row), "" if lab is None else lab])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FeatureMatrix":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header[0] != "user_id" or header[-1] != "label":
            raise ValueError("feature CSV must start with user_id and end with label")
        names = header[1:-1]
        ids, vals, labels = [], [], []
        for rec in reader:
            ids.append(rec[0])
            vals.append([float(v) for v in rec[1:-1]])
            labels.append(rec[-1] or None)
        has_labels = any(lab is not None for lab in labels)
        return cls(ids, names, np.array(vals, dtype=float).reshape(len(ids), len(names)),
                   labels if has_labels else None)


@dataclass
class VifReport:
    elimination_trace: list = field(default_factory=list)  # (name, vif at removal)
    retained: tuple[str, ...] = ()
    final_vifs: dict = field(default_factory=dict)
    threshold: float = DEFAULT_VIF_THRESHOLD
    unresolvable: bool = False

    def to_dict(self) -> dict:
        def num(v):
            return None if not math.isfinite(v) else v

        return {
            "threshold": self.threshold,
            "elimination_trace": [{"feature": n, "vif": num(v)} for n, v in self.elimination_trace],
            "retained": list(self.retained),
            "n_retained": len(self.retained),
            "final_vifs": {k: num(v) for k, v in self.final_vifs.items()},
            "unresolvable": self.unresolvable,
        }


def feature_row(temporal: TemporalFeatures, semantic: SemanticFeatures) -> list[float]:
    if len(semantic.rho) != 5 or len(semantic.sentiment) != 3:
        raise ValueError("expected 5 top-word frequencies and 3 sentiment scores")
    return [
        temporal.periodicity,
        temporal.loglik,
        temporal.sumsq_ar,
        temporal.error_var,
        float(temporal.fit_length),
        float(temporal.n_local_maxima),
        temporal.secondary_power_ratio,
        semantic.lexical_diversity,
        semantic.mean_words,
        semantic.var_words,
        semantic.hashtag_freq,
        *semantic.rho,
        *semantic.sentiment,
    ]


def assemble_matrix(
    temporal: Mapping[str, TemporalFeatures],
    semantic: Mapping[str, SemanticFeatures],
    labels: Optional[Mapping[str, Optional[str]]] = None,
) -> FeatureMatrix:
    """Stack per-user features into the canonical 19-column matrix (rows sorted by id)."""
    if set(temporal) != set(semantic):
        only_t = sorted(set(temporal) - set(semantic))
        only_s = sorted(set(semantic) - set(temporal))
        raise ValueError(f"user sets differ: temporal-only {only_t}, semantic-only {only_s}")
    ids = sorted(temporal)
    values = np.array([feature_row(temporal[u], semantic[u]) for u in ids], dtype=float)
    labs = None
    if labels is not None and any(labels.get(u) is not None for u in ids):
        labs = [labels.get(u) for u in ids]
    return FeatureMatrix(ids, FEATURE_NAMES, values.reshape(len(ids), len(FEATURE_NAMES)), labs)


def standardize(matrix: FeatureMatrix, reference: Optional[FeatureMatrix] = None) -> FeatureMatrix:
    """Z-score columns with population statistics.

    Statistics come from ``matrix`` itself, or from ``reference`` (a matrix
    already standardised on the training rows) so that calibration and test
    rows are transformed identically.  Zero-variance columns become zeros
    and are listed in ``constant``.
    """
    if reference is not None:
        if not reference.standardized:
            raise ValueError("reference matrix carries no standardisation statistics")
        if reference.feature_names != matrix.feature_names:
            raise ValueError("feature names differ from the reference matrix")
        means, sds = reference.means, reference.sds
    else:
        if matrix.values.shape[0] < 2:
            raise ValueError("standardisation needs at least 2 rows")
        means = matrix.values.mean(axis=0)
        sds = matrix.values.std(axis=0)
        # float noise on a constant column must not turn into unit variance
        sds = np.where(sds <= 1e-12 * np.maximum(1.0, np.abs(means)), 0.0, sds)
    safe = np.where(sds > 0, sds, 1.0)
    z = np.where(sds > 0, (matrix.values - means) / safe, 0.0)
    constant = tuple(n for n, s in zip(matrix.feature_names, sds) if s == 0)
    return replace(matrix, values=z, means=np.array(means), sds=np.array(sds), constant=constant)


def _as_array(matrix) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(matrix, FeatureMatrix):
        return matrix.values, matrix.feature_names
    x = np.asarray(matrix, dtype=float)
    return x, tuple(f"x{j}" for j in range(x.shape[1]))


def vif(matrix, names: Optional[Sequence[str]] = None) -> dict:
    """Variance inflation factor of each column.

    Each column is regressed by least squares on the others plus an
    intercept; ``VIF = 1 / (1 - R^2)``.  Exact linear dependence yields
    ``inf``.
    """
    x, default_names = _as_array(matrix)
    names = tuple(names) if names is not None else default_names
    n, d = x.shape
    if n <= d:
        raise ValueError(f"VIF needs more rows than columns ({n} <= {d})")
    out = {}
    ones = np.ones((n, 1))
    for j in range(d):
        target = x[:, j]
        tss = float(np.sum((target - target.mean()) ** 2))
        if tss <= 1e-24 * max(1.0, float(np.sum(target**2))):
            raise ValueError(f"column {names[j]!r} is constant; VIF undefined")
        design = np.hstack([ones, np.delete(x, j, axis=1)])
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        resid = target - design @ coef
        r2 = 1.0 - float(resid @ resid) / tss
        out[names[j]] = math.inf if r2 >= _R2_EXACT else 1.0 / (1.0 - r2)
    return out


def select_by_vif(matrix, threshold: float = DEFAULT_VIF_THRESHOLD,
                  names: Optional[Sequence[str]] = None) -> VifReport:
    """Greedy backward elimination of the largest VIF until all are below ``threshold``.

    Constant columns are dropped first (recorded with VIF ``inf``).  Ties
    remove the column that comes first in the matrix.
    """
    x, default_names = _as_array(matrix)
    names = list(names) if names is not None else list(default_names)
    report = VifReport(threshold=threshold)
    keep = []
    for j, name in enumerate(names):
        col = x[:, j]
        if np.ptp(col) == 0:
            report.elimination_trace.append((name, math.inf))
        else:
            keep.append(j)
    while True:
        if len(keep) == 1:
            report.final_vifs = {names[keep[0]]: 1.0}
            break
        if not keep:
            report.unresolvable = True
            break
        vifs = vif(x[:, keep], [names[j] for j in keep])
        values = [vifs[names[j]] for j in keep]
        worst = int(np.argmax(values))  # first index on ties
        if values[worst] < threshold:
            report.final_vifs = vifs
            break
        report.elimination_trace.append((names[keep[worst]], values[worst]))
        del keep[worst]
    report.retained = tuple(names[j] for j in keep)
    return report
