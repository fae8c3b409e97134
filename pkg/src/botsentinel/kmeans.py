"""Two-cluster k-means (k-means++ seeding, Lloyd iterations) with label mapping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import INORGANIC, ORGANIC

MAX_ITER = 300


@dataclass(frozen=True)
class KMeansModel:
    centroids: np.ndarray
    cluster_to_label: Optional[tuple]  # None when fitted without labels
    objective: float
    iterations: int
    seed: int
    objective_trace: tuple = field(default=(), compare=False)

    @property
    def k(self) -> int:
        return len(self.centroids)

    def predict(self, X) -> list:
        return kmeans_predict(self, X)

    def to_dict(self) -> dict:
        return {
            "type": "kmeans",
            "centroids": self.centroids.tolist(),
            "cluster_to_label": None if self.cluster_to_label is None else list(self.cluster_to_label),
            "objective": self.objective,
            "iterations": self.iterations,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KMeansModel":
        mapping = d.get("cluster_to_label")
        return cls(
            np.array(d["centroids"], dtype=float),
            None if mapping is None else tuple(mapping),
            float(d["objective"]),
            int(d["iterations"]),
            int(d["seed"]),
        )


def _sq_dists(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def objective(X, centroids, assign) -> float:
    X = np.asarray(X, dtype=float)
    return float(((X - centroids[assign]) ** 2).sum())


def kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[rng.integers(n)]]
    for _ in range(1, k):
        d2 = _sq_dists(X, np.array(centers)).min(axis=1)
        total = d2.sum()
        idx = rng.integers(n) if total == 0 else rng.choice(n, p=d2 / total)
        centers.append(X[idx])
    return np.array(centers, dtype=float)


def lloyd(X, centroids, max_iter: int = MAX_ITER):
    """Alternate assignment and mean updates until the assignment is a fixpoint.

    Returns ``(centroids, assignment, trace, iterations)``; ``trace`` holds
    the objective after every update step.
    """
    X = np.asarray(X, dtype=float)
    c = np.array(centroids, dtype=float)
    k = len(c)
    assign = np.argmin(_sq_dists(X, c), axis=1)
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        for j in range(k):
            members = assign == j
            if not members.any():
                # steal the point that is worst served by its current centroid
                far = int(np.argmax(((X - c[assign]) ** 2).sum(axis=1)))
                assign[far] = j
        for j in range(k):
            c[j] = X[assign == j].mean(axis=0)
        trace.append(objective(X, c, assign))
        new = np.argmin(_sq_dists(X, c), axis=1)
        if np.array_equal(new, assign):
            break
        assign = new
    return c, assign, trace, it


def _majority_mapping(assign, labels, k: int) -> tuple:
    mapping = []
    for j in range(k):
        labs = [labels[i] for i in np.flatnonzero(assign == j)]
        n_org = sum(1 for lab in labs if lab == ORGANIC)
        n_inorg = sum(1 for lab in labs if lab == INORGANIC)
        mapping.append(ORGANIC if n_org >= n_inorg else INORGANIC)
    return tuple(mapping)


def kmeans_fit(
    X,
    labels: Optional[Sequence] = None,
    k: int = 2,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = MAX_ITER,
) -> KMeansModel:
    """Best-of-``restarts`` Lloyd runs, each seeded by k-means++.

    With ``labels`` each cluster takes the majority training label (ties go
    to organic); without them the model predicts raw cluster indices.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) < k:
        raise ValueError(f"need at least {k} rows to fit {k} clusters")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        c, assign, trace, it = lloyd(X, kmeans_plus_plus(X, k, rng), max_iter)
        j = objective(X, c, assign)
        if best is None or j < best[0]:
            best = (j, c, assign, trace, it)
    j, c, assign, trace, it = best
    mapping = None if labels is None else _majority_mapping(assign, list(labels), k)
    return KMeansModel(c, mapping, j, it, seed, tuple(trace))


def assign_clusters(model: KMeansModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.centroids.shape[1]:
        raise ValueError(f"expected {model.centroids.shape[1]} features, got {X.shape[1]}")
    return np.argmin(_sq_dists(X, model.centroids), axis=1)


def kmeans_predict(model: KMeansModel, X) -> list:
    """Nearest-centroid labels (lower cluster index wins ties)."""
    clusters = assign_clusters(model, X)
    if model.cluster_to_label is None:
        return [int(c) for c in clusters]
    return [model.cluster_to_label[c] for c in clusters]


def kmeans_score(model: KMeansModel, X, positive=ORGANIC) -> np.ndarray:
    """Ranking score for ``positive``: distance margin to the nearest positive centroid.

    Larger means closer to a centroid mapped to ``positive`` than to any
    other centroid.  Constant zero when no cluster maps to ``positive``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if model.cluster_to_label is None:
        raise ValueError("model has no label mapping")
    d = np.sqrt(_sq_dists(X, model.centroids))
    pos = np.array([lab == positive for lab in model.cluster_to_label])
    if pos.all() or not pos.any():
        return np.zeros(len(X))
    return d[:, ~pos].min(axis=1) - d[:, pos].min(axis=1)
