"""Soft-margin SVM trained by SMO, with Platt-scaled probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import INORGANIC, ORGANIC

SV_EPS = 1e-9


class ConvergenceError(RuntimeError):
    def __init__(self, iterations: int, gap: float):
        super().__init__(f"SMO did not converge after {iterations} iterations (gap {gap:.3g})")
        self.iterations = iterations
        self.gap = gap


def kernel_matrix(A, B, kernel: str, gamma: float = 1.0) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        d2 = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
        return np.exp(-gamma * np.maximum(d2, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    iterations: int
    gap: float


def dual_objective(alpha, y, K) -> float:
    """Dual objective to maximise: sum(alpha) - 1/2 alpha' Q alpha."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def smo(K, y, C: float = 1.0, tol: float = 1e-3, max_iter: Optional[int] = None) -> SmoResult:
    """Solve the soft-margin dual by SMO with maximal-violating-pair selection.

    ``K`` is the training kernel matrix and ``y`` holds +1/-1.  Stops when
    the KKT gap ``max_{I_up} -y g - min_{I_low} -y g`` drops below ``tol``.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if C <= 0:
        raise ValueError("C must be positive")
    if max_iter is None:
        max_iter = max(10 * n * n, 1000)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a
    Kdiag = np.diag(K)
    gap = math.inf
    it = 0
    while True:
        neg_yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        i = int(np.flatnonzero(up)[np.argmax(neg_yg[up])])
        j = int(np.flatnonzero(low)[np.argmin(neg_yg[low])])
        gap = neg_yg[i] - neg_yg[j]
        if gap < tol:
            break
        if it >= max_iter:
            raise ConvergenceError(it, gap)
        it += 1
        eta = max(Kdiag[i] + Kdiag[j] - 2.0 * K[i, j], 1e-12)
        # move along y_i e_i - y_j e_j, staying inside the box
        step = gap / eta
        step = min(step, C - alpha[i] if y[i] > 0 else alpha[i])
        step = min(step, alpha[j] if y[j] > 0 else C - alpha[j])
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        alpha[i] = min(max(alpha[i], 0.0), C)
        alpha[j] = min(max(alpha[j], 0.0), C)
        grad += step * (y * (K[:, i] - K[:, j]))

    neg_yg = -y * grad
    free = (alpha > SV_EPS) & (alpha < C - SV_EPS)
    if free.any():
        b = float(neg_yg[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = neg_yg[up].max() if up.any() else neg_yg[low].min()
        lo = neg_yg[low].min() if low.any() else hi
        b = float(0.5 * (hi + lo))
    return SmoResult(alpha, b, it, gap)


def kkt_violation(alpha, y, K, bias: float, C: float) -> float:
    """Largest pointwise KKT violation measured on the margin ``y f(x) - 1``."""
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    margin = y * (np.asarray(K) @ (alpha * y) + bias) - 1.0
    at_zero = alpha <= SV_EPS
    at_c = alpha >= C - SV_EPS
    free = ~(at_zero | at_c)
    v = np.zeros_like(margin)
    v[at_zero] = np.maximum(0.0, -margin[at_zero])
    v[at_c] = np.maximum(0.0, margin[at_c])
    v[free] = np.abs(margin[free])
    return float(v.max()) if len(v) else 0.0


def _sigmoid_fit(f, t_pos, max_iter: int = 100) -> tuple[float, float]:
    """Platt's regularised maximum likelihood fit of ``1 / (1 + exp(A f + B))``.

    Newton's method with backtracking, following Lin, Lin and Weng's
    numerically careful variant.
    """
    f = np.asarray(f, dtype=float)
    n_pos = int(np.sum(t_pos))
    n_neg = len(f) - n_pos
    hi, lo = (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0)
    t = np.where(t_pos, hi, lo)
    A, B = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))

    def loss(a, b):
        z = f * a + b
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)), (t - 1) * z + np.log1p(np.exp(z)))))

    fval = loss(A, B)
    sigma = 1e-12
    for _ in range(max_iter):
        z = f * A + B
        p = np.where(z >= 0, np.exp(-z) / (1 + np.exp(-z)), 1 / (1 + np.exp(z)))
        q = 1 - p
        d2 = p * q
        h11 = sigma + float(np.sum(f * f * d2))
        h22 = sigma + float(np.sum(d2))
        h21 = float(np.sum(f * d2))
        d1 = t - p
        g1, g2 = float(np.sum(f * d1)), float(np.sum(d1))
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= 1e-10:
            na, nb = A + step * dA, B + step * dB
            nf = loss(na, nb)
            if nf < fval + 1e-4 * step * gd:
                A, B, fval = na, nb, nf
                break
            step /= 2.0
        else:
            break
    return A, B


@dataclass(frozen=True)
class SvmModel:
    kernel: str
    gamma: float
    C: float
    support_vectors: np.ndarray
    dual_coeffs: np.ndarray  # alpha_i * y_i
    bias: float
    platt_a: float
    platt_b: float
    classes: tuple = (ORGANIC, INORGANIC)  # (positive, negative)

    @property
    def positive(self):
        return self.classes[0]

    def decision_function(self, X) -> np.ndarray:
        return svm_decision(self, X)

    def predict(self, X) -> list:
        return svm_predict(self, X)

    def predict_proba(self, X) -> np.ndarray:
        """Columns follow ``classes``: positive first."""
        p = svm_proba(self, X)
        return np.column_stack([p, 1.0 - p])

    def to_dict(self) -> dict:
        return {
            "type": "svm",
            "kernel": self.kernel,
            "gamma": self.gamma,
            "C": self.C,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coeffs": self.dual_coeffs.tolist(),
            "bias": self.bias,
            "platt": [self.platt_a, self.platt_b],
            "classes": list(self.classes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        sv = np.array(d["support_vectors"], dtype=float)
        return cls(
            d["kernel"],
            float(d["gamma"]),
            float(d["C"]),
            sv.reshape(len(d["dual_coeffs"]), -1) if sv.size else sv.reshape(0, 0),
            np.array(d["dual_coeffs"], dtype=float),
            float(d["bias"]),
            float(d["platt"][0]),
            float(d["platt"][1]),
            tuple(d["classes"]),
        )


def _encode(labels, positive) -> np.ndarray:
    return np.array([1.0 if lab == positive else -1.0 for lab in labels])


def default_gamma(X) -> float:
    X = np.asarray(X, dtype=float)
    v = float(X.var(axis=0).mean())
    return 1.0 / (X.shape[1] * v) if v > 0 else 1.0


def _fit_core(X, y, C, kernel, gamma, tol):
    K = kernel_matrix(X, X, kernel, gamma)
    res = smo(K, y, C, tol)
    sv = res.alpha > SV_EPS
    return X[sv], (res.alpha * y)[sv], res.bias, res, K


def _folds(y, n_folds, rng) -> list:
    """Stratified fold ids."""
    fold = np.empty(len(y), dtype=int)
    for cls in (1.0, -1.0):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        fold[idx] = np.arange(len(idx)) % n_folds
    return fold


def svm_fit(
    X,
    labels: Sequence,
    C: float = 1.0,
    kernel: str = "rbf",
    gamma: Optional[float] = None,
    seed: int = 0,
    tol: float = 1e-3,
    platt_folds: int = 5,
    classes: tuple = (ORGANIC, INORGANIC),
) -> SvmModel:
    """Train the SVM and its probability map.

    Platt parameters are fitted on out-of-fold decision values from a
    stratified ``platt_folds``-fold split of the training rows; with too few
    examples per class the in-sample decision values are used instead.
    """
    X = np.asarray(X, dtype=float)
    labels = list(labels)
    if X.ndim != 2 or len(X) != len(labels):
        raise ValueError("X must be 2-D with one label per row")
    unknown = set(labels) - set(classes)
    if unknown:
        raise ValueError(f"labels outside {classes}: {sorted(map(str, unknown))}")
    y = _encode(labels, classes[0])
    if len(set(y)) < 2:
        raise ValueError("SVM training needs both classes present")
    if gamma is None:
        gamma = default_gamma(X) if kernel == "rbf" else 0.0

    sv, coef, b, _, _ = _fit_core(X, y, C, kernel, gamma, tol)

    n_folds = min(platt_folds, int(np.sum(y > 0)), int(np.sum(y < 0)))
    if n_folds >= 2:
        fold = _folds(y, n_folds, np.random.default_rng(seed))
        f = np.empty(len(y))
        for k in range(n_folds):
            tr, te = fold != k, fold == k
            ytr = y[tr]
            if len(set(ytr)) < 2:
                f[te] = b
                continue
            s, c, bb, _, _ = _fit_core(X[tr], ytr, C, kernel, gamma, tol)
            f[te] = kernel_matrix(X[te], s, kernel, gamma) @ c + bb
    else:
        f = kernel_matrix(X, sv, kernel, gamma) @ coef + b
    A, B = _sigmoid_fit(f, y > 0)
    # keep the probability map strictly increasing in the decision value
    A = min(A, -1e-6)
    return SvmModel(kernel, float(gamma), float(C), sv, coef, b, A, B, tuple(classes))


def _rows(model: SvmModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = model.support_vectors.shape[1] if model.support_vectors.size else X.shape[1]
    if X.shape[1] != d:
        raise ValueError(f"expected {d} features, got {X.shape[1]}")
    return X


def svm_decision(model: SvmModel, X) -> np.ndarray:
    X = _rows(model, X)
    if not model.support_vectors.size:
        return np.full(len(X), model.bias)
    return kernel_matrix(X, model.support_vectors, model.kernel, model.gamma) @ model.dual_coeffs + model.bias


def svm_predict(model: SvmModel, X) -> list:
    """Positive class where the decision value is >= 0."""
    pos, neg = model.classes
    return [pos if f >= 0 else neg for f in svm_decision(model, X)]


def svm_proba(model: SvmModel, X) -> np.ndarray:
    """Platt probability of the positive class."""
    z = model.platt_a * svm_decision(model, X) + model.platt_b
    return np.where(z >= 0, np.exp(-np.abs(z)) / (1 + np.exp(-np.abs(z))), 1 / (1 + np.exp(-np.abs(z))))
