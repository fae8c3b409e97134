"""Corpus-level feature extraction and classifier trainers."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corpus import DEFAULT_BIN_WIDTH, CorpusError, UserHistory
from .kmeans import kmeans_fit
from .selection import FeatureMatrix, assemble_matrix
from .semantic import SentimentLexicon, bundled_lexicons, semantic_features
from .svm import svm_fit
from .temporal import temporal_features

logger = logging.getLogger(__name__)


@dataclass
class Extraction:
    matrix: FeatureMatrix
    excluded: list = field(default_factory=list)  # (user_id, reason)
    unique_words: dict = field(default_factory=dict)


def extract_features(
    histories: Sequence[UserHistory],
    lexicons: Optional[Sequence[SentimentLexicon]] = None,
    bin_width: int = DEFAULT_BIN_WIDTH,
) -> Extraction:
    """Feature matrix for every usable user; the rest are listed with a reason."""
    lexicons = bundled_lexicons() if lexicons is None else tuple(lexicons)
    if len(lexicons) != 3:
        raise ValueError("exactly three sentiment lexicons are required")
    temporal, semantic, labels, excluded = {}, {}, {}, []
    for h in histories:
        try:
            t = temporal_features(h, bin_width)
            s = semantic_features(h, lexicons)
        except CorpusError as exc:
            excluded.append((h.user_id, str(exc)))
            continue
        temporal[h.user_id], semantic[h.user_id], labels[h.user_id] = t, s, h.label
    if excluded:
        logger.info("excluded %d users from the feature matrix", len(excluded))
    if not temporal:
        raise CorpusError("no user had enough history for feature extraction")
    matrix = assemble_matrix(temporal, semantic, labels)
    return Extraction(matrix, excluded, {u: s.unique_words for u, s in semantic.items()})


def svm_trainer(C: float = 1.0, kernel: str = "rbf", gamma: Optional[float] = None):
    def train(X, labels, seed):
        return svm_fit(X, labels, C=C, kernel=kernel, gamma=gamma, seed=seed)

    return train


def kmeans_trainer(restarts: int = 10):
    def train(X, labels, seed):
        return kmeans_fit(X, labels, k=2, seed=seed, restarts=restarts)

    return train
