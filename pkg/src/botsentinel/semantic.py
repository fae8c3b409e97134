"""Semantic features computed from tweet texts."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .corpus import CorpusError, UserHistory

TOP_K = 5

_URL = re.compile(r"https?://\S+", re.IGNORECASE)
_HASHTAG = re.compile(r"#(\w+)")
_WORD = re.compile(r"[^\W_]+")

BUNDLED_LEXICONS = ("afinn_demo", "bing_demo", "nrc_demo")


@dataclass(frozen=True)
class TokenizedTweet:
    words: tuple[str, ...]
    hashtags: tuple[str, ...]


@dataclass(frozen=True)
class SentimentLexicon:
    name: str
    scores: Mapping[str, float] = field(repr=False)

    def __post_init__(self):
        clean = {}
        for word, score in dict(self.scores).items():
            score = float(score)
            if not np.isfinite(score):
                raise ValueError(f"lexicon {self.name}: non-finite score for {word!r}")
            clean[word.lower()] = score
        object.__setattr__(self, "scores", MappingProxyType(clean))

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class SemanticFeatures:
    lexical_diversity: float
    unique_words: int
    mean_words: float
    var_words: float
    hashtag_freq: float
    rho: tuple[float, ...]
    sentiment: tuple[float, ...]


def load_lexicon(path, name: str | None = None) -> SentimentLexicon:
    """Read a ``word<TAB>score`` file; ``#`` lines are comments."""
    from pathlib import Path

    path = Path(path)
    scores = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                word, score = line.split("\t")
                scores[word.strip()] = float(score)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'word<TAB>score'") from None
    return SentimentLexicon(name or path.stem, scores)


def bundled_lexicons() -> tuple[SentimentLexicon, ...]:
    """The three small demonstration lexicons shipped with the package."""
    root = resources.files("botsentinel") / "data"
    out = []
    for name in BUNDLED_LEXICONS:
        with resources.as_file(root / f"{name}.tsv") as p:
            out.append(load_lexicon(p, name))
    return tuple(out)


def tokenize(text: str) -> TokenizedTweet:
    """Split a tweet into lowercase words and hashtags.

    URLs are dropped first, then ``#tag`` runs are pulled out, and the
    remaining letter/digit runs become words.
    """
    text = _URL.sub(" ", text)
    hashtags = tuple(_HASHTAG.findall(text))
    rest = _HASHTAG.sub(" ", text).lower()
    return TokenizedTweet(tuple(_WORD.findall(rest)), hashtags)


def _tokens(history: UserHistory) -> list[TokenizedTweet]:
    if len(history) == 0:
        raise CorpusError(f"{history.user_id}: empty history")
    return [tokenize(t) for t in history.texts]


def _word_counter(tokens: Sequence[TokenizedTweet]) -> Counter:
    c = Counter()
    for tok in tokens:
        c.update(tok.words)
    return c


def _diversity(counter: Counter, user_id: str) -> tuple[float, int]:
    total = sum(counter.values())
    if total == 0:
        raise CorpusError(f"{user_id}: no words in any tweet")
    return len(counter) / total, len(counter)


def _word_stats(tokens) -> tuple[float, float]:
    lengths = np.array([len(t.words) for t in tokens], dtype=float)
    return float(lengths.mean()), float(lengths.var())


def _top_freqs(counter: Counter, k: int, user_id: str) -> tuple[float, ...]:
    total = sum(counter.values())
    if total == 0:
        raise CorpusError(f"{user_id}: no words in any tweet")
    top = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    freqs = [n / total for _, n in top]
    return tuple(freqs + [0.0] * (k - len(freqs)))


def _sentiment(counter: Counter, n_tweets: int, lexicons) -> tuple[float, ...]:
    out = []
    for lex in lexicons:
        if len(lex) == 0:
            raise ValueError(f"lexicon {lex.name!r} has no entries")
        # sum over tweets of per-tweet sums equals the sum over the word counts
        total = sum(n * lex.scores.get(w, 0.0) for w, n in counter.items())
        out.append(total / n_tweets)
    return tuple(out)


def lexical_diversity(history: UserHistory) -> tuple[float, int]:
    """Unique words over total words, and the unique-word count."""
    return _diversity(_word_counter(_tokens(history)), history.user_id)


def word_stats(history: UserHistory) -> tuple[float, float]:
    """Mean and population variance of words per tweet."""
    return _word_stats(_tokens(history))


def hashtag_frequency(history: UserHistory) -> float:
    tokens = _tokens(history)
    return sum(len(t.hashtags) for t in tokens) / len(tokens)


def top_word_frequencies(history: UserHistory, k: int = TOP_K) -> tuple[float, ...]:
    """Relative frequencies of the k most used words, zero padded.

    Equal counts are ordered alphabetically, which only matters for which
    word is reported, not for the values.
    """
    return _top_freqs(_word_counter(_tokens(history)), k, history.user_id)


def sentiment_scores(history: UserHistory, lexicons: Sequence[SentimentLexicon]) -> tuple[float, ...]:
    """Average per-tweet lexicon score, one value per lexicon.

    Words missing from a lexicon score 0.
    """
    return _sentiment(_word_counter(_tokens(history)), len(history), lexicons)


def semantic_features(
    history: UserHistory, lexicons: Sequence[SentimentLexicon], k: int = TOP_K
) -> SemanticFeatures:
    tokens = _tokens(history)
    counter = _word_counter(tokens)
    div, unique = _diversity(counter, history.user_id)
    mean_w, var_w = _word_stats(tokens)
    return SemanticFeatures(
        lexical_diversity=div,
        unique_words=unique,
        mean_words=mean_w,
        var_words=var_w,
        hashtag_freq=sum(len(t.hashtags) for t in tokens) / len(tokens),
        rho=_top_freqs(counter, k, history.user_id),
        sentiment=_sentiment(counter, len(tokens), lexicons),
    )
