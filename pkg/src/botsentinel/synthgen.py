"""Seeded generator of synthetic organic and inorganic tweet histories.

Organic accounts post as an inhomogeneous Poisson process with a daily
(sometimes twice-daily) intensity cycle and draw words from a large
Zipf-distributed vocabulary.  Inorganic accounts post on a fixed schedule
with small jitter and recycle a handful of keyword templates with heavy
hashtag use.  Every user gets an independent random stream derived from
``(seed, kind, index)``, so generation order does not matter.
"""

from __future__ import annotations

import configparser
import io
import itertools
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from .corpus import INORGANIC, ORGANIC, UserHistory

EPOCH_START = 1672531200  # 2023-01-01T00:00:00Z
DAY = 86400
BIN_SECONDS = 10800

_SYLLABLES = ("ba", "ke", "lo", "mi", "nu", "ra", "so", "ti", "ve", "zo",
              "da", "fe", "gi", "ho", "ju", "ka", "le", "mo", "ni", "pu")
POSITIVE_WORDS = ("good", "great", "love", "happy", "nice", "fun", "thanks", "awesome", "enjoy", "hope")
NEGATIVE_WORDS = ("bad", "hate", "sad", "terrible", "worst", "angry", "pain", "fail", "tired", "wrong")
BOT_KEYWORDS = ("deal", "free", "win", "buy", "now", "click", "offer", "today", "best", "price",
                "limited", "follow", "retweet", "link", "bonus", "crypto", "giveaway", "join",
                "exclusive", "sale", "cash", "prize", "hot", "new", "vip", "code", "promo", "earn",
                "fast", "online")


@dataclass(frozen=True)
class GeneratorProfile:
    """Distributional knobs for one account type.

    Timing uses ``cycle_bins``/``half_day_share``/``peak_trough_ratio`` and
    ``tweets_per_day`` for organic users, ``interval_seconds`` and
    ``jitter_sd`` for inorganic ones.  Text uses ``vocabulary_size`` and
    ``zipf_exponent`` (organic) or ``pool_size`` templates (inorganic).
    """

    kind: str
    n_tweets_mean: int
    n_tweets_spread: float = 0.3
    # organic timing
    tweets_per_day: float = 9.0
    cycle_bins: int = 8
    half_day_share: float = 0.25
    peak_trough_ratio: float = 8.0
    # inorganic timing
    interval_seconds: float = 7200.0
    jitter_sd: float = 60.0
    # text
    words_per_tweet: float = 12.0
    vocabulary_size: int = 4000
    zipf_exponent: float = 1.0
    pool_size: int = 12
    hashtag_rate: float = 0.3
    hashtag_pool: int = 400
    sentiment_rate: float = 0.3
    sentiment_bias: float = 0.0
    url_rate: float = 0.1

    def __post_init__(self):
        if self.kind not in (ORGANIC, INORGANIC):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, float)) and v < 0:
                raise ValueError(f"{f.name} must be nonnegative")
        if not -1 <= self.sentiment_bias <= 1:
            raise ValueError("sentiment_bias must lie in [-1, 1]")
        if self.kind == INORGANIC and not 1 <= self.pool_size <= 20:
            raise ValueError("inorganic pool_size must lie in [1, 20]")


def organic_profile(**overrides) -> GeneratorProfile:
    base = GeneratorProfile(kind=ORGANIC, n_tweets_mean=3121)
    return replace(base, **overrides)


def inorganic_profile(**overrides) -> GeneratorProfile:
    base = GeneratorProfile(
        kind=INORGANIC,
        n_tweets_mean=2598,
        words_per_tweet=8.0,
        vocabulary_size=len(BOT_KEYWORDS),
        pool_size=12,
        hashtag_rate=2.0,
        hashtag_pool=6,
        sentiment_rate=0.5,
        sentiment_bias=0.8,
        url_rate=0.7,
    )
    return replace(base, **overrides)


def default_profiles() -> dict:
    return {ORGANIC: organic_profile(), INORGANIC: inorganic_profile()}


def profiles_to_config(profiles: dict) -> str:
    """Render profiles as a commented INI-style key = value file."""
    cp = configparser.ConfigParser()
    for kind in (ORGANIC, INORGANIC):
        d = asdict(profiles[kind])
        d.pop("kind")
        cp[kind] = {k: repr(v) for k, v in d.items()}
    buf = io.StringIO()
    buf.write("# Synthetic corpus generator profiles.\n# One section per account type; unspecified keys keep their defaults.\n\n")
    cp.write(buf)
    return buf.getvalue()


def load_profiles(path) -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    out = default_profiles()
    types = {f.name: f.type for f in fields(GeneratorProfile)}
    for kind in (ORGANIC, INORGANIC):
        if not cp.has_section(kind):
            continue
        kw = {}
        for key, raw in cp[kind].items():
            if key not in types or key == "kind":
                raise ValueError(f"[{kind}] unknown profile key {key!r}")
            kw[key] = int(float(raw)) if types[key] in ("int", int) else float(raw)
        out[kind] = replace(out[kind], **kw)
    return out


@lru_cache(maxsize=None)
def _vocabulary(size: int) -> np.ndarray:
    words = []
    for n_syl in itertools.count(2):
        for combo in itertools.product(_SYLLABLES, repeat=n_syl):
            words.append("".join(combo))
            if len(words) == size:
                return np.array(words, dtype=object)
    raise AssertionError("unreachable")


def _zipf_probs(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def _n_tweets(prof: GeneratorProfile, rng, scale: float) -> int:
    mean = prof.n_tweets_mean * scale
    lo, hi = mean * (1 - prof.n_tweets_spread), mean * (1 + prof.n_tweets_spread)
    return max(20, int(round(rng.uniform(lo, hi))))


def _organic_times(prof, n, rng) -> np.ndarray:
    bins = 4 if rng.random() < prof.half_day_share else prof.cycle_bins
    period = bins * BIN_SECONDS
    a = (prof.peak_trough_ratio - 1) / (prof.peak_trough_ratio + 1)
    rate = prof.tweets_per_day * rng.lognormal(0.0, 0.3)
    span = n / rate * DAY
    phase = rng.uniform(0, period)
    out = np.empty(0)
    # thinning: accept uniform proposals with probability intensity / max intensity
    while len(out) < n:
        t = rng.uniform(0, span, size=2 * n)
        keep = rng.random(2 * n) < (1 + a * np.cos(2 * np.pi * (t - phase) / period)) / (1 + a)
        out = np.concatenate([out, t[keep]])
    return np.sort(out[:n])


def _inorganic_times(prof, n, rng) -> np.ndarray:
    gaps = np.maximum(1.0, rng.normal(prof.interval_seconds, prof.jitter_sd, size=n - 1))
    return np.concatenate([[0.0], np.cumsum(gaps)])


def _join(words: np.ndarray, lengths: np.ndarray) -> list:
    bounds = np.cumsum(lengths)[:-1]
    return [" ".join(chunk) for chunk in np.split(words, bounds)]


def _decorate(texts, prof, rng, tags) -> list:
    n = len(texts)
    n_tags = rng.poisson(prof.hashtag_rate, size=n)
    tag_p = _zipf_probs(len(tags), 1.0)
    tag_draw = rng.choice(len(tags), size=int(n_tags.sum()), p=tag_p)
    urls = rng.random(n) < prof.url_rate
    url_ids = rng.integers(0, 36**6, size=n)
    out = []
    pos = 0
    for i, text in enumerate(texts):
        parts = [text]
        for k in tag_draw[pos : pos + n_tags[i]]:
            parts.append("#" + tags[k])
        pos += n_tags[i]
        if urls[i]:
            parts.append("http://t.co/" + np.base_repr(int(url_ids[i]), 36).lower())
        out.append(" ".join(parts))
    return out


def _sentiment_word(rng, bias: float) -> str:
    pool = POSITIVE_WORDS if rng.random() < (1 + bias) / 2 else NEGATIVE_WORDS
    return pool[rng.integers(len(pool))]


def _organic_texts(prof, n, rng) -> list:
    vocab = _vocabulary(prof.vocabulary_size)
    lengths = 1 + rng.poisson(max(prof.words_per_tweet - 1, 0.0), size=n)
    words = vocab[rng.choice(len(vocab), size=int(lengths.sum()), p=_zipf_probs(len(vocab), prof.zipf_exponent))]
    starts = np.r_[0, np.cumsum(lengths)[:-1]]
    for i in np.flatnonzero(rng.random(n) < prof.sentiment_rate):
        words[starts[i]] = _sentiment_word(rng, prof.sentiment_bias)
    tags = [f"topic{k}" for k in range(prof.hashtag_pool)]
    return _decorate(_join(words, lengths), prof, rng, tags)


def _inorganic_texts(prof, n, rng) -> list:
    keywords = np.array(BOT_KEYWORDS[: max(2, prof.vocabulary_size)], dtype=object)
    anchor = keywords[rng.integers(len(keywords))]
    templates = []
    for _ in range(prof.pool_size):
        length = max(2, int(round(rng.normal(prof.words_per_tweet, 1.0))))
        body = list(keywords[rng.integers(len(keywords), size=length - 1)])
        if rng.random() < prof.sentiment_rate:
            body[rng.integers(len(body))] = _sentiment_word(rng, prof.sentiment_bias)
        templates.append(" ".join([anchor, *body]))
    picks = rng.integers(len(templates), size=n)
    tags = [f"promo{k}" for k in range(max(1, prof.hashtag_pool))]
    return _decorate([templates[k] for k in picks], prof, rng, tags)


def generate_user(kind: str, index: int, seed: int, profile: GeneratorProfile,
                  user_id: Optional[str] = None, tweet_scale: float = 1.0) -> UserHistory:
    code = 0 if kind == ORGANIC else 1
    rng = np.random.default_rng([seed, code, index])
    n = _n_tweets(profile, rng, tweet_scale)
    start = EPOCH_START + int(rng.integers(0, 30 * DAY))
    if kind == ORGANIC:
        times, texts = _organic_times(profile, n, rng), _organic_texts(profile, n, rng)
    else:
        times, texts = _inorganic_times(profile, n, rng), _inorganic_texts(profile, n, rng)
    ts = start + np.floor(times).astype(np.int64)
    return UserHistory(user_id or f"{kind}{index}", ts, tuple(texts), kind)


def generate_corpus(
    n_organic: int = 470,
    n_inorganic: int = 373,
    seed: int = 1,
    profiles: Optional[dict] = None,
    tweet_scale: float = 1.0,
) -> list:
    """Labelled synthetic histories, sorted by user id.

    Ids are ``u00000``-style and assigned through a seeded shuffle so they
    carry no label information.  ``tweet_scale`` multiplies the mean tweet
    counts of both profiles (handy for quick experiments).
    """
    if n_organic < 0 or n_inorganic < 0:
        raise ValueError("user counts must be nonnegative")
    if tweet_scale <= 0:
        raise ValueError("tweet_scale must be positive")
    profiles = profiles or default_profiles()
    total = n_organic + n_inorganic
    slots = np.random.default_rng([seed, 2]).permutation(total)
    users = []
    specs = [(ORGANIC, i) for i in range(n_organic)] + [(INORGANIC, i) for i in range(n_inorganic)]
    for slot, (kind, i) in zip(slots, specs):
        users.append(generate_user(kind, i, seed, profiles[kind], f"u{slot:05d}", tweet_scale))
    users.sort(key=lambda h: h.user_id)
    return users
