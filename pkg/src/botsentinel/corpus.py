"""Tweet histories: data model, JSONL ingestion, time binning and splitting."""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

ORGANIC = "organic"
INORGANIC = "inorganic"
LABELS = (ORGANIC, INORGANIC)

DEFAULT_BIN_WIDTH = 10800  # 3 hours


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid histories."""


class Tweet(NamedTuple):
    timestamp: int
    text: str


@dataclass(frozen=True, eq=False)
class UserHistory:
    """One account's tweets, stored column-wise.

    ``timestamps`` is an int64 array sorted ascending and ``texts`` the
    matching tweet bodies.  Use :meth:`from_tweets` to build one from
    unsorted input.
    """

    user_id: str
    timestamps: np.ndarray
    texts: tuple[str, ...]
    label: Optional[str] = None

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "texts", tuple(self.texts))
        if ts.ndim != 1 or len(ts) != len(self.texts):
            raise CorpusError(f"{self.user_id}: timestamps and texts differ in length")
        if len(ts) and ts[0] < 0:
            raise CorpusError(f"{self.user_id}: negative timestamp")
        if np.any(np.diff(ts) < 0):
            raise CorpusError(f"{self.user_id}: timestamps not sorted")
        if self.label is not None and self.label not in LABELS:
            raise CorpusError(f"{self.user_id}: unknown label {self.label!r}")

    @classmethod
    def from_tweets(cls, user_id: str, tweets: Iterable[Tweet], label: Optional[str] = None):
        tweets = sorted(tweets, key=lambda tw: tw[0])
        ts = np.array([int(t) for t, _ in tweets], dtype=np.int64)
        return cls(user_id, ts, tuple(text for _, text in tweets), label)

    @property
    def tweets(self) -> list[Tweet]:
        return [Tweet(int(t), s) for t, s in zip(self.timestamps, self.texts)]

    def __len__(self) -> int:
        return len(self.texts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UserHistory):
            return NotImplemented
        return (
            self.user_id == other.user_id
            and self.label == other.label
            and self.texts == other.texts
            and np.array_equal(self.timestamps, other.timestamps)
        )

    def to_json(self) -> str:
        record = {
            "user_id": self.user_id,
            "tweets": [{"t": int(t), "text": s} for t, s in zip(self.timestamps, self.texts)],
            "label": self.label,
        }
        return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class BinnedSeries:
    start: int
    bin_width: int
    counts: np.ndarray


@dataclass(frozen=True)
class DatasetSplit:
    train: frozenset
    calibration: frozenset
    test: frozenset

    def to_dict(self) -> dict:
        return {
            "train": sorted(self.train),
            "calibration": sorted(self.calibration),
            "test": sorted(self.test),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSplit":
        return cls(frozenset(d["train"]), frozenset(d["calibration"]), frozenset(d["test"]))


@dataclass
class Corpus(Sequence):
    """Loaded histories plus ingestion metadata."""

    histories: list
    n_skipped: int = 0
    skipped_ids: list = field(default_factory=list)

    def __getitem__(self, i):
        return self.histories[i]

    def __len__(self) -> int:
        return len(self.histories)

    def __iter__(self) -> Iterator[UserHistory]:
        return iter(self.histories)


def _parse_record(obj, lineno: int) -> tuple[str, list, Optional[str]]:
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: expected a JSON object")
    try:
        user_id = obj["user_id"]
        raw = obj["tweets"]
    except KeyError as exc:
        raise CorpusError(f"line {lineno}: missing key {exc.args[0]!r}") from None
    if not isinstance(user_id, str) or not isinstance(raw, list):
        raise CorpusError(f"line {lineno}: bad user_id or tweets field")
    label = obj.get("label")
    if label is not None and label not in LABELS:
        raise CorpusError(f"line {lineno}: unknown label {label!r}")
    tweets = []
    for tw in raw:
        try:
            t, text = tw["t"], tw.get("text", "")
        except (KeyError, TypeError, AttributeError):
            raise CorpusError(f"line {lineno}: malformed tweet entry") from None
        if isinstance(t, bool) or not isinstance(t, int) or t < 0:
            raise CorpusError(f"line {lineno}: tweet timestamp must be a nonnegative integer")
        if not isinstance(text, str):
            raise CorpusError(f"line {lineno}: tweet text must be a string")
        tweets.append(Tweet(t, text))
    return user_id, tweets, label


def load_corpus(path) -> Corpus:
    """Read a newline-delimited JSON corpus.

    Records with an empty tweet list are skipped and counted in
    ``Corpus.n_skipped``.  Malformed lines and duplicate ids raise
    :class:`CorpusError` naming the offending line.
    """
    histories = []
    seen: dict[str, int] = {}
    skipped = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from None
            user_id, tweets, label = _parse_record(obj, lineno)
            if user_id in seen:
                raise CorpusError(
                    f"line {lineno}: duplicate user_id {user_id!r} (first seen on line {seen[user_id]})"
                )
            seen[user_id] = lineno
            if not tweets:
                skipped.append(user_id)
                continue
            histories.append(UserHistory.from_tweets(user_id, tweets, label))
    if skipped:
        logger.warning("skipped %d records with no tweets", len(skipped))
    return Corpus(histories, len(skipped), skipped)


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_corpus(histories: Iterable[UserHistory], path) -> None:
    atomic_write_text(path, "".join(h.to_json() + "\n" for h in histories))


def bin_series(history: UserHistory, bin_width: int = DEFAULT_BIN_WIDTH) -> BinnedSeries:
    """Count tweets per fixed window.

    Bins are anchored at multiples of ``bin_width`` since the epoch so that
    series from different users are phase-aligned.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    ts = history.timestamps
    if len(ts) == 0:
        raise CorpusError(f"{history.user_id}: cannot bin an empty history")
    start = (int(ts[0]) // bin_width) * bin_width
    idx = (ts - start) // bin_width
    counts = np.bincount(idx, minlength=int(idx[-1]) + 1)
    return BinnedSeries(start, bin_width, counts)


def _largest_remainder(total: int, fractions: Sequence[float]) -> np.ndarray:
    quotas = np.array([total * f for f in fractions])
    sizes = np.floor(quotas + 1e-9).astype(int)
    rem = quotas - sizes
    # stable sort keeps earlier splits first on equal remainders
    for k in np.argsort(-rem, kind="stable")[: total - sizes.sum()]:
        sizes[k] += 1
    return sizes


def _stratum_sizes(counts: dict, fractions: Sequence[float]) -> dict:
    """Controlled rounding: per-label floor/ceil sizes matching global totals."""
    total = sum(counts.values())
    target = _largest_remainder(total, fractions)
    sizes = {}
    fracs = {}
    for lab, n in counts.items():
        q = np.array([n * f for f in fractions])
        sizes[lab] = np.floor(q + 1e-9).astype(int)
        fracs[lab] = q - sizes[lab]
    cells = sorted(
        ((fracs[lab][s], lab, s) for lab in counts for s in range(len(fractions))),
        key=lambda c: (-c[0], c[1], c[2]),
    )
    for _, lab, s in cells:
        row_left = counts[lab] - sizes[lab].sum()
        col_left = target[s] - sum(sizes[l][s] for l in counts)
        if row_left > 0 and col_left > 0 and fracs[lab][s] > 1e-9:
            sizes[lab][s] += 1
    # any remainder left by the greedy pass goes wherever capacity remains
    for lab in sorted(counts):
        for s in range(len(fractions)):
            while counts[lab] - sizes[lab].sum() > 0 and target[s] - sum(sizes[l][s] for l in counts) > 0:
                sizes[lab][s] += 1
    return sizes


def split_dataset(
    histories: Sequence[UserHistory],
    fractions: Sequence[float] = (0.4, 0.3, 0.3),
    seed: int = 0,
) -> DatasetSplit:
    """Partition users into train / calibration / test.

    Labelled users are stratified by label.  In a partly labelled corpus
    the unlabelled users can only be predicted, so they all go to the test
    split; a fully unlabelled corpus is split as one stratum.
    """
    if len(fractions) != 3:
        raise ValueError("expected three fractions (train, calibration, test)")
    if any(f < 0 or f > 1 for f in fractions):
        raise ValueError("fractions must lie in [0, 1]")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)!r}")
    if len(histories) == 0:
        raise ValueError("cannot split an empty corpus")
    ids = [h.user_id for h in histories]
    if len(set(ids)) != len(ids):
        raise CorpusError("duplicate user ids in corpus")

    strata: dict[str, list] = {}
    unlabeled = []
    for h in histories:
        (strata.setdefault(h.label, []) if h.label is not None else unlabeled).append(h.user_id)

    if not strata:
        strata, unlabeled = {"": unlabeled}, []
    rng = np.random.default_rng(seed)
    sizes = _stratum_sizes({lab: len(v) for lab, v in strata.items()}, fractions)
    parts = [set(), set(), set()]
    for lab in sorted(strata):
        members = sorted(strata[lab])
        order = rng.permutation(len(members))
        shuffled = [members[i] for i in order]
        bounds = np.cumsum(sizes[lab])
        lo = 0
        for s, hi in enumerate(bounds):
            parts[s].update(shuffled[lo:hi])
            lo = hi
    parts[2].update(unlabeled)
    return DatasetSplit(frozenset(parts[0]), frozenset(parts[1]), frozenset(parts[2]))
