"""Review ingestion, labeling, tokenization, vocabulary and train/test split."""

from __future__ import annotations

import csv
import gzip
import hashlib
import io
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

log = logging.getLogger(__name__)

_NON_ALPHA = re.compile(r"[^A-Za-z]+")

PAD = "<pad>"


class DataError(ValueError):
    """Input data is unusable (bad records, empty corpus, bad rating)."""


@dataclass
class RawReview:
    review_text: str
    overall: int
    extra: dict = field(default_factory=dict)


@dataclass
class LabeledExample:
    tokens: list[str]
    label: int
    source_id: int


@dataclass
class DatasetSplit:
    train: list[LabeledExample]
    test: list[LabeledExample]
    seed: int


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8", newline="")


def _coerce_rating(value) -> int:
    rating = float(value)
    if not rating.is_integer() or not 1 <= rating <= 5:
        raise ValueError(f"rating {value!r} not an integer in [1, 5]")
    return int(rating)


def _to_review(obj: dict) -> RawReview:
    text = obj["reviewText"]
    if not isinstance(text, str):
        raise ValueError("reviewText is not a string")
    rating = _coerce_rating(obj["overall"])
    extra = {k: v for k, v in obj.items() if k not in ("reviewText", "overall")}
    return RawReview(text, rating, extra)


def read_reviews(path) -> tuple[list[RawReview], int]:
    """Read reviews from JSON-lines (default) or CSV (``.csv`` suffix).

    Returns the parsed reviews and the number of skipped records. Records
    lacking ``reviewText``/``overall`` or that fail to parse are skipped with
    a warning; an unreadable file raises ``OSError``.
    """
    path = Path(path)
    reviews: list[RawReview] = []
    skipped = 0
    is_csv = path.name.endswith((".csv", ".csv.gz"))
    with _open_text(path) as fh:
        rows: Iterable = csv.DictReader(fh) if is_csv else fh
        for lineno, row in enumerate(rows, start=1):
            try:
                if not is_csv:
                    if not row.strip():
                        continue
                    row = json.loads(row)
                    if not isinstance(row, dict):
                        raise ValueError("record is not a JSON object")
                reviews.append(_to_review(row))
            except (KeyError, ValueError, TypeError) as exc:
                skipped += 1
                log.warning("%s:%d: skipping record (%s)", path.name, lineno, exc)
    return reviews, skipped


def load_reviews(path) -> list[RawReview]:
    return read_reviews(path)[0]


def derive_label(overall: int, positive_min: int = 4, negative_max: int = 2) -> Optional[int]:
    """Map a star rating to 1 (positive), 0 (negative) or None (dropped)."""
    if isinstance(overall, bool) or not isinstance(overall, (int, np.integer)) or not 1 <= overall <= 5:
        raise DataError(f"rating must be an integer in [1, 5], got {overall!r}")
    if overall >= positive_min:
        return 1
    if overall <= negative_max:
        return 0
    return None


def load_stopwords(path=None) -> frozenset[str]:
    """Read a one-word-per-line stopword file; ``#`` starts a comment."""
    if path is None:
        text = resources.files("bilstm_sentiment").joinpath("data/stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


def preprocess(text: str, stopwords) -> list[str]:
    # non-letters become separators, then lowercase, split, drop stopwords
    return [tok for tok in _NON_ALPHA.sub(" ", text).lower().split() if tok not in stopwords]


@dataclass
class LabelingStats:
    raw: int = 0
    neutral: int = 0
    empty: int = 0
    kept: int = 0


def build_examples(reviews: list[RawReview], stopwords, positive_min=4, negative_max=2):
    """Label and tokenize reviews; returns ``(examples, LabelingStats)``."""
    stats = LabelingStats(raw=len(reviews))
    examples = []
    for idx, review in enumerate(reviews):
        label = derive_label(review.overall, positive_min, negative_max)
        if label is None:
            stats.neutral += 1
            continue
        tokens = preprocess(review.review_text, stopwords)
        if not tokens:
            stats.empty += 1
            continue
        examples.append(LabeledExample(tokens, label, idx))
    stats.kept = len(examples)
    return examples, stats


class Vocabulary:
    """Word <-> index map. Index 0 is reserved for padding and unknown words."""

    def __init__(self, words: list[str], counts: list[int]):
        self.idx2word = [PAD] + list(words)
        self.word2idx = {w: i for i, w in enumerate(self.idx2word) if i > 0}
        self.counts = [0] + list(counts)

    def __len__(self):
        return len(self.idx2word) - 1

    def __contains__(self, word):
        return word in self.word2idx

    def index(self, word: str) -> int:
        return self.word2idx.get(word, 0)

    def encode(self, tokens) -> list[int]:
        return [self.word2idx.get(t, 0) for t in tokens]

    def count(self, word: str) -> int:
        return self.counts[self.index(word)]

    def content_hash(self) -> bytes:
        h = hashlib.sha256()
        for word, count in zip(self.idx2word, self.counts):
            h.update(f"{word}\t{count}\n".encode())
        return h.digest()

    def to_json(self) -> dict:
        return {"words": self.idx2word[1:], "counts": self.counts[1:]}

    @classmethod
    def from_json(cls, obj: dict) -> "Vocabulary":
        return cls(obj["words"], obj["counts"])


def build_vocab(examples: list[LabeledExample], min_count: int = 5) -> Vocabulary:
    """Keep words seen at least ``min_count`` times.

    Indices go by descending frequency, ties broken lexicographically.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    freq = Counter(tok for ex in examples for tok in ex.tokens)
    kept = sorted((w for w, c in freq.items() if c >= min_count), key=lambda w: (-freq[w], w))
    return Vocabulary(kept, [freq[w] for w in kept])


def split_dataset(examples: list[LabeledExample], ratio: float = 0.7, seed: int = 42) -> DatasetSplit:
    """Seeded shuffle, then the first ``floor(ratio * N)`` examples train."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie strictly between 0 and 1")
    n = len(examples)
    if n < 2:
        raise DataError("need at least two examples to split")
    order = np.random.default_rng(seed).permutation(n)
    n_train = math.floor(ratio * n + 1e-9)
    train = [examples[i] for i in order[:n_train]]
    test = [examples[i] for i in order[n_train:]]
    return DatasetSplit(train, test, seed)


def examples_to_json(examples: list[LabeledExample]) -> list[dict]:
    return [{"source_id": e.source_id, "label": e.label, "tokens": e.tokens} for e in examples]


def examples_from_json(rows: list[dict]) -> list[LabeledExample]:
    return [LabeledExample(list(r["tokens"]), int(r["label"]), int(r["source_id"])) for r in rows]
