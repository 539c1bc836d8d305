"""Sentiment lexicon: dictionary parsers, source merging and word weights."""

from __future__ import annotations

import gzip
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

OUT_OF_LEXICON = 1.0


def _lines(path):
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt", encoding="utf-8") as fh:
        yield from enumerate(fh, start=1)


def _means(scores: dict[str, list[float]]) -> dict[str, float]:
    return {w: math.fsum(v) / len(v) for w, v in scores.items()}


def _check_score(value: float) -> float:
    if not -1.0 <= value <= 1.0:
        raise ValueError(f"score {value} outside [-1, 1]")
    return value


def parse_sentiwordnet(path) -> dict[str, float]:
    """Mean ``PosScore - NegScore`` per word over all its POS tags and senses.

    Expects the SentiWordNet 3.0 layout: six tab-separated columns
    (POS, ID, PosScore, NegScore, SynsetTerms, Gloss) and ``#`` comments.
    """
    scores: dict[str, list[float]] = defaultdict(list)
    for lineno, line in _lines(path):
        if line.startswith("#") or not line.strip():
            continue
        cols = line.rstrip("\r\n").split("\t")
        try:
            if len(cols) != 6:
                raise ValueError(f"expected 6 columns, got {len(cols)}")
            score = _check_score(float(cols[2]) - float(cols[3]))
            terms = cols[4].split()
            if not terms:
                raise ValueError("no synset terms")
        except ValueError as exc:
            log.warning("%s:%d: skipping line (%s)", Path(path).name, lineno, exc)
            continue
        for term in terms:
            word = term.rsplit("#", 1)[0].lower()
            if word:
                scores[word].append(score)
    return _means(scores)


def parse_aux_lexicon(path) -> dict[str, float]:
    """Mean score per word from ``word<TAB>pos<TAB>score`` lines."""
    scores: dict[str, list[float]] = defaultdict(list)
    for lineno, line in _lines(path):
        if line.startswith("#") or not line.strip():
            continue
        cols = line.split("\t") if "\t" in line else line.split()
        try:
            if len(cols) != 3:
                raise ValueError(f"expected 3 columns, got {len(cols)}")
            word = cols[0].strip().lower()
            if not word:
                raise ValueError("empty word")
            score = _check_score(float(cols[2]))
        except ValueError as exc:
            log.warning("%s:%d: skipping line (%s)", Path(path).name, lineno, exc)
            continue
        scores[word].append(score)
    return _means(scores)


@dataclass(frozen=True)
class SentimentLexicon:
    entries: dict[str, float]
    sources: tuple = ()
    default: float = OUT_OF_LEXICON
    metadata: dict = field(default_factory=dict)

    def __contains__(self, word):
        return word in self.entries

    def __len__(self):
        return len(self.entries)

    def senti(self, word: str) -> float:
        return self.entries.get(word, self.default)

    def to_json(self) -> dict:
        return {
            "default": self.default,
            "sources": list(self.sources),
            "entries": dict(sorted(self.entries.items())),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SentimentLexicon":
        return cls(dict(obj["entries"]), tuple(obj.get("sources", ())), obj.get("default", OUT_OF_LEXICON))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=False) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SentimentLexicon":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def merge(sources: list[dict[str, float]], names=(), default: float = OUT_OF_LEXICON) -> SentimentLexicon:
    """Average each word's score over the sources that contain it."""
    if not sources:
        raise ValueError("merge needs at least one source")
    collected: dict[str, list[float]] = defaultdict(list)
    for source in sources:
        for word, score in source.items():
            collected[word].append(score)
    names = tuple(names) or tuple(f"source{i}" for i in range(len(sources)))
    meta = {"entry_counts": [len(s) for s in sources]}
    return SentimentLexicon(_means(collected), names, default, meta)


def senti(lexicon: SentimentLexicon, word: str) -> float:
    """Merged weight of ``word``, or the out-of-lexicon default (1)."""
    return lexicon.senti(word)


def build_lexicon(sentiwordnet_path, aux_path, default: float = OUT_OF_LEXICON) -> SentimentLexicon:
    swn = parse_sentiwordnet(sentiwordnet_path)
    aux = parse_aux_lexicon(aux_path)
    return merge([swn, aux], names=(Path(sentiwordnet_path).name, Path(aux_path).name), default=default)
