"""TF-IDF aspect terms, skip-gram embeddings and sentiment-weighted inputs."""

from __future__ import annotations

import functools
import gzip
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from numba import njit

from .corpus import LabeledExample, Vocabulary
from .lexicon import SentimentLexicon

# ---------------------------------------------------------------------------
# TF-IDF and aspect terms


@dataclass
class TfidfModel:
    n_docs: int
    df: dict[str, int]
    scores: dict[str, float]

    def idf(self, term: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df[term])) + 1.0

    def ranked(self) -> list[tuple[str, float]]:
        return sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))


def fit_tfidf(examples: list[LabeledExample]) -> TfidfModel:
    """Smoothed-idf TF-IDF with L2-normalized documents.

    A term's corpus score is the sum of its normalized weights over all
    documents.
    """
    if not examples:
        raise ValueError("fit_tfidf needs a non-empty corpus")
    counts = [Counter(ex.tokens) for ex in examples]
    df = Counter(term for c in counts for term in c)
    n = len(counts)
    idf = {t: math.log((1 + n) / (1 + d)) + 1.0 for t, d in df.items()}
    scores = dict.fromkeys(sorted(df), 0.0)
    for c in counts:
        terms = sorted(c)
        weights = [c[t] * idf[t] for t in terms]
        norm = math.sqrt(math.fsum(w * w for w in weights))
        if norm == 0.0:
            continue
        for t, w in zip(terms, weights):
            scores[t] += w / norm
    return TfidfModel(n, dict(df), scores)


@functools.lru_cache(maxsize=4)
def _pos_table(path: Optional[str] = None) -> dict[str, str]:
    if path is None:
        raw = resources.files("bilstm_sentiment").joinpath("data/wordnet_pos.tsv.gz").read_bytes()
    else:
        raw = Path(path).read_bytes()
    text = gzip.decompress(raw).decode("utf-8")
    table = {}
    for line in text.splitlines():
        word, tags = line.split("\t")
        table[word] = tags
    return table


def noun_test(word: str, pos_table: Optional[str] = None) -> bool:
    """True iff ``word`` has a noun reading in the bundled WordNet POS index."""
    return bool(word) and "n" in _pos_table(pos_table).get(word, "")


@dataclass
class AspectTermSet:
    terms: list[tuple[str, float]] = field(default_factory=list)

    def __len__(self):
        return len(self.terms)

    def __contains__(self, word):
        return word in self.words

    @functools.cached_property
    def words(self) -> frozenset[str]:
        return frozenset(t for t, _ in self.terms)

    def to_json(self) -> list[dict]:
        return [{"term": t, "score": s} for t, s in self.terms]

    @classmethod
    def from_json(cls, rows) -> "AspectTermSet":
        return cls([(r["term"], float(r["score"])) for r in rows])


def extract_aspect_terms(tfidf: TfidfModel, noun_test: Callable[[str], bool] = noun_test, k: int = 160) -> AspectTermSet:
    """Top-``k`` nouns by corpus TF-IDF score."""
    if k < 1:
        raise ValueError("k must be >= 1")
    picked = []
    for term, score in tfidf.ranked():
        if noun_test(term):
            picked.append((term, score))
            if len(picked) == k:
                break
    return AspectTermSet(picked)


# ---------------------------------------------------------------------------
# Skip-gram with negative sampling


@dataclass
class SkipGramParams:
    size: int = 200
    alpha: float = 0.025
    min_alpha: float = 1e-4
    min_count: int = 5
    iters: int = 5
    window: int = 5
    negatives: int = 5
    batch_words: int = 10000
    seed: int = 1


@njit(cache=True)
def _sgns(stream, offsets, cum_table, w_in, w_out, window, negatives, alpha, min_alpha, iters, batch_words, seed):
    np.random.seed(seed)
    dim = w_in.shape[1]
    n_tokens = stream.shape[0]
    total = iters * n_tokens
    grad = np.zeros(dim, dtype=w_in.dtype)
    processed = 0
    lr = alpha
    for _ in range(iters):
        for s in range(offsets.shape[0] - 1):
            start = offsets[s]
            end = offsets[s + 1]
            for pos in range(start, end):
                if processed % batch_words == 0:
                    lr = alpha - (alpha - min_alpha) * processed / total
                    if lr < min_alpha:
                        lr = min_alpha
                processed += 1
                center = stream[pos]
                shrink = np.random.randint(0, window)
                lo = max(start, pos - window + shrink)
                hi = min(end, pos + window - shrink + 1)
                for c in range(lo, hi):
                    if c == pos:
                        continue
                    context = stream[c]
                    grad[:] = 0.0
                    for k in range(negatives + 1):
                        if k == 0:
                            target = context
                            label = 1.0
                        else:
                            r = np.random.random() * cum_table[-1]
                            target = np.searchsorted(cum_table, r, side="right") + 1
                            if target == context:
                                continue
                            label = 0.0
                        dot = 0.0
                        for j in range(dim):
                            dot += w_in[center, j] * w_out[target, j]
                        g = (label - 1.0 / (1.0 + math.exp(-dot))) * lr
                        for j in range(dim):
                            grad[j] += g * w_out[target, j]
                            w_out[target, j] += g * w_in[center, j]
                    for j in range(dim):
                        w_in[center, j] += grad[j]


def init_embeddings(n_words: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``(n_words + 1, size)`` float32 table, row 0 zero, others U(-0.5/d, 0.5/d)."""
    table = np.zeros((n_words + 1, size), dtype=np.float32)
    table[1:] = (rng.random((n_words, size), dtype=np.float32) - 0.5) / size
    return table


def train_skipgram(examples: list[LabeledExample], vocab: Vocabulary, params: SkipGramParams = SkipGramParams()) -> np.ndarray:
    """Skip-gram with negative sampling; returns the input-embedding table.

    Out-of-vocabulary tokens are removed from the stream before windowing.
    Deterministic for a fixed ``params.seed``.
    """
    rng = np.random.default_rng(params.seed)
    table = init_embeddings(len(vocab), params.size, rng)
    sentences = [np.array([i for i in vocab.encode(ex.tokens) if i > 0], dtype=np.int64) for ex in examples]
    sentences = [s for s in sentences if s.size]
    n_tokens = sum(s.size for s in sentences)
    if n_tokens < params.window:
        raise ValueError(f"corpus has {n_tokens} in-vocabulary tokens, fewer than window={params.window}")
    if params.iters == 0:
        return table
    stream = np.concatenate(sentences)
    offsets = np.zeros(len(sentences) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([s.size for s in sentences])
    freq = np.asarray(vocab.counts[1:], dtype=np.float64) ** 0.75
    cum_table = np.cumsum(freq)
    w_out = np.zeros_like(table)
    kernel_seed = int(rng.integers(0, 2**31 - 1))
    _sgns(stream, offsets, cum_table, table, w_out, params.window, params.negatives,
          params.alpha, params.min_alpha, params.iters, params.batch_words, kernel_seed)
    return table


def save_embeddings(table: np.ndarray, vocab: Vocabulary, path) -> None:
    """Text format: one ``word v1 ... vd`` line per vocabulary word."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(1, table.shape[0]):
            fh.write(vocab.idx2word[i] + " " + " ".join(f"{v:.9g}" for v in table[i].tolist()) + "\n")


def load_embeddings(path, vocab: Vocabulary, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Read a ``word v1 ... vd`` file into a table aligned with ``vocab``.

    Vocabulary words missing from the file are zero, or drawn like
    ``init_embeddings`` when ``rng`` is given.
    """
    vectors = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if not parts[0]:
                continue
            values = [float(v) for v in parts[1:]]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} values, got {len(values)}")
            vectors[parts[0]] = values
    if dim is None:
        raise ValueError(f"{path}: no vectors")
    if rng is not None:
        table = init_embeddings(len(vocab), dim, rng)
    else:
        table = np.zeros((len(vocab) + 1, dim), dtype=np.float32)
    for word, idx in vocab.word2idx.items():
        if word in vectors:
            table[idx] = vectors[word]
    return table


def save_aspects(aspects: AspectTermSet, path) -> None:
    Path(path).write_text(json.dumps(aspects.to_json(), indent=1) + "\n", encoding="utf-8")


def load_aspects(path) -> AspectTermSet:
    return AspectTermSet.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# Sentiment-weighted inputs


def senti_weights(lexicon: SentimentLexicon, tokens) -> np.ndarray:
    return np.array([lexicon.senti(t) for t in tokens], dtype=np.float64)


def weighted_input(embeddings: np.ndarray, lexicon: SentimentLexicon, tokens, vocab: Vocabulary) -> np.ndarray:
    """Row ``i`` is the token's embedding scaled by its lexicon weight."""
    idx = np.asarray(vocab.encode(tokens), dtype=np.int64)
    return embeddings[idx] * senti_weights(lexicon, tokens)[:, None].astype(embeddings.dtype)
