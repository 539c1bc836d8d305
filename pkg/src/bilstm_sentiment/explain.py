"""Attention-based interpretability: per-sentence weights and term rankings."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .corpus import LabeledExample, Vocabulary
from .lexicon import SentimentLexicon
from .model import Batch, BiLstmAttentionModel, forward, predict
from .train import encode_examples

# Review 1 of the Musical Instruments corpus after stopword removal.
REVIEW_ONE = "fine cable decent price point nothing exceptional mind gets job done well enough".split()

AGGREGATORS = {
    "max": max,
    "sum": math.fsum,
    "average": lambda xs: math.fsum(xs) / len(xs),
}
AGGREGATORS["mean"] = AGGREGATORS["average"]


@dataclass
class SentenceAttribution:
    tokens: list[str]
    weights: list[float]
    token_ids: list[int]
    probability: float
    label: int

    @property
    def word_index(self) -> list[int]:
        return list(range(1, len(self.tokens) + 1))

    def top(self, k: int = 4) -> list[tuple[str, float]]:
        order = sorted(range(len(self.tokens)), key=lambda i: (-self.weights[i], i))
        return [(self.tokens[i], self.weights[i]) for i in order[:k]]

    def to_json(self) -> dict:
        return {"tokens": self.tokens, "weights": self.weights, "word_index": self.word_index,
                "token_ids": self.token_ids, "probability": self.probability, "label": self.label}

    @classmethod
    def from_json(cls, obj: dict) -> "SentenceAttribution":
        return cls(list(obj["tokens"]), [float(w) for w in obj["weights"]], [int(i) for i in obj["token_ids"]],
                   float(obj["probability"]), int(obj["label"]))


def attribute_sentence(model: BiLstmAttentionModel, tokens, vocab: Vocabulary, lexicon: SentimentLexicon) -> SentenceAttribution:
    """Evaluation-mode attention weights aligned with ``tokens``."""
    tokens = list(tokens)
    if not tokens:
        raise ValueError("cannot attribute an empty sentence")
    ids = vocab.encode(tokens)
    trace = predict(model, ids, [lexicon.senti(t) for t in tokens])
    prob = float(trace.prob[0])
    return SentenceAttribution(tokens, [float(a) for a in trace.attention_weights(0)], ids, prob, int(prob >= 0.5))


def sentence_attention(model: BiLstmAttentionModel, examples: list[LabeledExample], vocab: Vocabulary,
                       lexicon: SentimentLexicon, batch_size: int = 256, max_len: Optional[int] = None):
    """Yield ``(tokens, weights)`` for every example, in input order."""
    data = encode_examples(examples, vocab, lexicon, max_len)
    out: list = [None] * len(examples)
    order = sorted(range(len(examples)), key=lambda r: (len(data.ids[r]), r))
    for start in range(0, len(order), batch_size):
        rows = order[start: start + batch_size]
        batch, _ = data.batch(rows)
        att = forward(model, batch).attention
        for k, r in enumerate(rows):
            n = len(data.ids[r])
            out[r] = (examples[r].tokens[:n], att[k, :n].astype(np.float64).tolist())
    return out


@dataclass
class AspectWeightReport:
    aggregator: str
    entries: list[tuple[str, float, int]] = field(default_factory=list)  # (term, weight, count), descending

    def weight(self, term: str) -> Optional[float]:
        for t, w, _ in self.entries:
            if t == term:
                return w
        return None

    def as_dict(self) -> dict[str, float]:
        return {t: w for t, w, _ in self.entries}

    def ranking(self) -> list[str]:
        return [t for t, _, _ in self.entries]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["term", "aggregator", "weight", "count"])
            for term, weight, count in self.entries:
                w.writerow([term, self.aggregator, repr(weight), count])


def aggregate_term_weights(sentences: Iterable[tuple[list[str], list[float]]], terms, f: str = "average") -> AspectWeightReport:
    """Cross-sentence aggregation of per-term attention.

    Repeated occurrences inside one sentence are summed first, then ``f``
    reduces the per-sentence values. ``terms=None`` keeps every word; terms
    that never occur are omitted.
    """
    if f not in AGGREGATORS:
        raise ValueError(f"aggregator must be one of {sorted(AGGREGATORS)}")
    wanted = None if terms is None else set(terms)
    per_term: dict[str, list[float]] = defaultdict(list)
    for tokens, weights in sentences:
        local: dict[str, list[float]] = defaultdict(list)
        for tok, w in zip(tokens, weights):
            if wanted is None or tok in wanted:
                local[tok].append(w)
        for tok, ws in local.items():
            per_term[tok].append(math.fsum(ws))
    reduce = AGGREGATORS[f]
    entries = [(t, float(reduce(v)), len(v)) for t, v in per_term.items()]
    entries.sort(key=lambda e: (-e[1], e[0]))
    return AspectWeightReport("average" if f == "mean" else f, entries)


def aggregate_aspect_weights(model: BiLstmAttentionModel, examples: list[LabeledExample], aspects, vocab: Vocabulary,
                             lexicon: SentimentLexicon, f: str = "average", max_len: Optional[int] = None) -> AspectWeightReport:
    """Corpus-level attention weight per aspect term (``aspects`` may be any term collection or ``None``)."""
    if aspects is not None:
        aspects = [t for t, _ in aspects.terms] if hasattr(aspects, "terms") else list(aspects)
        if not aspects:
            raise ValueError("no aspect terms given")
    return aggregate_term_weights(sentence_attention(model, examples, vocab, lexicon, max_len=max_len), aspects, f)


@dataclass
class GroupComparison:
    aspect_terms: list[tuple[str, float]]
    sentiment_words: list[tuple[str, float]]
    aspect_mean: float
    sentiment_mean: float
    ratio: float
    threshold: float

    def to_json(self) -> dict:
        return {"aspect_terms": [{"term": t, "weight": w} for t, w in self.aspect_terms],
                "sentiment_words": [{"term": t, "weight": w} for t, w in self.sentiment_words],
                "aspect_mean": self.aspect_mean, "sentiment_mean": self.sentiment_mean,
                "ratio": self.ratio, "threshold": self.threshold}


def compare_aspect_vs_sentiment(report: AspectWeightReport, lexicon: SentimentLexicon, aspects, threshold: float = 0.3,
                                n_aspects: int = 10, n_sentiment: int = 9) -> GroupComparison:
    """Mean weight of the top aspect terms against the top sentiment words.

    ``report`` must be average-aggregated and cover both groups. Sentiment
    words are lexicon entries with ``|weight| >= threshold`` that are not
    aspect terms.
    """
    if report.aggregator != "average":
        raise ValueError("comparison needs an average-aggregated report")
    aspect_set = set(aspects.words if hasattr(aspects, "words") else aspects)
    top_aspects = [(t, w) for t, w, _ in report.entries if t in aspect_set][:n_aspects]
    top_senti = [(t, w) for t, w, _ in report.entries
                 if t not in aspect_set and t in lexicon and abs(lexicon.senti(t)) >= threshold][:n_sentiment]
    if not top_aspects:
        raise ValueError("no aspect term occurs in the report")
    if not top_senti:
        raise ValueError(f"no sentiment word with |weight| >= {threshold} occurs in the report")
    a_mean = math.fsum(w for _, w in top_aspects) / len(top_aspects)
    s_mean = math.fsum(w for _, w in top_senti) / len(top_senti)
    ratio = a_mean / s_mean if s_mean else math.inf
    return GroupComparison(top_aspects, top_senti, a_mean, s_mean, ratio, threshold)


def export_heatmap(attribution: SentenceAttribution, path) -> tuple[Path, Path]:
    """Write ``path`` (JSON) and a CSV twin with one row per token."""
    if not path or not str(path).strip():
        raise ValueError("export_heatmap needs a file path")
    path = Path(path)
    path.write_text(json.dumps(attribution.to_json(), indent=1) + "\n", encoding="utf-8")
    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word_index", "token", "weight"])
        for i, tok, weight in zip(attribution.word_index, attribution.tokens, attribution.weights):
            w.writerow([i, tok, repr(weight)])
    return path, csv_path


def load_heatmap(path) -> SentenceAttribution:
    return SentenceAttribution.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
