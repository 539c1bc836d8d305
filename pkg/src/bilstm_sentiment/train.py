"""Mini-batch training, evaluation metrics and hyperparameter sweeps."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .corpus import LabeledExample, Vocabulary
from .lexicon import SentimentLexicon
from .model import Batch, BiLstmAttentionModel, LossConfig, backward, forward, loss

log = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Training diverged (non-finite loss or gradients)."""


# ---------------------------------------------------------------------------
# Optimizers


class Adam:
    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, p in params.items():
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(p)
                self.v[k] = np.zeros_like(p)
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= ((self.lr / bc1) * m / (np.sqrt(v / bc2) + self.eps)).astype(p.dtype)


class SGD:
    def __init__(self, lr=0.01):
        self.lr = lr

    def step(self, params, grads):
        for k, p in params.items():
            p -= (self.lr * grads[k]).astype(p.dtype)


# ---------------------------------------------------------------------------
# Data encoding


@dataclass
class EncodedExamples:
    ids: list[np.ndarray]
    weights: list[np.ndarray]
    labels: np.ndarray

    def __len__(self):
        return len(self.ids)

    def batch(self, rows) -> tuple[Batch, np.ndarray]:
        rows = list(rows)
        return (Batch.from_sequences([self.ids[r] for r in rows], [self.weights[r] for r in rows]),
                self.labels[rows])


def encode_examples(examples: list[LabeledExample], vocab: Vocabulary, lexicon: SentimentLexicon,
                    max_len: Optional[int] = None) -> EncodedExamples:
    """Token ids and lexicon weights per example, truncated to ``max_len``."""
    ids, weights = [], []
    for ex in examples:
        toks = ex.tokens[:max_len] if max_len else ex.tokens
        ids.append(np.asarray(vocab.encode(toks), dtype=np.int64))
        weights.append(np.array([lexicon.senti(t) for t in toks], dtype=np.float64))
    return EncodedExamples(ids, weights, np.array([ex.label for ex in examples], dtype=np.float64))


# ---------------------------------------------------------------------------
# Training


@dataclass
class TrainingConfig:
    epochs: int = 8
    batch_size: int = 32
    dropout_rate: float = 0.4
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 42
    mse_rooted: bool = True
    ce_two_term: bool = False
    metric_mode: str = "paper"

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.metric_mode not in ("paper", "standard"):
            raise ValueError(f"unknown metric mode {self.metric_mode!r}")

    @property
    def loss_config(self) -> LossConfig:
        return LossConfig(rooted=self.mse_rooted, two_term_ce=self.ce_two_term)


@dataclass
class EpochLog:
    epoch: int
    mean_loss: float
    train_accuracy: float
    wall_time: float


def train(model: BiLstmAttentionModel, data: EncodedExamples, config: TrainingConfig,
          on_epoch: Optional[Callable[[EpochLog], None]] = None) -> tuple[BiLstmAttentionModel, list[EpochLog]]:
    """Shuffled mini-batch optimization for ``config.epochs`` epochs.

    Updates ``model`` in place and returns it with the per-epoch log. The
    batch order and dropout masks come from ``config.seed`` alone.
    """
    if len(data) == 0:
        raise ValueError("empty training set")
    model.dropout_rate = config.dropout_rate
    rng = np.random.default_rng(config.seed)
    opt = Adam(config.learning_rate) if config.optimizer == "adam" else SGD(config.learning_rate)
    params = model.parameters()
    cfg = config.loss_config
    history = []
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        order = rng.permutation(len(data))
        total, correct = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            rows = order[start: start + config.batch_size]
            batch, y = data.batch(rows)
            trace = forward(model, batch, train_mode=True, rng=rng)
            batch_loss = loss(y, trace.prob, cfg)
            if not math.isfinite(batch_loss):
                raise NumericalError(f"non-finite loss at epoch {epoch}, batch starting {start}")
            grads = backward(model, trace, y, cfg)
            opt.step(params, grads)
            model.touch()
            total += batch_loss * len(rows)
            correct += int(np.sum((trace.prob >= 0.5) == (y == 1)))
        entry = EpochLog(epoch, total / len(data), correct / len(data), time.perf_counter() - t0)
        if not all(np.all(np.isfinite(p)) for p in params.values()):
            raise NumericalError(f"non-finite parameters after epoch {epoch}")
        log.info("epoch %d loss %.6f train-acc %.4f (%.1fs)", epoch, entry.mean_loss, entry.train_accuracy, entry.wall_time)
        history.append(entry)
        if on_epoch:
            on_epoch(entry)
    return model, history


def predict_all(model: BiLstmAttentionModel, data: EncodedExamples, batch_size: int = 256) -> np.ndarray:
    """Evaluation-mode probabilities, batched by length to limit padding."""
    order = sorted(range(len(data)), key=lambda r: (len(data.ids[r]), r))
    probs = np.empty(len(data), dtype=np.float64)
    for start in range(0, len(order), batch_size):
        rows = order[start: start + batch_size]
        batch, _ = data.batch(rows)
        probs[rows] = forward(model, batch).prob
    return probs


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class ConfusionCounts:
    TP: int = 0
    FP: int = 0
    TN: int = 0
    FN: int = 0

    @property
    def total(self):
        return self.TP + self.FP + self.TN + self.FN


def confusion_counts(y_true, y_pred) -> ConfusionCounts:
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    return ConfusionCounts(int(np.sum(y_true & y_pred)), int(np.sum(~y_true & y_pred)),
                           int(np.sum(~y_true & ~y_pred)), int(np.sum(y_true & ~y_pred)))


def _ratio(num, den):
    return num / den if den else None


@dataclass
class MetricsReport:
    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    mode: str
    counts: ConfusionCounts

    @classmethod
    def from_counts(cls, counts: ConfusionCounts, mode: str = "paper") -> "MetricsReport":
        """Paper mode takes recall as TN/(TN+FN); standard mode as TP/(TP+FN)."""
        if mode not in ("paper", "standard"):
            raise ValueError(f"unknown metric mode {mode!r}")
        c = counts
        accuracy = _ratio(c.TP + c.TN, c.total)
        precision = _ratio(c.TP, c.TP + c.FP)
        recall = _ratio(c.TN, c.TN + c.FN) if mode == "paper" else _ratio(c.TP, c.TP + c.FN)
        f1 = None
        if precision is not None and recall is not None and precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        return cls(accuracy, precision, recall, f1, mode, c)

    def to_json(self) -> dict:
        return {"mode": self.mode, "accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1, "counts": asdict(self.counts)}


def evaluate(model: BiLstmAttentionModel, data: EncodedExamples, mode: str = "paper") -> MetricsReport:
    if len(data) == 0:
        raise ValueError("evaluate needs at least one example")
    probs = predict_all(model, data)
    return MetricsReport.from_counts(confusion_counts(data.labels == 1, probs >= 0.5), mode)


# ---------------------------------------------------------------------------
# Sweeps

SWEEPABLE = ("epochs", "batch_size", "dropout_rate")
METRICS = ("accuracy", "precision", "recall", "f1")


def _pct(v):
    return "" if v is None else f"{100 * v:.1f}%"


@dataclass
class SweepResult:
    parameter: str
    rows: list[tuple[object, MetricsReport]] = field(default_factory=list)
    complete: bool = True

    def best(self) -> dict[str, object]:
        """Parameter value with the highest score per metric (first on ties)."""
        out = {}
        for m in METRICS:
            scored = [(getattr(r, m), v) for v, r in self.rows if getattr(r, m) is not None]
            if scored:
                top = max(s for s, _ in scored)
                out[m] = next(v for s, v in scored if s == top)
        return out

    def table(self) -> list[dict]:
        return [{"parameter": v, **{m: _pct(getattr(r, m)) for m in METRICS}} for v, r in self.rows]

    def to_json(self) -> dict:
        return {"parameter": self.parameter, "complete": self.complete, "best": self.best(),
                "rows": [{"value": v, **r.to_json()} for v, r in self.rows], "table": self.table()}

    def write(self, stem) -> None:
        stem = Path(stem)
        stem.with_suffix(".json").write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")
        with open(stem.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([self.parameter, *METRICS])
            for row in self.table():
                w.writerow([row["parameter"], *(row[m] for m in METRICS)])


class SweepAborted(RuntimeError):
    def __init__(self, message, partial: SweepResult):
        super().__init__(message)
        self.partial = partial


def sweep(base: TrainingConfig, parameter: str, values, make_model: Callable[[], BiLstmAttentionModel],
          train_data: EncodedExamples, test_data: EncodedExamples, partial_stem=None) -> SweepResult:
    """Train and evaluate one fresh model per value of ``parameter``.

    ``make_model`` must return an identically initialized model on every
    call. On failure the finished rows are written to ``partial_stem`` (if
    given) and ``SweepAborted`` is raised.
    """
    if parameter not in SWEEPABLE:
        raise ValueError(f"parameter must be one of {SWEEPABLE}")
    values = list(values)
    if len(values) < 2:
        raise ValueError("a sweep needs at least two values")
    result = SweepResult(parameter)
    for value in values:
        try:
            cfg = replace(base, **{parameter: value})
            model, _ = train(make_model(), train_data, cfg)
            result.rows.append((value, evaluate(model, test_data, base.metric_mode)))
        except Exception as exc:
            result.complete = False
            if partial_stem is not None:
                result.write(partial_stem)
            raise SweepAborted(f"sweep run {parameter}={value} failed: {exc}", result) from exc
    return result


def write_metrics(reports: list[MetricsReport], stem, extra: Optional[dict] = None) -> None:
    """JSON with every report plus a CSV row per mode (percentages, one decimal)."""
    stem = Path(stem)
    obj = {"reports": [r.to_json() for r in reports], **(extra or {})}
    stem.with_suffix(".json").write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    with open(stem.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode", *METRICS])
        for r in reports:
            w.writerow([r.mode, *(_pct(getattr(r, m)) for m in METRICS)])
