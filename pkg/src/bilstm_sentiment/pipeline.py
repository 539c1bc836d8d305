"""Pipeline stages. Each stage reads and writes declared artifacts under the workdir."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .config import PipelineConfig, derive_seed, dump_config
from .corpus import (DataError, DatasetSplit, Vocabulary, build_examples, build_vocab, examples_from_json,
                     examples_to_json, load_stopwords, preprocess, read_reviews, split_dataset)
from .explain import (REVIEW_ONE, aggregate_term_weights, attribute_sentence, compare_aspect_vs_sentiment,
                      export_heatmap, sentence_attention)
from .features import (SkipGramParams, extract_aspect_terms, fit_tfidf, load_aspects, load_embeddings, save_aspects,
                       save_embeddings, train_skipgram)
from .lexicon import SentimentLexicon, build_lexicon
from .model import BiLstmAttentionModel, ModelConfig, load_checkpoint, save_checkpoint
from .train import (EncodedExamples, MetricsReport, TrainingConfig, encode_examples, evaluate, sweep, train,
                    write_metrics)

log = logging.getLogger(__name__)

STAGES = ("preprocess", "build-lexicon", "embed", "train", "evaluate", "explain")

# Published final scores, kept next to ours for comparison only.
REFERENCE_SCORES = {"accuracy": 0.960, "precision": 0.960, "recall": 0.999, "f1": 0.979}


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Workdir:
    def __init__(self, root):
        self.root = Path(root)

    def __getattr__(self, name):
        layout = {
            "examples": "corpus/examples.json", "vocab": "corpus/vocab.json",
            "lexicon": "lexicon/lexicon.json",
            "embeddings": "features/embeddings.txt", "aspects": "features/aspects.json",
            "checkpoint": "model/checkpoint.bin", "train_log": "model/train_log.jsonl",
            "metrics": "reports/metrics", "aspect_report": "reports/aspect_weights.csv",
            "comparison": "reports/comparison.json", "heatmap": "reports/heatmap.json",
            "manifest": "manifest.json",
        }
        if name not in layout:
            raise AttributeError(name)
        return self.root / layout[name]

    def need(self, path: Path, producer: str) -> Path:
        if not path.exists():
            raise DataError(f"missing {path}; run the '{producer}' command first")
        return path


def _write_json(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=False) + "\n", encoding="utf-8")
    return path


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def required_inputs(cfg: PipelineConfig, stage: str) -> list[str]:
    p = cfg.paths
    if stage == "preprocess":
        return [p.dataset] + ([p.stopwords] if p.stopwords else [])
    if stage == "build-lexicon":
        return [p.sentiwordnet, p.aux_lexicon]
    if stage == "embed" and p.embeddings:
        return [p.embeddings]
    return []


def check_inputs(cfg: PipelineConfig, stages) -> None:
    for stage in stages:
        for path in required_inputs(cfg, stage):
            if not Path(path).exists():
                raise StageError(stage, DataError(f"input file not found: {path}"))


# ---------------------------------------------------------------------------
# Stages


def run_preprocess(cfg: PipelineConfig, wd: Workdir) -> dict:
    reviews, skipped = read_reviews(cfg.paths.dataset)
    stopwords = load_stopwords(cfg.paths.stopwords)
    examples, stats = build_examples(reviews, stopwords, cfg.corpus.positive_min, cfg.corpus.negative_max)
    if not examples:
        raise DataError("zero usable records after labeling and preprocessing")
    split = split_dataset(examples, cfg.corpus.split_ratio, cfg.seed)
    vocab = build_vocab(examples, cfg.features.min_count)
    summary = {"raw_records": len(reviews), "skipped_records": skipped, "neutral_dropped": stats.neutral,
               "empty_dropped": stats.empty, "examples": stats.kept, "train": len(split.train),
               "test": len(split.test), "positive": sum(e.label for e in examples), "vocab_size": len(vocab)}
    _write_json(wd.examples, {"seed": split.seed, "summary": summary,
                              "train": examples_to_json(split.train), "test": examples_to_json(split.test)})
    _write_json(wd.vocab, vocab.to_json())
    return summary


def load_split(wd: Workdir) -> DatasetSplit:
    obj = _read_json(wd.need(wd.examples, "preprocess"))
    return DatasetSplit(examples_from_json(obj["train"]), examples_from_json(obj["test"]), obj["seed"])


def load_vocab(wd: Workdir) -> Vocabulary:
    return Vocabulary.from_json(_read_json(wd.need(wd.vocab, "preprocess")))


def run_lexicon(cfg: PipelineConfig, wd: Workdir) -> dict:
    lex = build_lexicon(cfg.paths.sentiwordnet, cfg.paths.aux_lexicon, cfg.lexicon.default)
    if not len(lex):
        raise DataError("merged lexicon is empty")
    wd.lexicon.parent.mkdir(parents=True, exist_ok=True)
    lex.save(wd.lexicon)
    return {"entries": len(lex), "source_entries": lex.metadata.get("entry_counts")}


def load_lexicon(wd: Workdir) -> SentimentLexicon:
    return SentimentLexicon.load(wd.need(wd.lexicon, "build-lexicon"))


def run_embed(cfg: PipelineConfig, wd: Workdir) -> dict:
    split = load_split(wd)
    vocab = load_vocab(wd)
    examples = split.train + split.test
    f = cfg.features
    if cfg.paths.embeddings:
        table = load_embeddings(cfg.paths.embeddings, vocab, np.random.default_rng(derive_seed(cfg.seed, "embed")))
    else:
        params = SkipGramParams(size=f.size, alpha=f.alpha, min_alpha=f.min_alpha, min_count=f.min_count,
                                iters=f.iters, window=f.window, negatives=f.negatives, batch_words=f.batch_words,
                                seed=derive_seed(cfg.seed, "skipgram"))
        table = train_skipgram(examples, vocab, params)
    wd.embeddings.parent.mkdir(parents=True, exist_ok=True)
    save_embeddings(table, vocab, wd.embeddings)
    aspects = extract_aspect_terms(fit_tfidf(examples), k=f.aspect_k)
    save_aspects(aspects, wd.aspects)
    return {"embedding_rows": int(table.shape[0]), "dim": int(table.shape[1]), "aspect_terms": len(aspects)}


def _training_config(cfg: PipelineConfig) -> TrainingConfig:
    return dataclasses.replace(cfg.train, seed=derive_seed(cfg.seed, "train"))


def _fresh_model(cfg: PipelineConfig, wd: Workdir, vocab: Vocabulary) -> BiLstmAttentionModel:
    table = load_embeddings(wd.need(wd.embeddings, "embed"), vocab)
    mcfg = ModelConfig(d_x=table.shape[1], d_h=cfg.model.d_h, d_a=cfg.model.d_a, dropout_rate=cfg.train.dropout_rate,
                       init_range=cfg.model.init_range, forget_bias=cfg.model.forget_bias)
    return BiLstmAttentionModel.initialize(table, mcfg, np.random.default_rng(derive_seed(cfg.seed, "model-init")))


def _encoded(cfg, wd):
    split, vocab, lex = load_split(wd), load_vocab(wd), load_lexicon(wd)
    enc = lambda xs: encode_examples(xs, vocab, lex, cfg.corpus.max_len)  # noqa: E731
    return split, vocab, lex, enc(split.train), enc(split.test)


def run_train(cfg: PipelineConfig, wd: Workdir) -> dict:
    split, vocab, lex, train_data, _ = _encoded(cfg, wd)
    model = _fresh_model(cfg, wd, vocab)
    tcfg = _training_config(cfg)
    wd.train_log.parent.mkdir(parents=True, exist_ok=True)
    with open(wd.train_log, "w", encoding="utf-8") as fh:
        def on_epoch(e):
            fh.write(json.dumps(asdict(e)) + "\n")
            fh.flush()
        model, history = train(model, train_data, tcfg, on_epoch)
    save_checkpoint(model, wd.checkpoint, vocab.content_hash(),
                    {"training": asdict(tcfg), "model": asdict(cfg.model), "max_len": cfg.corpus.max_len})
    return {"epochs": len(history), "final_loss": history[-1].mean_loss if history else None}


def load_model(wd: Workdir, vocab: Vocabulary) -> BiLstmAttentionModel:
    model, header, _ = load_checkpoint(wd.need(wd.checkpoint, "train"))
    if header.vocab_hash != vocab.content_hash():
        raise DataError("checkpoint was trained against a different vocabulary")
    return model


def run_evaluate(cfg: PipelineConfig, wd: Workdir) -> dict:
    split, vocab, lex, train_data, test_data = _encoded(cfg, wd)
    model = load_model(wd, vocab)
    reports = [evaluate(model, test_data, "paper")]
    reports.append(MetricsReport.from_counts(reports[0].counts, "standard"))
    wd.metrics.parent.mkdir(parents=True, exist_ok=True)
    write_metrics(reports, wd.metrics, extra={"split": "test", "reference": REFERENCE_SCORES})
    return {r.mode: r.to_json() for r in reports}


def run_explain(cfg: PipelineConfig, wd: Workdir) -> dict:
    split, vocab, lex = load_split(wd), load_vocab(wd), load_lexicon(wd)
    model = load_model(wd, vocab)
    aspects = load_aspects(wd.need(wd.aspects, "embed"))
    e = cfg.explain
    sentences = sentence_attention(model, split.train + split.test, vocab, lex, max_len=cfg.corpus.max_len)
    all_words = aggregate_term_weights(sentences, None, e.aggregator)
    aspect_report = dataclasses.replace(all_words, entries=[x for x in all_words.entries if x[0] in aspects])
    wd.aspect_report.parent.mkdir(parents=True, exist_ok=True)
    aspect_report.write_csv(wd.aspect_report)
    summary = {"aspect_terms": len(aspects), "aspects_seen": len(aspect_report.entries),
               "top_aspects": aspect_report.ranking()[: e.top_aspects]}
    if all_words.aggregator == "average":
        cmp = compare_aspect_vs_sentiment(all_words, lex, aspects, e.threshold, e.top_aspects, e.top_sentiment)
        _write_json(wd.comparison, cmp.to_json())
        summary["ratio"] = cmp.ratio
    tokens = preprocess(e.review, load_stopwords(cfg.paths.stopwords)) if e.review else REVIEW_ONE
    attribution = attribute_sentence(model, tokens, vocab, lex)
    export_heatmap(attribution, wd.heatmap)
    summary["heatmap_sum"] = float(sum(attribution.weights))
    return summary


def run_sweep(cfg: PipelineConfig, wd: Workdir) -> dict:
    split, vocab, lex, train_data, test_data = _encoded(cfg, wd)
    stem = wd.root / "reports" / f"sweep_{cfg.sweep.parameter}"
    stem.parent.mkdir(parents=True, exist_ok=True)
    result = sweep(_training_config(cfg), cfg.sweep.parameter, cfg.sweep.values,
                   lambda: _fresh_model(cfg, wd, vocab), train_data, test_data, partial_stem=stem)
    result.write(stem)
    return {"best": result.best(), "rows": len(result.rows)}


RUNNERS = {
    "preprocess": run_preprocess, "build-lexicon": run_lexicon, "embed": run_embed, "train": run_train,
    "evaluate": run_evaluate, "explain": run_explain, "sweep": run_sweep,
}


# ---------------------------------------------------------------------------
# Manifest


def update_manifest(cfg: PipelineConfig, wd: Workdir, stage: str, seconds: float, summary: dict) -> None:
    manifest = _read_json(wd.manifest) if wd.manifest.exists() else {}
    manifest["tool_version"] = __version__
    manifest["config"] = cfg.flat()
    inputs = manifest.setdefault("inputs", {})
    for path in required_inputs(cfg, stage):
        inputs[path] = sha256_file(path)
    manifest["artifacts"] = {
        str(p.relative_to(wd.root)): sha256_file(p)
        for p in sorted(wd.root.rglob("*")) if p.is_file() and p.name != "manifest.json"
    }
    manifest.setdefault("stages", {})[stage] = {"summary": summary, "seconds": round(seconds, 3),
                                               "finished": time.strftime("%Y-%m-%dT%H:%M:%S")}
    _write_json(wd.manifest, manifest)
    (wd.root / "config.yaml").write_text(dump_config(cfg), encoding="utf-8")


def run_stage(cfg: PipelineConfig, stage: str) -> dict:
    wd = Workdir(cfg.paths.workdir)
    check_inputs(cfg, [stage])
    wd.root.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        summary = RUNNERS[stage](cfg, wd)
    except Exception as exc:
        raise StageError(stage, exc) from exc
    update_manifest(cfg, wd, stage, time.perf_counter() - t0, summary)
    return summary


def full_run(cfg: PipelineConfig) -> dict:
    check_inputs(cfg, STAGES)
    return {stage: run_stage(cfg, stage) for stage in STAGES}
