import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilstm_sentiment.corpus import LabeledExample
from bilstm_sentiment.explain import (
    REVIEW_ONE, AspectWeightReport, aggregate_aspect_weights, aggregate_term_weights, attribute_sentence,
    compare_aspect_vs_sentiment, export_heatmap, load_heatmap, sentence_attention,
)
from bilstm_sentiment.lexicon import SentimentLexicon
from bilstm_sentiment.train import TrainingConfig, train

from conftest import desk_setup, tiny_model


def test_review_one_has_thirteen_tokens():
    assert len(REVIEW_ONE) == 13 and REVIEW_ONE[:2] == ["fine", "cable"]


def test_single_token_weight_is_one(small_vocab, unit_lexicon):
    att = attribute_sentence(tiny_model(), ["cable"], small_vocab, unit_lexicon)
    assert att.weights == [1.0] and att.word_index == [1]


def test_identical_tokens_equal_without_recurrence(small_vocab, unit_lexicon):
    model = tiny_model(d_h=2, seed=3)
    for cell in (model.forward_cell, model.backward_cell):
        for gate in cell.gates():
            gate.U[...] = 0
            gate.V[...] = 0
        # c_{t-1} still leaks through the forget gate, so shut it
        cell.forget.W[...] = 0
        cell.forget.b[...] = -50
    att = attribute_sentence(model, ["good", "good"], small_vocab, unit_lexicon)
    assert att.weights[0] == att.weights[1] == 0.5


def test_empty_sentence_is_an_error(small_vocab, unit_lexicon):
    with pytest.raises(ValueError):
        attribute_sentence(tiny_model(), [], small_vocab, unit_lexicon)


@pytest.mark.parametrize("f,expected", [("average", 0.3), ("mean", 0.3), ("max", 0.4), ("sum", 0.6)])
def test_aggregators(f, expected):
    report = aggregate_term_weights([(["cable", "x"], [0.2, 0.8]), (["cable", "y"], [0.4, 0.6])], ["cable"], f)
    assert report.weight("cable") == pytest.approx(expected, abs=1e-15)
    assert report.entries[0][2] == 2


def test_repeated_term_in_one_sentence_is_summed_first():
    report = aggregate_term_weights([(["cable", "cable", "x"], [0.1, 0.2, 0.7]), (["cable"], [1.0])], None, "average")
    assert report.weight("cable") == pytest.approx(0.65) and report.weight("x") == pytest.approx(0.7)
    assert report.ranking() == ["x", "cable"]
    with pytest.raises(ValueError):
        aggregate_term_weights([], None, "median")


def test_compare_ratio_fixture():
    lex = SentimentLexicon({"great": 0.8, "meh": 0.1})
    report = AspectWeightReport("average", [("cable", 0.3, 4), ("pedal", 0.3, 2), ("great", 0.1, 5), ("meh", 0.05, 1)])
    cmp = compare_aspect_vs_sentiment(report, lex, ["cable", "pedal"])
    assert cmp.ratio == pytest.approx(3.0, abs=1e-12)
    assert [t for t, _ in cmp.sentiment_words] == ["great"]


def test_compare_identical_weights_ratio_one():
    lex = SentimentLexicon({"great": 0.8, "awful": -0.7})
    report = AspectWeightReport("average", [(t, 0.25, 1) for t in ("amp", "awful", "cable", "great")])
    assert compare_aspect_vs_sentiment(report, lex, ["cable", "amp"]).ratio == 1.0


def test_compare_errors():
    lex = SentimentLexicon({"great": 0.8})
    report = AspectWeightReport("average", [("cable", 0.3, 1)])
    with pytest.raises(ValueError, match="sentiment"):
        compare_aspect_vs_sentiment(report, lex, ["cable"])
    with pytest.raises(ValueError, match="aspect"):
        compare_aspect_vs_sentiment(AspectWeightReport("average", [("great", 0.3, 1)]), lex, ["cable"])
    with pytest.raises(ValueError):
        compare_aspect_vs_sentiment(AspectWeightReport("max", []), lex, ["cable"])


def test_heatmap_export_round_trip(tmp_path, small_vocab, unit_lexicon):
    att = attribute_sentence(tiny_model(), REVIEW_ONE, small_vocab, unit_lexicon)
    json_path, csv_path = export_heatmap(att, tmp_path / "heat.json")
    rows = list(csv.reader(open(csv_path)))
    assert rows[0] == ["word_index", "token", "weight"]
    assert len(rows) == 14 and [int(r[0]) for r in rows[1:]] == list(range(1, 14))
    back = load_heatmap(json_path)
    assert back == att
    assert sum(back.weights) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        export_heatmap(att, "")


def test_corpus_aggregation_on_trained_model():
    model, data = desk_setup(2)
    model, _ = train(model, data, TrainingConfig(epochs=10, batch_size=4, seed=2))
    from conftest import separable_corpus
    from bilstm_sentiment.corpus import build_vocab
    examples = separable_corpus(20)
    vocab = build_vocab(examples, 1)
    lex = SentimentLexicon({})
    sents = sentence_attention(model, examples, vocab, lex, batch_size=7)
    assert [len(t) for t, _ in sents] == [len(e.tokens) for e in examples]
    for _, w in sents:
        assert sum(w) == pytest.approx(1.0, abs=1e-6)
    report = aggregate_aspect_weights(model, examples, ["cable", "pedal"], vocab, lex)
    assert set(report.as_dict()) == {"cable", "pedal"}
    with pytest.raises(ValueError):
        aggregate_aspect_weights(model, examples, [], vocab, lex)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=5), min_size=1, max_size=8))
def test_aggregator_ordering(per_sentence):
    sents = [(["t"] * len(ws), ws) for ws in per_sentence]
    mx = aggregate_term_weights(sents, ["t"], "max").weight("t")
    avg = aggregate_term_weights(sents, ["t"], "average").weight("t")
    total = aggregate_term_weights(sents, ["t"], "sum").weight("t")
    assert avg <= mx + 1e-12 and mx <= total + 1e-12
