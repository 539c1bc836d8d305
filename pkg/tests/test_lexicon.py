import math

import pytest
from hypothesis import given, strategies as st

from bilstm_sentiment.lexicon import (
    SentimentLexicon, build_lexicon, merge, parse_aux_lexicon, parse_sentiwordnet, senti,
)

SWN_HEADER = "# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss\n"


def _swn(tmp_path, rows):
    p = tmp_path / "swn.tsv"
    p.write_text(SWN_HEADER + "".join("\t".join(map(str, r)) + "\n" for r in rows), encoding="utf-8")
    return p


def test_sentiwordnet_mean_over_senses(tmp_path):
    p = _swn(tmp_path, [
        ("a", "1", 0.75, 0, "good#1", "gloss"),
        ("a", "2", 0.25, 0, "good#2 full#3", ""),
        ("n", "3", 0.5, 0.5, "draw#1", ""),
        ("n", "4", 0.25, 0.25, "draw#2", ""),
    ])
    lex = parse_sentiwordnet(p)
    assert lex["good"] == 0.5 and lex["full"] == 0.25 and lex["draw"] == 0.0


def test_sentiwordnet_comment_only_and_malformed(tmp_path, caplog):
    assert parse_sentiwordnet(_swn(tmp_path, [])) == {}
    p = tmp_path / "bad.tsv"
    p.write_text("a\t1\t0.5\n" + "a\t2\tx\t0\tok#1\t\n" + "a\t3\t0.5\t0\tok#1\t\n", encoding="utf-8")
    assert parse_sentiwordnet(p) == {"ok": 0.5}
    assert caplog.text.count("skipping") == 2


def test_aux_lexicon(tmp_path):
    p = tmp_path / "aux.tsv"
    p.write_text("love v 0.0\n", encoding="utf-8")
    assert parse_aux_lexicon(p) == {"love": 0.0}
    p.write_text("")
    assert parse_aux_lexicon(p) == {}
    p.write_text("fine\ta\t0.4\nfine\tn\t0.2\n")
    assert parse_aux_lexicon(p)["fine"] == pytest.approx(0.3, abs=1e-15)


def test_merge_examples():
    lex = merge([{"love": 0.71, "solo": 0.2, "even": 0.4}, {"love": 0.0, "even": -0.4}])
    assert lex.senti("love") == 0.355
    assert lex.senti("solo") == 0.2
    assert lex.senti("even") == 0.0
    assert senti(lex, "qzx") == 1


def test_merge_needs_a_source():
    with pytest.raises(ValueError):
        merge([])


def test_build_lexicon_and_json_round_trip(tmp_path):
    swn = _swn(tmp_path, [("v", "1", 0.71, 0, "love#1", "")])
    aux = tmp_path / "aux.tsv"
    aux.write_text("love\tv\t0.0\n")
    lex = build_lexicon(swn, aux)
    assert lex.senti("love") == 0.355 and lex.sources == ("swn.tsv", "aux.tsv")
    lex.save(tmp_path / "lex.json")
    back = SentimentLexicon.load(tmp_path / "lex.json")
    assert back.entries == lex.entries and back.senti("absent") == 1


def test_bundled_resources_cover_love():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "data" / "lexicon"
    lex = build_lexicon(root / "sentiwordnet_3.0.tsv.gz", root / "pattern_adjectives.tsv")
    assert len(lex) > 100_000
    assert -1 <= lex.senti("love") <= 1 and lex.senti("great") > 0.3


scores = st.floats(-1, 1, allow_nan=False)


@given(st.lists(st.dictionaries(st.sampled_from("abcdef"), scores), min_size=1, max_size=4))
def test_merge_is_mean_over_containing_sources(sources):
    lex = merge(sources)
    for word in "abcdef":
        vals = [s[word] for s in sources if word in s]
        if vals:
            assert lex.senti(word) == pytest.approx(math.fsum(vals) / len(vals), abs=1e-15)
            assert -1 <= lex.senti(word) <= 1
        else:
            assert lex.senti(word) == 1


@given(st.lists(st.dictionaries(st.sampled_from("abcdef"), scores), min_size=1, max_size=4), st.randoms())
def test_merge_permutation_invariant_and_idempotent(sources, rnd):
    shuffled = list(sources)
    rnd.shuffle(shuffled)
    assert merge(shuffled).entries == merge(sources).entries
    for source in sources:
        assert merge([source, source]).entries == merge([source]).entries


@given(st.text(max_size=12))
def test_senti_is_total(word):
    lex = merge([{"love": 0.71}])
    assert isinstance(lex.senti(word), float)
