import json
import random

import numpy as np
import pytest

from bilstm_sentiment.corpus import LabeledExample, Vocabulary
from bilstm_sentiment.lexicon import SentimentLexicon
from bilstm_sentiment.model import BiLstmAttentionModel, ModelConfig

POSITIVE = "great excellent love perfect nice good awesome".split()
NEGATIVE = "terrible awful broke poor bad horrible useless".split()
NOUNS = "cable fender pedal strap tuner string amp guitar sound price".split()


def tiny_model(n_words=6, d_x=3, d_h=2, d_a=3, seed=0, dtype="float64", init_range=0.5, dropout_rate=0.0):
    rng = np.random.default_rng(seed)
    emb = rng.normal(size=(n_words + 1, d_x))
    emb[0] = 0
    cfg = ModelConfig(d_x=d_x, d_h=d_h, d_a=d_a, dropout_rate=dropout_rate, init_range=init_range, dtype=dtype)
    return BiLstmAttentionModel.initialize(emb, cfg, rng)


def separable_corpus(n=20):
    """Half 'good' reviews, half 'bad', sharing neutral filler words."""
    filler = ["cable", "pedal", "sound", "strap"]
    out = []
    for i in range(n):
        label = i % 2
        toks = [filler[i % 4], "good" if label else "bad", filler[(i + 1) % 4]]
        out.append(LabeledExample(toks, label, i))
    return out


def write_reviews(path, n=300, seed=0):
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(n):
            pos = rng.random() < 0.7
            words = [rng.choice(NOUNS) for _ in range(3)] + [rng.choice(POSITIVE if pos else NEGATIVE) for _ in range(2)]
            rng.shuffle(words)
            fh.write(json.dumps({"reviewText": " ".join(words) + " the product", "overall": 5.0 if pos else 1.0}) + "\n")
    return path


SMALL_RUN = [
    "--set", "features.size=16", "--set", "model.d_h=8", "--set", "model.d_a=8",
    "--set", "features.aspect_k=5", "--set", "train.epochs=2",
]


@pytest.fixture
def reviews_file(tmp_path):
    return write_reviews(tmp_path / "reviews.json")


@pytest.fixture
def unit_lexicon():
    return SentimentLexicon({"good": 0.8, "bad": -0.6, "love": 0.355})


@pytest.fixture
def small_vocab():
    return Vocabulary(["bad", "good", "cable", "pedal", "sound", "strap"], [10, 10, 6, 5, 5, 5])


def desk_setup(seed=42, d_x=16, d_h=16, d_a=16):
    """Model plus encoded 20-example separable corpus, all derived from ``seed``."""
    from bilstm_sentiment.corpus import build_vocab
    from bilstm_sentiment.train import encode_examples

    examples = separable_corpus(20)
    vocab = build_vocab(examples, min_count=1)
    rng = np.random.default_rng(seed)
    emb = rng.normal(scale=0.5, size=(len(vocab) + 1, d_x)).astype(np.float32)
    model = BiLstmAttentionModel.initialize(emb, ModelConfig(d_x=d_x, d_h=d_h, d_a=d_a), rng)
    data = encode_examples(examples, vocab, SentimentLexicon({}))
    return model, data
