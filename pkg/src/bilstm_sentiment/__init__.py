"""Sentence-level review sentiment with a lexicon-weighted peephole Bi-LSTM,
self-attention pooling, and attention-based interpretability reports."""

__version__ = "0.1.0"
