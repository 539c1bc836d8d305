import pytest

from bilstm_sentiment.config import ConfigError, PipelineConfig, derive_seed, dump_config, load_config


def test_defaults_match_published_settings():
    cfg = load_config()
    assert (cfg.train.epochs, cfg.train.batch_size, cfg.train.dropout_rate) == (8, 32, 0.4)
    assert (cfg.corpus.split_ratio, cfg.seed) == (0.7, 42)
    f = cfg.features
    assert (f.size, f.alpha, f.min_count, f.iters, f.aspect_k) == (200, 0.025, 5, 5, 160)


def test_flat_and_nested_yaml(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("train.epochs: 12\nmodel:\n  d_h: 64\nsweep.values: [0.2, 0.4]\n")
    cfg = load_config(p, {"train.batch_size": "16", "paths.embeddings": "none"})
    assert (cfg.train.epochs, cfg.model.d_h, cfg.train.batch_size) == (12, 64, 16)
    assert cfg.sweep.values == [0.2, 0.4] and cfg.paths.embeddings is None


@pytest.mark.parametrize("key,value", [("train.nope", 1), ("nope", 1), ("train", 3), ("train.epochs", "many"),
                                       ("train.epochs", 2.5), ("train.mse_rooted", "maybe"),
                                       ("corpus.split_ratio", 1.5), ("explain.aggregator", "median")])
def test_bad_keys_and_values(key, value):
    with pytest.raises(ConfigError):
        load_config(None, {key: value})


def test_bad_yaml(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_dump_round_trips(tmp_path):
    cfg = load_config(None, {"seed": 7, "sweep.values": "8,10"})
    p = tmp_path / "dump.yaml"
    p.write_text(dump_config(cfg))
    assert load_config(p).flat() == cfg.flat()


def test_derived_seeds_are_stable_and_distinct():
    assert derive_seed(42, "train") == derive_seed(42, "train")
    seeds = {derive_seed(42, s) for s in ("train", "skipgram", "model-init", "embed")}
    assert len(seeds) == 4 and all(0 <= s < 2**31 for s in seeds)
    assert derive_seed(43, "train") != derive_seed(42, "train")


def test_flat_covers_every_section():
    keys = PipelineConfig().flat()
    for prefix in ("paths.", "corpus.", "lexicon.", "features.", "model.", "train.", "explain.", "sweep."):
        assert any(k.startswith(prefix) for k in keys)
