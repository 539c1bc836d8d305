import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilstm_sentiment.model import checkpoint_bytes
from bilstm_sentiment.train import (
    SGD, Adam, ConfusionCounts, MetricsReport, NumericalError, SweepAborted, TrainingConfig, confusion_counts,
    evaluate, sweep, train, write_metrics,
)

from conftest import desk_setup


def naive_counts(y_true, y_pred):
    tp = fp = tn = fn = 0
    for t, p in zip(y_true, y_pred):
        if t and p:
            tp += 1
        elif p:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def test_worked_fixture_paper_mode():
    r = MetricsReport.from_counts(ConfusionCounts(TP=5, FP=1, TN=3, FN=1), "paper")
    assert r.accuracy == pytest.approx(0.8, abs=1e-12)
    assert r.precision == pytest.approx(5 / 6, abs=1e-12)
    assert r.recall == pytest.approx(0.75, abs=1e-12)
    assert r.f1 == pytest.approx(0.7895, abs=1e-4)
    s = MetricsReport.from_counts(ConfusionCounts(5, 1, 3, 1), "standard")
    assert s.recall == pytest.approx(5 / 6)


def test_perfect_classifier_and_absent_metrics():
    r = MetricsReport.from_counts(ConfusionCounts(TP=4, TN=2))
    assert (r.accuracy, r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0, 1.0)
    only_pos = MetricsReport.from_counts(ConfusionCounts(TP=3, FP=1))
    assert only_pos.recall is None and only_pos.f1 is None
    assert json.loads(json.dumps(only_pos.to_json()))["recall"] is None


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=60), st.sampled_from(["paper", "standard"]))
def test_counts_match_naive_oracle(pairs, mode):
    y_true = [a for a, _ in pairs]
    y_pred = [b for _, b in pairs]
    c = confusion_counts(y_true, y_pred)
    assert (c.TP, c.FP, c.TN, c.FN) == naive_counts(y_true, y_pred)
    assert c.total == len(pairs)
    r = MetricsReport.from_counts(c, mode)
    for m in (r.accuracy, r.precision, r.recall, r.f1):
        assert m is None or 0 <= m <= 1
    if r.f1 is not None:
        assert r.f1 == pytest.approx(2 * r.precision * r.recall / (r.precision + r.recall), abs=1e-12)


@given(st.integers(0, 50), st.integers(0, 50))
def test_symmetric_fixture_recalls_coincide(a, b):
    c = ConfusionCounts(TP=a, FP=b, TN=a, FN=b)
    assert MetricsReport.from_counts(c, "paper").recall == MetricsReport.from_counts(c, "standard").recall


@pytest.mark.parametrize("kwargs", [{"epochs": -1}, {"batch_size": 0}, {"dropout_rate": 1.0}, {"optimizer": "rmsprop"},
                                    {"metric_mode": "odd"}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        TrainingConfig(**kwargs)


def test_adam_first_step_moves_by_lr():
    p = {"w": np.array([1.0, -2.0, 0.0])}
    Adam(lr=0.1).step(p, {"w": np.array([3.0, -0.5, 0.0])})
    np.testing.assert_allclose(p["w"], [0.9, -1.9, 0.0], atol=1e-7)
    q = {"w": np.array([1.0])}
    SGD(lr=0.5).step(q, {"w": np.array([2.0])})
    assert q["w"][0] == 0.0


def test_zero_epochs_leaves_model_unchanged():
    model, data = desk_setup(0)
    before = checkpoint_bytes(model)
    model, history = train(model, data, TrainingConfig(epochs=0))
    assert history == [] and checkpoint_bytes(model) == before


def test_training_is_deterministic_and_learns():
    cfg = TrainingConfig(epochs=30, batch_size=4, seed=5)
    a, hist = train(*desk_setup(5), cfg)
    b, _ = train(*desk_setup(5), cfg)
    assert checkpoint_bytes(a) == checkpoint_bytes(b)
    assert evaluate(a, desk_setup(5)[1]).accuracy == 1.0
    losses = [e.mean_loss for e in hist]
    smooth = [sum(losses[i:i + 3]) / 3 for i in range(2, len(losses) - 2)]
    assert all(y <= x + 1e-12 for x, y in zip(smooth, smooth[1:]))


def test_divergence_raises_numerical_error():
    model, data = desk_setup(0)
    model.w_o[0] = np.nan
    with pytest.raises(NumericalError):
        train(model, data, TrainingConfig(epochs=1))


def test_evaluate_rejects_empty():
    model, data = desk_setup(0)
    data.ids, data.weights, data.labels = [], [], np.array([])
    with pytest.raises(ValueError):
        evaluate(model, data)


def _sweep(parameter, values, stem=None, **base):
    model, data = desk_setup(1)
    return sweep(TrainingConfig(epochs=2, batch_size=4, **base), parameter, values, model.copy, data, data, stem)


def test_sweep_rows_and_best(tmp_path):
    result = _sweep("dropout_rate", [0.2, 0.4, 0.6, 0.8])
    assert [v for v, _ in result.rows] == [0.2, 0.4, 0.6, 0.8]
    assert set(result.best()) <= {"accuracy", "precision", "recall", "f1"}
    result.write(tmp_path / "sweep")
    rows = list(csv.reader(open(tmp_path / "sweep.csv")))
    assert rows[0] == ["dropout_rate", "accuracy", "precision", "recall", "f1"] and len(rows) == 5
    assert all(cell == "" or cell.endswith("%") for row in rows[1:] for cell in row[1:])


def test_sweep_repeated_value_gives_identical_rows():
    result = _sweep("epochs", [3, 3])
    assert result.rows[0][1] == result.rows[1][1]


def test_sweep_validation_and_abort(tmp_path):
    with pytest.raises(ValueError):
        _sweep("learning_rate", [0.1, 0.2])
    with pytest.raises(ValueError):
        _sweep("epochs", [8])
    with pytest.raises(SweepAborted) as info:
        _sweep("batch_size", [4, 0], stem=tmp_path / "partial")
    assert len(info.value.partial.rows) == 1 and not info.value.partial.complete
    assert json.loads((tmp_path / "partial.json").read_text())["complete"] is False


def test_write_metrics(tmp_path):
    reports = [MetricsReport.from_counts(ConfusionCounts(5, 1, 3, 1), m) for m in ("paper", "standard")]
    write_metrics(reports, tmp_path / "m", extra={"note": "x"})
    obj = json.loads((tmp_path / "m.json").read_text())
    assert obj["note"] == "x" and [r["mode"] for r in obj["reports"]] == ["paper", "standard"]
    rows = list(csv.reader(open(tmp_path / "m.csv")))
    assert rows[1] == ["paper", "80.0%", "83.3%", "75.0%", "78.9%"]
