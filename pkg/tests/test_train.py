import json

import numpy as np
import pytest
from sklearn.base import clone

from loglevel_ggnn.errors import ConfigError, DataError
from loglevel_ggnn.ggnn import (
    EnsemblePredictor, GGNNConfig, LogLevelGGNN, UniformPredictor, VocabularyMismatchError,
)
from loglevel_ggnn.ggnn.checkpoint import dumps_checkpoint, file_digest, loads_checkpoint
from loglevel_ggnn.ggnn.model import prepare_sample
from loglevel_ggnn.ggnn.train import train
from loglevel_ggnn.logs import LabeledSample
from loglevel_ggnn.synthetic import generate_samples
from loglevel_ggnn.vocab import build_vocab

SMALL = dict(hidden_size=8, steps=2, mlp_sizes=(8, 8, 8), batch_size=8)


@pytest.fixture(scope="module")
def data():
    return generate_samples(2, seed=11)


def small_model(**kw):
    return LogLevelGGNN(**{**SMALL, "max_epochs": 3, "patience": 10, **kw})


def test_get_params_and_clone():
    m = small_model(learning_rate=0.01)
    params = m.get_params()
    assert params["learning_rate"] == 0.01 and params["hidden_size"] == 8
    c = clone(m)
    assert c.get_params() == params and not hasattr(c, "params_")
    c.set_params(steps=3)
    assert c.steps == 3


def test_patience_zero_runs_one_epoch(data):
    m = small_model(patience=0, max_epochs=50).fit(data, eval_set=(data[:6], None))
    assert m.n_epochs_ == 1 and len(m.training_log_.records) == 1


def test_max_epochs_bound(data):
    m = small_model(max_epochs=2, patience=100).fit(data)
    assert m.n_epochs_ == 2 and not m.training_log_.stopped_early


def test_callback_can_stop(data):
    seen = []
    m = small_model(max_epochs=10).fit(data, on_epoch=lambda r: seen.append(r.epoch) or r.epoch == 2)
    assert seen == [1, 2] and m.training_log_.best_epoch == 2 and m.training_log_.stopped_early


def test_training_is_deterministic(data, tmp_path):
    a = small_model().fit(data)
    b = small_model().fit(data)
    assert a.training_log_.dumps() == b.training_log_.dumps()
    a.save(tmp_path / "a.ckpt")
    b.save(tmp_path / "b.ckpt")
    assert file_digest(tmp_path / "a.ckpt") == file_digest(tmp_path / "b.ckpt")
    c = small_model(random_state=1).fit(data)
    assert not np.array_equal(c.params_["msg_W"], a.params_["msg_W"])


def test_training_log_contents(data):
    m = small_model().fit(data, eval_set=(data[:6], None))
    doc = json.loads(m.training_log_.dumps())
    assert [r["epoch"] for r in doc["epochs"]] == [1, 2, 3]
    assert all(r["train_loss"] >= 0 for r in doc["epochs"])
    assert 1 <= doc["best_epoch"] <= 3


def test_empty_training_split():
    with pytest.raises(ConfigError):
        small_model().fit([])
    with pytest.raises(ConfigError):
        train([], None, 10, GGNNConfig())


def test_unlabeled_training_samples_rejected(data):
    unlabeled = [LabeledSample(s.graph, s.center) for s in data]
    with pytest.raises(DataError):
        small_model().fit(unlabeled)
    m = small_model(max_epochs=1).fit(unlabeled, [int(s.label) for s in data])
    assert m.n_epochs_ == 1


def test_input_validation(data):
    with pytest.raises(DataError):
        small_model().fit(data[0])
    with pytest.raises(DataError):
        small_model().fit([1, 2, 3])
    with pytest.raises(DataError):
        small_model().fit(data, y=[0])
    with pytest.raises(DataError):
        small_model().fit(data, y=["loud"] * len(data))


def test_predict_outputs(data):
    m = small_model().fit(data)
    p = m.predict_proba(data)
    assert p.shape == (len(data), 6)
    assert np.all(p >= 0) and np.allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert np.array_equal(m.predict(data), np.argmax(p, axis=1))
    assert m.predict_proba([]).shape == (0, 6)
    assert 0.0 <= m.score(data) <= 1.0


def test_unfitted_model_refuses_to_predict(data):
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        small_model().predict(data)


def test_checkpoint_round_trip(data, tmp_path):
    m = small_model().fit(data)
    path = tmp_path / "m.ckpt"
    m.save(path)
    back = LogLevelGGNN.load(path, m.vocabulary_)
    assert np.array_equal(back.predict_proba(data), m.predict_proba(data))
    assert back.get_params()["hidden_size"] == 8
    doc = json.loads(path.read_text())
    assert doc["config"]["hidden_size"] == 8 and doc["config"]["n_channels"] == 26
    assert doc["vocab_hash"] == m.vocabulary_.hash


def test_checkpoint_rejects_other_vocabulary(data, tmp_path):
    m = small_model().fit(data)
    path = tmp_path / "m.ckpt"
    m.save(path)
    other = build_vocab([s.graph for s in data[:3]], min_count=1)
    with pytest.raises(VocabularyMismatchError):
        LogLevelGGNN.load(path, other)


def test_checkpoint_rejects_bad_shapes(data):
    m = small_model().fit(data)
    doc = json.loads(dumps_checkpoint(m.params_, m.config_, m.vocabulary_))
    doc["tensors"]["gru_b"]["shape"] = [2, 12]
    with pytest.raises(DataError):
        loads_checkpoint(json.dumps(doc))
    del doc["tensors"]["gru_b"]
    with pytest.raises(DataError):
        loads_checkpoint(json.dumps(doc))
    with pytest.raises(DataError):
        loads_checkpoint("{}")


def test_ensemble_with_weight_one_matches_model(data):
    m = small_model().fit(data)
    e = EnsemblePredictor(m, UniformPredictor(), 1.0)
    assert np.array_equal(e.predict_proba(data), m.predict_proba(data))
    half = EnsemblePredictor(m, UniformPredictor(), 0.5).predict_proba(data)
    assert np.allclose(half, 0.5 * m.predict_proba(data) + 0.5 / 6, atol=1e-12)


def test_class_weighting_trains(data):
    m = small_model(class_weighting=True, max_epochs=1).fit(data[:7])
    assert m.n_epochs_ == 1


def test_prepared_label_matches_sample(data):
    vocab = build_vocab([s.graph for s in data])
    p = prepare_sample(data[0], vocab)
    assert p.label == int(data[0].label) and p.n_nodes == len(data[0].graph.nodes)
    assert len(p.src) == 2 * len(data[0].graph.edges)
