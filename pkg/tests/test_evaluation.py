import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from loglevel_ggnn.errors import ConfigError, DataError
from loglevel_ggnn.evaluation import (
    accuracy, binary_auc, confusion, evaluate, evaluate_predictions, format_comparison, macro_auc,
    make_splits, random_baseline, random_predictions,
)
from loglevel_ggnn.ggnn import EnsemblePredictor, UniformPredictor
from loglevel_ggnn.graph import Node, NodeType, ProgramGraph
from loglevel_ggnn.logs import LabeledSample, LogLevel, Origin

from .oracles import pairwise_auc, pairwise_macro_auc

ONE_NODE = ProgramGraph([Node(0, NodeType.AST_ELEMENT, "EmptyStatement")])


def samples_for(labels, project="p"):
    return [LabeledSample(ONE_NODE, 0, LogLevel(int(l)), Origin(project)) for l in labels]


def test_binary_auc_examples():
    assert binary_auc([0.1, 0.2, 0.8, 0.9], [False, False, True, True]) == 1.0
    assert binary_auc([0.9, 0.8, 0.2, 0.1], [False, False, True, True]) == 0.0
    assert binary_auc([0.5, 0.5, 0.5], [True, False, False]) == 0.5
    assert binary_auc([0.5, 0.6], [True, True]) is None


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 50).flatmap(lambda n: st.tuples(
    arrays(np.float64, (n, 6), elements=st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.7, 1.0])),
    arrays(np.int64, n, elements=st.integers(0, 5)))))
def test_macro_auc_matches_pairwise_oracle(case):
    preds, labels = case
    oracle = pairwise_macro_auc(preds, labels)
    if oracle is None:
        with pytest.raises(DataError):
            macro_auc(preds, labels)
    else:
        assert macro_auc(preds, labels) == oracle


def test_binary_auc_matches_oracle_with_ties():
    rng = np.random.default_rng(0)
    scores = rng.integers(0, 4, 40).astype(float)
    positive = rng.random(40) < 0.3
    assert binary_auc(scores, positive) == pytest.approx(pairwise_auc(scores, positive), abs=1e-12)


def test_metric_input_checks():
    with pytest.raises(DataError):
        accuracy(np.zeros((2, 5)), [0, 1])
    with pytest.raises(DataError):
        accuracy(np.zeros((2, 6)), [0])
    with pytest.raises(DataError):
        accuracy(np.zeros((0, 6)), [])
    with pytest.raises(DataError):
        accuracy(np.zeros((1, 6)), [6])


def test_split_proportions():
    plan = make_splits(samples_for([i % 6 for i in range(100)]), seed=0)
    counts = plan.counts()
    assert abs(counts["train"] - 70) <= 1 and abs(counts["valid"] - 10) <= 1 and abs(counts["test"] - 20) <= 1
    assert counts["unseen"] == counts["excluded"] == 0


def test_splits_are_deterministic_and_disjoint():
    samples = samples_for([i % 6 for i in range(60)], "a") + samples_for([i % 3 for i in range(30)], "b")
    a = make_splits(samples, unseen=["b"], seed=4)
    assert a == make_splits(samples, unseen=["b"], seed=4)
    assert a != make_splits(samples, unseen=["b"], seed=5)
    parts = [set(a.indices(p)) for p in ("train", "valid", "test", "unseen")]
    assert sum(map(len, parts)) == len(samples) and len(set().union(*parts)) == len(samples)
    assert a.indices("unseen") == list(range(60, 90))
    assert json.loads(json.dumps(a.to_dict()))["unseen"] == ["b"]


def test_splits_are_stratified():
    labels = [0] * 50 + [4] * 30 + [5] * 20
    plan = make_splits(samples_for(labels), seed=1)
    train_labels = [labels[i] for i in plan.indices("train")]
    assert 34 <= train_labels.count(0) <= 36
    assert 20 <= train_labels.count(4) <= 22
    assert 13 <= train_labels.count(5) <= 15


def test_seen_and_unseen_overlap_rejected():
    with pytest.raises(ConfigError):
        make_splits(samples_for([0, 1]), seen=["p"], unseen=["p"])


def test_only_unseen_projects_gives_empty_train():
    plan = make_splits(samples_for([0, 1, 2]), unseen=["p"])
    assert plan.indices("train") == [] and plan.counts()["unseen"] == 3
    plan = make_splits(samples_for([0, 1], "q"), seen=["p"])
    assert plan.counts()["excluded"] == 2


def test_confusion_examples():
    eye = np.eye(6)
    c = confusion(eye[[0, 1, 2]], [0, 1, 2])
    assert np.array_equal(c.matrix, np.diag([1, 1, 1, 0, 0, 0]))
    assert c.zero_misclassified and c.adjacent_error_rate == 0.0
    c = confusion(eye[[3]], [4])
    expected = np.zeros((6, 6), dtype=int)
    expected[4, 3] = 1
    assert np.array_equal(c.matrix, expected) and c.adjacent_error_rate == 1.0
    c = confusion(eye[[3, 0, 5]], [4, 4, 5])
    assert c.n_misclassified == 2 and c.adjacent_error_rate == 0.5


def test_argmax_ties_go_to_least_severe():
    assert accuracy(np.full((1, 6), 1 / 6), [0]) == 1.0


def test_report_consistency():
    rng = np.random.default_rng(3)
    labels = rng.integers(0, 6, 300)
    preds = random_predictions(300, seed=3)
    r = evaluate_predictions(preds, labels)
    assert r.accuracy == pytest.approx(np.trace(r.confusion) / r.confusion.sum())
    assert r.confusion.sum() == r.n == 300
    assert r.macro_auc == pytest.approx(np.mean(list(r.per_class_auc.values())))
    doc = json.loads(r.dumps())
    assert set(doc) >= {"accuracy", "macro_auc", "per_class_auc", "confusion", "adjacent_error_rate", "n"}
    assert list(doc["per_class_auc"]) == ["debug", "error", "fatal", "info", "trace", "warn"]
    rows = r.confusion_csv().splitlines()
    assert len(rows) == 7 and rows[0].split(",")[1:] == ["trace", "debug", "info", "warn", "error", "fatal"]


def test_missing_classes_excluded_from_macro_auc():
    preds = random_predictions(20, seed=1)
    labels = np.array([0, 1] * 10)
    r = evaluate_predictions(preds, labels)
    assert r.excluded_classes == ["info", "warn", "error", "fatal"]
    assert r.macro_auc == pytest.approx((r.per_class_auc["trace"] + r.per_class_auc["debug"]) / 2)


def test_omit_fatal_display():
    labels = np.array([i % 5 for i in range(2000)])
    r = evaluate_predictions(random_predictions(2000), labels)
    assert r.omit_fatal()
    assert "fatal" not in r.confusion_table() and "fatal" in r.confusion_table(omit_fatal=False)
    labels[0] = 5  # 1 in 2000 is still below the cutoff, 2 is not
    assert evaluate_predictions(random_predictions(2000), labels).omit_fatal()
    labels[1] = 5
    r = evaluate_predictions(random_predictions(2000), labels)
    assert not r.omit_fatal() and "fatal" in r.confusion_table()


def test_random_baseline_is_deterministic_and_uninformed():
    labels = np.repeat(np.arange(6), 500)
    a, b = random_baseline(labels, seed=0), random_baseline(labels, seed=0)
    assert a.dumps() == b.dumps()
    assert abs(a.accuracy - 1 / 6) <= 0.02 and abs(a.macro_auc - 0.5) <= 0.05


def test_ensemble_at_full_weight_reports_like_model():
    class Fixed:
        def predict_proba(self, samples):
            return random_predictions(len(samples), seed=9)

    samples = samples_for([i % 6 for i in range(30)])
    direct = evaluate(Fixed(), samples)
    blended = evaluate(EnsemblePredictor(Fixed(), UniformPredictor(), 1.0), samples)
    assert direct.dumps() == blended.dumps()


def test_evaluate_writes_files(tmp_path):
    samples = samples_for([i % 6 for i in range(12)])
    evaluate(UniformPredictor(), samples, tmp_path / "r.json", tmp_path / "c.csv")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["accuracy"] == 2 / 12 and doc["macro_auc"] == 0.5
    assert (tmp_path / "c.csv").read_text().count("\n") == 7
    with pytest.raises(DataError):
        evaluate(UniformPredictor(), [LabeledSample(ONE_NODE, 0)])


def test_comparison_table():
    r = evaluate_predictions(np.eye(6), np.arange(6))
    text = format_comparison({"ggnn": {"seen": r, "unseen": None}})
    assert "ggnn" in text and "1.000" in text and text.splitlines()[2].rstrip().endswith("-")
