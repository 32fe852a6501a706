"""scikit-learn style classifier over labeled program subgraphs."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import ConfigError, DataError
from ..logs import LabeledSample, LogLevel, N_LEVELS
from ..vocab import DEFAULT_MIN_COUNT, Vocabulary, build_vocab
from .checkpoint import load_checkpoint, save_checkpoint
from .config import GGNNConfig
from .model import ensemble, prepare_sample, predict_proba
from .train import TrainingLog, train


def check_samples(X) -> list[LabeledSample]:
    """Validate an input collection of samples and return it as a list."""
    if isinstance(X, LabeledSample):
        raise DataError("expected a sequence of samples, got a single sample")
    try:
        samples = list(X)
    except TypeError:
        raise DataError(f"expected a sequence of samples, got {type(X).__name__}") from None
    for i, s in enumerate(samples):
        if not isinstance(s, LabeledSample):
            raise DataError(f"item {i} is {type(s).__name__}, not a LabeledSample")
    return samples


def check_labels(y, samples: Sequence[LabeledSample]) -> np.ndarray:
    """Level ordinals from ``y`` or, when ``y`` is None, from the samples."""
    if y is None:
        if any(s.label is None for s in samples):
            raise DataError("some samples are unlabeled and no labels were given")
        return np.asarray([int(s.label) for s in samples], dtype=np.int64)
    values = list(y)
    if len(values) != len(samples):
        raise DataError(f"{len(samples)} samples but {len(values)} labels")
    try:
        return np.asarray([int(LogLevel.parse(v)) for v in values], dtype=np.int64)
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _with_labels(samples, labels):
    return [LabeledSample(s.graph, s.center, LogLevel(int(l)), s.origin) for s, l in zip(samples, labels)]


class LogLevelGGNN(ClassifierMixin, BaseEstimator):
    """Gated graph neural network predicting a log level for each sample's center node.

    ``X`` is a sequence of :class:`LabeledSample`; ``y`` defaults to their
    own labels.  Classes are the level ordinals 0 (trace) through 5 (fatal).
    """

    def __init__(self, hidden_size=64, steps=8, mlp_sizes=(64, 32, 16), aggregation="mean",
                 gru_activation="tanh", learning_rate=1e-3, batch_size=32, max_epochs=200,
                 patience=10, class_weighting=False, min_count=DEFAULT_MIN_COUNT, random_state=0):
        self.hidden_size = hidden_size
        self.steps = steps
        self.mlp_sizes = mlp_sizes
        self.aggregation = aggregation
        self.gru_activation = gru_activation
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.class_weighting = class_weighting
        self.min_count = min_count
        self.random_state = random_state

    def _config(self) -> GGNNConfig:
        return GGNNConfig(
            hidden_size=self.hidden_size, steps=self.steps, mlp_sizes=tuple(self.mlp_sizes),
            aggregation=self.aggregation, gru_activation=self.gru_activation,
            learning_rate=self.learning_rate, batch_size=self.batch_size,
            max_epochs=self.max_epochs, patience=self.patience,
            class_weighting=self.class_weighting, seed=int(self.random_state or 0),
        )

    def fit(self, X, y=None, eval_set: Optional[tuple] = None, vocabulary: Optional[Vocabulary] = None,
            on_epoch=None):
        """Train on ``X``; ``eval_set=(X_valid, y_valid)`` drives early stopping.

        The vocabulary is built from ``X`` unless one is passed in.
        """
        samples = check_samples(X)
        if not samples:
            raise ConfigError("cannot fit on an empty training set")
        samples = _with_labels(samples, check_labels(y, samples))
        config = self._config()
        self.vocabulary_ = vocabulary if vocabulary is not None else build_vocab(
            [s.graph for s in samples], self.min_count)
        prepared = [prepare_sample(s, self.vocabulary_) for s in samples]
        valid = None
        if eval_set is not None:
            Xv, yv = eval_set
            valid_samples = check_samples(Xv)
            if valid_samples:
                valid_samples = _with_labels(valid_samples, check_labels(yv, valid_samples))
                valid = [prepare_sample(s, self.vocabulary_) for s in valid_samples]
        self.params_, self.training_log_ = train(prepared, valid, len(self.vocabulary_), config,
                                                 on_epoch=on_epoch)
        self.config_ = config
        self.classes_ = np.arange(N_LEVELS)
        self.n_epochs_ = len(self.training_log_.records)
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        samples = check_samples(X)
        if not samples:
            return np.empty((0, N_LEVELS))
        prepared = [prepare_sample(s, self.vocabulary_) for s in samples]
        return predict_proba(self.params_, prepared, self.config_)

    def predict(self, X) -> np.ndarray:
        """Most probable level ordinal per sample; ties go to the least severe level."""
        return np.argmax(self.predict_proba(X), axis=1)

    def score(self, X, y=None, sample_weight=None) -> float:
        samples = check_samples(X)
        labels = check_labels(y, samples)
        return super().score(samples, labels, sample_weight=sample_weight)

    def save(self, path) -> None:
        check_is_fitted(self, "params_")
        save_checkpoint(path, self.params_, self.config_, self.vocabulary_)

    @classmethod
    def load(cls, path, vocabulary: Vocabulary) -> "LogLevelGGNN":
        """Restore a fitted model; the vocabulary must be the one it was trained with."""
        params, config, _ = load_checkpoint(path, vocabulary)
        model = cls(hidden_size=config.hidden_size, steps=config.steps, mlp_sizes=config.mlp_sizes,
                    aggregation=config.aggregation, gru_activation=config.gru_activation,
                    learning_rate=config.learning_rate, batch_size=config.batch_size,
                    max_epochs=config.max_epochs, patience=config.patience,
                    class_weighting=config.class_weighting, random_state=config.seed)
        model.params_ = params
        model.config_ = config
        model.vocabulary_ = vocabulary
        model.classes_ = np.arange(N_LEVELS)
        model.training_log_ = TrainingLog()
        return model


class UniformPredictor:
    """Predicts the uniform distribution for every sample."""

    classes_ = np.arange(N_LEVELS)

    def predict_proba(self, X) -> np.ndarray:
        return np.full((len(check_samples(X)), N_LEVELS), 1.0 / N_LEVELS)


class EnsemblePredictor:
    """Weighted addition of two models' prediction arrays."""

    def __init__(self, first, second, weight: float):
        self.first = first
        self.second = second
        self.weight = weight

    def predict_proba(self, X) -> np.ndarray:
        samples = check_samples(X)
        return ensemble(self.first.predict_proba(samples), self.second.predict_proba(samples), self.weight)
