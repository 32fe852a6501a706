"""Mini-batch training with Adam and validation-based early stopping."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ConfigError, DataError
from ..evaluation import accuracy, per_class_auc
from .config import GGNNConfig
from .model import PreparedSample, class_weight_vector, collate, loss_and_gradients, predict_proba
from .params import Params, copy_params, init_params

logger = logging.getLogger(__name__)


class Adam:
    def __init__(self, params: Params, config: GGNNConfig):
        self.lr = config.learning_rate
        self.beta1 = config.beta1
        self.beta2 = config.beta2
        self.eps = config.adam_eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name in params:
            g = grads[name]
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    valid_auc: Optional[float]
    valid_accuracy: float
    improved: bool


@dataclass
class TrainingLog:
    records: list = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return {"best_epoch": self.best_epoch, "stopped_early": self.stopped_early,
                "epochs": [asdict(r) for r in self.records]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
            fh.write("\n")


def validation_score(probs: np.ndarray, labels: np.ndarray) -> tuple[Optional[float], float]:
    """(macro AUC or None when undefined, accuracy)."""
    aucs = [v for v in per_class_auc(probs, labels).values() if v is not None]
    return (float(np.mean(aucs)) if aucs else None), accuracy(probs, labels)


def _better(score, best) -> bool:
    if best is None:
        return True
    auc, acc = score
    best_auc, best_acc = best
    key = (-1.0 if auc is None else auc, acc)
    best_key = (-1.0 if best_auc is None else best_auc, best_acc)
    return key > best_key


def train(train_set: Sequence[PreparedSample], valid_set: Optional[Sequence[PreparedSample]],
          vocab_size: int, config: GGNNConfig, params: Optional[Params] = None,
          on_epoch: Optional[Callable[[EpochRecord], Optional[bool]]] = None) -> tuple[Params, TrainingLog]:
    """Fit parameters; returns the best-on-validation parameters and the log.

    Without a validation set the training set is scored instead.  Training
    stops once ``patience`` epochs pass without improving (macro AUC,
    accuracy) on it, after ``max_epochs``, or when ``on_epoch`` returns True;
    in that last case the current parameters are the ones returned.
    """
    if not train_set:
        raise ConfigError("training split is empty")
    train_labels = np.asarray([s.label for s in train_set])
    if np.any(train_labels < 0):
        raise DataError("training samples must be labeled")
    valid_set = list(valid_set) if valid_set else list(train_set)
    valid_labels = np.asarray([s.label for s in valid_set])
    if np.any(valid_labels < 0):
        raise DataError("validation samples must be labeled")

    rng = np.random.default_rng(config.seed)
    if params is None:
        params = init_params(config, vocab_size, seed=int(rng.integers(2**63)))
    else:
        params = copy_params(params)
    weights = class_weight_vector(train_labels, config.n_classes) if config.class_weighting else None
    optimizer = Adam(params, config)
    log = TrainingLog()
    best, best_params, since_best = None, copy_params(params), 0

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_set))
        total = 0.0
        for lo in range(0, len(order), config.batch_size):
            chunk = [train_set[i] for i in order[lo:lo + config.batch_size]]
            value, grads = loss_and_gradients(params, collate(chunk), config, weights)
            optimizer.step(params, grads)
            total += value * len(chunk)
        probs = predict_proba(params, valid_set, config)
        score = validation_score(probs, valid_labels)
        improved = _better(score, best)
        if improved:
            best, best_params, since_best = score, copy_params(params), 0
            log.best_epoch = epoch
        else:
            since_best += 1
        record = EpochRecord(epoch, total / len(order), score[0], score[1], improved)
        log.records.append(record)
        logger.info("epoch %d loss %.4f valid auc %s acc %.3f", epoch, record.train_loss,
                    "n/a" if score[0] is None else f"{score[0]:.4f}", score[1])
        if on_epoch is not None and on_epoch(record):
            best_params, log.best_epoch = copy_params(params), epoch
            log.stopped_early = epoch < config.max_epochs
            break
        if since_best >= config.patience:
            log.stopped_early = epoch < config.max_epochs
            break
    return best_params, log
