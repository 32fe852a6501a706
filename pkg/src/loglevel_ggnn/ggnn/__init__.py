"""Gated graph neural network: propagation, readout, training and checkpoints."""
from .checkpoint import VocabularyMismatchError, load_checkpoint, save_checkpoint
from .config import GGNNConfig, N_CLASSES
from .estimator import EnsemblePredictor, LogLevelGGNN, UniformPredictor, check_labels, check_samples
from .model import (
    Batch, PreparedSample, backward, collate, ensemble, forward, loss, loss_and_gradients,
    predict_proba, prepare_sample, propagate, readout,
)
from .params import init_params, param_shapes
from .train import Adam, TrainingLog, train

__all__ = [
    "Adam", "Batch", "EnsemblePredictor", "GGNNConfig", "LogLevelGGNN", "N_CLASSES",
    "PreparedSample", "TrainingLog", "UniformPredictor", "VocabularyMismatchError",
    "backward", "check_labels", "check_samples", "collate", "ensemble", "forward",
    "init_params", "load_checkpoint", "loss", "loss_and_gradients", "param_shapes",
    "predict_proba", "prepare_sample", "propagate", "readout", "save_checkpoint", "train",
]
