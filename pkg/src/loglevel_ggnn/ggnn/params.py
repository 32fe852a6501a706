"""Parameter layout and initialization.

Parameters live in a plain ``dict[str, np.ndarray]``.  GRU weights are
stored gate-concatenated along the output axis in the order update, reset,
candidate.
"""
from __future__ import annotations

import numpy as np

from .config import GGNNConfig

Params = dict


def param_shapes(config: GGNNConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    D = config.hidden_size
    shapes = {
        "embedding": (vocab_size, D),
        "type_embedding": (config.n_node_types, D),
        "msg_W": (config.n_channels, D, D),
        "msg_b": (config.n_channels, D),
        "gru_W": (D, 3 * D),
        "gru_U": (D, 3 * D),
        "gru_b": (3 * D,),
    }
    sizes = (D, *config.mlp_sizes, config.n_classes)
    for i in range(len(sizes) - 1):
        shapes[f"mlp_W{i}"] = (sizes[i], sizes[i + 1])
        shapes[f"mlp_b{i}"] = (sizes[i + 1],)
    return shapes


def n_mlp_layers(config: GGNNConfig) -> int:
    return len(config.mlp_sizes) + 1


def _fan_in(name: str, shape: tuple[int, ...], D: int) -> int:
    if name in ("embedding", "type_embedding"):
        return D
    if name.startswith("mlp_b"):
        return 0  # filled in by caller from the matching weight
    if name == "msg_W":
        return shape[1]
    if name in ("msg_b", "gru_W", "gru_U", "gru_b"):
        return D
    return shape[0]


def init_params(config: GGNNConfig, vocab_size: int, seed=None) -> Params:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every tensor.

    Embedding rows use the hidden size as their fan-in.
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    D = config.hidden_size
    shapes = param_shapes(config, vocab_size)
    params = {}
    for name, shape in shapes.items():
        fan_in = _fan_in(name, shape, D)
        if name.startswith("mlp_b"):
            fan_in = shapes["mlp_W" + name[5:]][0]
        bound = 1.0 / np.sqrt(fan_in)
        params[name] = rng.uniform(-bound, bound, size=shape)
    return params


def zeros_like(params: Params) -> Params:
    return {k: np.zeros_like(v) for k, v in params.items()}


def n_parameters(params: Params) -> int:
    return int(sum(v.size for v in params.values()))


def copy_params(params: Params) -> Params:
    return {k: v.copy() for k, v in params.items()}
