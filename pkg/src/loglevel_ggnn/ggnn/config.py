from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..errors import ConfigError
from ..graph import N_CHANNELS, N_NODE_TYPES

N_CLASSES = 6


@dataclass(frozen=True)
class GGNNConfig:
    """Model shape and training hyperparameters."""

    hidden_size: int = 64
    steps: int = 8
    mlp_sizes: tuple[int, ...] = (64, 32, 16)
    aggregation: str = "mean"  # mean | max
    gru_activation: str = "tanh"  # tanh | relu
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    class_weighting: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mlp_sizes", tuple(int(s) for s in self.mlp_sizes))
        self.validate()

    def validate(self) -> None:
        if self.hidden_size < 1:
            raise ConfigError(f"hidden_size must be positive, got {self.hidden_size}")
        if self.steps < 0:
            raise ConfigError(f"steps must be non-negative, got {self.steps}")
        if any(s < 1 for s in self.mlp_sizes):
            raise ConfigError(f"mlp_sizes must be positive, got {self.mlp_sizes}")
        if self.aggregation not in ("mean", "max"):
            raise ConfigError(f"aggregation must be 'mean' or 'max', got {self.aggregation!r}")
        if self.gru_activation not in ("tanh", "relu"):
            raise ConfigError(f"gru_activation must be 'tanh' or 'relu', got {self.gru_activation!r}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("Adam betas must lie in [0, 1)")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be positive, got {self.max_epochs}")
        if self.patience < 0:
            raise ConfigError(f"patience must be non-negative, got {self.patience}")

    @property
    def n_channels(self) -> int:
        return N_CHANNELS

    @property
    def n_node_types(self) -> int:
        return N_NODE_TYPES

    @property
    def n_classes(self) -> int:
        return N_CLASSES

    def to_dict(self) -> dict:
        data = asdict(self)
        data["mlp_sizes"] = list(self.mlp_sizes)
        data["n_channels"] = N_CHANNELS
        data["n_classes"] = N_CLASSES
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "GGNNConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def replace(self, **changes) -> "GGNNConfig":
        data = asdict(self)
        data.update(changes)
        return GGNNConfig(**data)
