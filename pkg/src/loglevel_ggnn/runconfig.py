"""Run configuration: INI-style key/value file merged with command-line flags.

A config file is a list of ``key = value`` lines, optionally under a
``[run]`` header.  Lists are comma separated.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .ggnn.config import GGNNConfig

SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    corpus: Optional[str] = None
    samples: Optional[str] = None
    output_dir: str = "out"
    vocab: Optional[str] = None
    checkpoint: Optional[str] = None
    seen_projects: tuple[str, ...] = ()
    unseen_projects: tuple[str, ...] = ()
    min_hops: int = 0
    max_hops: int = 8
    hidden_size: int = 64
    steps: int = 8
    mlp_sizes: tuple[int, ...] = (64, 32, 16)
    aggregation: str = "mean"
    gru_activation: str = "tanh"
    min_count: int = 2
    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    class_weighting: bool = False
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.min_hops < 0 or self.max_hops < self.min_hops:
            raise ConfigError(f"need 0 <= min_hops <= max_hops, got {self.min_hops}, {self.max_hops}")
        if self.min_count < 1:
            raise ConfigError("min_count must be at least 1")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be at least 1")
        overlap = set(self.seen_projects) & set(self.unseen_projects)
        if overlap:
            raise ConfigError(f"projects listed as both seen and unseen: {sorted(overlap)}")
        self.model_config()  # validates model fields

    def model_config(self) -> GGNNConfig:
        return GGNNConfig(
            hidden_size=self.hidden_size, steps=self.steps, mlp_sizes=self.mlp_sizes,
            aggregation=self.aggregation, gru_activation=self.gru_activation,
            learning_rate=self.learning_rate, batch_size=self.batch_size,
            max_epochs=self.max_epochs, patience=self.patience,
            class_weighting=self.class_weighting, seed=self.seed,
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        for k, v in data.items():
            if isinstance(v, tuple):
                data[k] = list(v)
        return data


_FIELDS = {f.name: f for f in fields(RunConfig)}
_DEFAULTS = RunConfig()


def _convert(key: str, raw):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    default = getattr(_DEFAULTS, key)
    if raw is None:
        return None
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, tuple):
        items = raw if isinstance(raw, (list, tuple)) else [p.strip() for p in str(raw).split(",")]
        items = [p for p in items if p != ""]
        if key == "mlp_sizes":
            try:
                return tuple(int(p) for p in items)
            except ValueError:
                raise ConfigError(f"{key}: expected comma-separated integers, got {raw!r}") from None
        return tuple(str(p) for p in items)
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return str(raw)


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    if not any(line.strip().startswith("[") for line in text.splitlines()):
        text = f"[{SECTION}]\n" + text
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    if not parser.has_section(SECTION):
        raise ConfigError(f"config file {path} has no [{SECTION}] section")
    extra = [s for s in parser.sections() if s != SECTION]
    if extra:
        raise ConfigError(f"config file {path} has unknown sections {extra}")
    return {key: _convert(key, value) for key, value in parser.items(SECTION)}


def load_run_config(path=None, overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then the file at ``path``, then non-None ``overrides``."""
    values = {}
    if path is not None:
        values.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _convert(key, value)
    return RunConfig(**values)
