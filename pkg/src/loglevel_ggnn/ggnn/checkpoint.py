"""Checkpoint files: JSON with base64-encoded little-endian float64 tensors.

Output is byte-for-byte reproducible: keys are sorted and nothing
time-dependent is written.
"""
from __future__ import annotations

import base64
import hashlib
import json

import numpy as np

from ..errors import DataError
from ..vocab import Vocabulary
from .config import GGNNConfig
from .params import Params, param_shapes

FORMAT = "loglevel-ggnn-checkpoint"
VERSION = 1


class VocabularyMismatchError(DataError):
    pass


def _encode(array: np.ndarray) -> dict:
    data = np.ascontiguousarray(array, dtype="<f8").tobytes()
    return {"shape": list(array.shape), "data": base64.b64encode(data).decode("ascii")}


def _decode(entry: dict, name: str) -> np.ndarray:
    try:
        raw = base64.b64decode(entry["data"], validate=True)
        shape = tuple(int(s) for s in entry["shape"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"checkpoint tensor {name!r} is malformed: {exc}") from None
    array = np.frombuffer(raw, dtype="<f8")
    if array.size != int(np.prod(shape)):
        raise DataError(f"checkpoint tensor {name!r} holds {array.size} values, shape says {shape}")
    return array.reshape(shape).astype(np.float64)


def dumps_checkpoint(params: Params, config: GGNNConfig, vocab: Vocabulary) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "config": config.to_dict(),
        "vocab_hash": vocab.hash,
        "vocab_size": len(vocab),
        "tensors": {name: _encode(value) for name, value in params.items()},
    }
    return json.dumps(doc, sort_keys=True)


def save_checkpoint(path, params: Params, config: GGNNConfig, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_checkpoint(params, config, vocab))
        fh.write("\n")


def loads_checkpoint(text: str, vocab: Vocabulary = None) -> tuple[Params, GGNNConfig, dict]:
    """Parse a checkpoint; when ``vocab`` is given its hash must match."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"checkpoint is not valid JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise DataError("not a checkpoint file")
    if doc.get("version") != VERSION:
        raise DataError(f"unsupported checkpoint version {doc.get('version')!r}")
    config = GGNNConfig.from_dict(doc["config"])
    if vocab is not None and vocab.hash != doc["vocab_hash"]:
        raise VocabularyMismatchError(
            f"vocabulary hash {vocab.hash[:12]} does not match checkpoint {doc['vocab_hash'][:12]}")
    expected = param_shapes(config, int(doc["vocab_size"]))
    tensors = doc.get("tensors", {})
    if set(tensors) != set(expected):
        raise DataError(f"checkpoint tensors {sorted(tensors)} do not match model layout")
    params = {}
    for name, shape in expected.items():
        value = _decode(tensors[name], name)
        if value.shape != shape:
            raise DataError(f"checkpoint tensor {name!r} has shape {value.shape}, expected {shape}")
        params[name] = value
    meta = {"vocab_hash": doc["vocab_hash"], "vocab_size": int(doc["vocab_size"])}
    return params, config, meta


def load_checkpoint(path, vocab: Vocabulary = None) -> tuple[Params, GGNNConfig, dict]:
    with open(path, encoding="utf-8") as fh:
        return loads_checkpoint(fh.read(), vocab)


def file_digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
