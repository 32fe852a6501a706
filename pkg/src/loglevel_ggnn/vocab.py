"""Subtoken vocabulary and node embedding indices.

Identifiers are split on case changes, underscores and digit runs and
lowercased (``getHTTPResponse2`` -> ``get http response 2``).  Comments
and string literals are split into words.  Keywords, punctuation and
numbers stay whole.  AST nodes contribute their production name.
"""
from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import ConfigError, DataError
from .graph import N_NODE_TYPES, NodeType, ProgramGraph

UNKNOWN = "<unk>"
PAD = "<pad>"
UNKNOWN_ID = 0
PAD_ID = 1
DEFAULT_MIN_COUNT = 2

_WORD = re.compile(r"[^\W_]+")


def _camel_parts(chunk: str) -> list[str]:
    parts, start = [], 0
    for i in range(1, len(chunk)):
        prev, ch = chunk[i - 1], chunk[i]
        nxt = chunk[i + 1] if i + 1 < len(chunk) else ""
        if (prev.isdigit() != ch.isdigit()
                or (prev.islower() and ch.isupper())
                or (prev.isupper() and ch.isupper() and nxt.islower())):
            parts.append(chunk[start:i])
            start = i
    if chunk:
        parts.append(chunk[start:])
    return parts


def split_identifier(name: str) -> list[str]:
    """Lowercased camelCase/snake_case/digit parts; the whole text if nothing splits out."""
    parts = []
    for chunk in re.split(r"[\W_]+", name):
        parts.extend(p.lower() for p in _camel_parts(chunk))
    return parts or ([name.lower()] if name else [])


def split_words(text: str) -> list[str]:
    words = []
    for word in _WORD.findall(text):
        words.extend(split_identifier(word))
    return words


def node_subtokens(node_type: NodeType, text: str) -> list[str]:
    """Vocabulary items a node's text contributes (may be empty)."""
    if not text:
        return []
    if node_type in (NodeType.IDENTIFIER_TOKEN, NodeType.TYPE, NodeType.SYMBOL_TYP):
        return split_identifier(text)
    if node_type is NodeType.COMMENT_LINE:
        return split_words(text)
    if node_type is NodeType.AST_ELEMENT:
        return [text.lower()]
    if node_type is NodeType.TOKEN and text[0] in "\"'":
        return split_words(text[1:-1]) or [text]
    return [text]


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    min_count: int = DEFAULT_MIN_COUNT

    def __post_init__(self):
        if len(self.tokens) < 2 or self.tokens[UNKNOWN_ID] != UNKNOWN or self.tokens[PAD_ID] != PAD:
            raise DataError("vocabulary must start with the unknown and padding entries")
        if len(set(self.tokens)) != len(self.tokens):
            raise DataError("vocabulary has duplicate entries")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def lookup(self, token: str) -> int:
        return self._index.get(token, UNKNOWN_ID)

    def to_dict(self) -> dict:
        return {"min_count": self.min_count, "tokens": list(self.tokens)}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
            fh.write("\n")

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        try:
            return cls(tuple(data["tokens"]), int(data.get("min_count", DEFAULT_MIN_COUNT)))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed vocabulary: {exc}") from None

    @classmethod
    def load(cls, path) -> "Vocabulary":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid vocabulary JSON: {exc.msg}") from None
        return cls.from_dict(data)


def count_subtokens(graphs: Iterable[ProgramGraph]) -> Counter:
    counts: Counter = Counter()
    for g in graphs:
        for node in g.nodes:
            counts.update(node_subtokens(node.node_type, node.text))
    return counts


def build_vocab(graphs: Iterable[ProgramGraph], min_count: int = DEFAULT_MIN_COUNT) -> Vocabulary:
    """Subtokens seen at least ``min_count`` times, most frequent first, ties by text."""
    if min_count < 1:
        raise ConfigError(f"min_count must be at least 1, got {min_count}")
    counts = count_subtokens(graphs)
    kept = sorted((t for t, c in counts.items() if c >= min_count and t not in (UNKNOWN, PAD)),
                  key=lambda t: (-counts[t], t))
    return Vocabulary((UNKNOWN, PAD, *kept), min_count)


def embedding_matrices(graph: ProgramGraph, vocab: Vocabulary) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Averaging matrices mapping a graph's nodes onto vocabulary and node-type rows.

    Row ``n`` of the first matrix holds weight ``1/k`` on each of the ``k``
    subtokens of node ``n``.  Nodes without subtokens get a one-hot row in the
    second matrix instead, selecting a learned per-node-type vector.
    """
    rows, cols, vals = [], [], []
    trows, tcols = [], []
    for node in graph.nodes:
        subs = node_subtokens(node.node_type, node.text)
        if subs:
            w = 1.0 / len(subs)
            for s in subs:
                rows.append(node.id)
                cols.append(vocab.lookup(s))
                vals.append(w)
        else:
            trows.append(node.id)
            tcols.append(node.node_type.index)
    n = len(graph.nodes)
    tok = sparse.coo_matrix((vals, (rows, cols)), shape=(n, len(vocab)), dtype=np.float64).tocsr()
    typ = sparse.coo_matrix((np.ones(len(trows)), (trows, tcols)), shape=(n, N_NODE_TYPES),
                            dtype=np.float64).tocsr()
    return tok, typ


def embed_node(node_type: NodeType, text: str, vocab: Vocabulary, embeddings: np.ndarray,
               type_embeddings: np.ndarray) -> np.ndarray:
    """Initial state of a single node: mean of its subtoken vectors."""
    subs = node_subtokens(node_type, text)
    if not subs:
        return type_embeddings[node_type.index].copy()
    ids: Sequence[int] = [vocab.lookup(s) for s in subs]
    return embeddings[ids].mean(axis=0)
