"""Batched GGNN forward pass and hand-written reverse mode.

A batch is the disjoint union of its samples' graphs.  Every edge sends a
message along its forward channel and a second one, with its own weights,
along the reversed channel.  A node's incoming messages are averaged (or
max-pooled) and fed as input to a GRU whose hidden state is the node
state.  After ``steps`` rounds the state of each sample's center node goes
through the readout MLP.

Results are bitwise independent of node order and of unrelated nodes in
the batch: messages are reduced in sorted order, and single-row products
are padded so that the same BLAS kernel handles every row.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.special import expit

from ..errors import ConfigError, NumericError
from ..graph import N_CHANNELS
from ..logs import LabeledSample
from ..vocab import Vocabulary, embedding_matrices
from .config import GGNNConfig
from .params import Params, n_mlp_layers, zeros_like

PROB_FLOOR = 1e-12


def mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b`` with one-row inputs routed through the matrix-matrix kernel."""
    if a.shape[0] == 1:
        return (np.vstack([a, a]) @ b)[:1]
    return a @ b


@dataclass(frozen=True)
class PreparedSample:
    n_nodes: int
    tok: sparse.csr_matrix
    typ: sparse.csr_matrix
    src: np.ndarray
    dst: np.ndarray
    chan: np.ndarray
    center: int
    label: int  # -1 when unlabeled


def prepare_sample(sample: LabeledSample, vocab: Vocabulary) -> PreparedSample:
    g = sample.graph
    tok, typ = embedding_matrices(g, vocab)
    src, dst, chan = [], [], []
    for e in g.edges:
        c = e.etype.channel(False)
        src += (e.src, e.dst)
        dst += (e.dst, e.src)
        chan += (c, c + 1)
    label = -1 if sample.label is None else int(sample.label)
    return PreparedSample(
        len(g.nodes), tok, typ,
        np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64),
        np.asarray(chan, dtype=np.int64), sample.center, label,
    )


@dataclass
class Batch:
    n_nodes: int
    tok: sparse.csr_matrix
    typ: sparse.csr_matrix
    src: np.ndarray  # message sources, grouped by channel
    channels: list  # (channel, start, stop) slices into src
    groups: list  # (nodes, message index matrix) per in-degree
    scatter_src: sparse.csr_matrix  # (n_nodes, n_messages) one-hot of src
    centers: np.ndarray
    labels: np.ndarray
    n_samples: int = field(init=False)

    def __post_init__(self):
        self.n_samples = len(self.centers)


def collate(samples: Sequence[PreparedSample]) -> Batch:
    if not samples:
        raise ConfigError("cannot build an empty batch")
    offsets = np.cumsum([0] + [s.n_nodes for s in samples])
    n = int(offsets[-1])
    src = np.concatenate([s.src + o for s, o in zip(samples, offsets)])
    dst = np.concatenate([s.dst + o for s, o in zip(samples, offsets)])
    chan = np.concatenate([s.chan for s in samples])
    order = np.argsort(chan, kind="stable")
    src, dst, chan = src[order], dst[order], chan[order]
    bounds = np.searchsorted(chan, np.arange(N_CHANNELS + 1))
    channels = [(c, int(bounds[c]), int(bounds[c + 1]))
                for c in range(N_CHANNELS) if bounds[c + 1] > bounds[c]]

    by_dst = np.argsort(dst, kind="stable")
    indeg = np.bincount(dst, minlength=n)
    starts = np.concatenate([[0], np.cumsum(indeg)[:-1]])
    groups = []
    for d in np.unique(indeg[indeg > 0]):
        nodes = np.flatnonzero(indeg == d)
        idx = by_dst[starts[nodes][:, None] + np.arange(d)[None, :]]
        groups.append((nodes, idx))

    m = len(src)
    scatter = sparse.csr_matrix((np.ones(m), (src, np.arange(m))), shape=(n, m))
    return Batch(
        n,
        sparse.vstack([s.tok for s in samples], format="csr"),
        sparse.vstack([s.typ for s in samples], format="csr"),
        src, channels, groups, scatter,
        np.asarray([s.center for s in samples]) + offsets[:-1],
        np.asarray([s.label for s in samples], dtype=np.int64),
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _activation(x, kind):
    return np.tanh(x) if kind == "tanh" else np.maximum(x, 0.0)


def _check_finite(x: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}")


def messages(params: Params, batch: Batch, H: np.ndarray) -> np.ndarray:
    M = np.empty((len(batch.src), H.shape[1]))
    W, b = params["msg_W"], params["msg_b"]
    for c, lo, hi in batch.channels:
        M[lo:hi] = mm(H[batch.src[lo:hi]], W[c]) + b[c]
    return M


def aggregate(batch: Batch, M: np.ndarray, how: str):
    A = np.zeros((batch.n_nodes, M.shape[1]))
    picks = []
    for nodes, idx in batch.groups:
        vals = M[idx]
        d = idx.shape[1]
        if how == "mean":
            if d > 2:  # two-term sums are already order-free
                vals = np.sort(vals, axis=1)
            A[nodes] = vals.sum(axis=1) / d
        else:
            arg = vals.argmax(axis=1)
            picks.append(arg)
            A[nodes] = np.take_along_axis(vals, arg[:, None, :], axis=1)[:, 0, :]
    return A, picks


def gru_step(params: Params, A: np.ndarray, H: np.ndarray, activation: str):
    D = H.shape[1]
    W, U, b = params["gru_W"], params["gru_U"], params["gru_b"]
    gx = mm(A, W) + b
    gh = mm(H, U[:, :2 * D])
    z = expit(gx[:, :D] + gh[:, :D])
    r = expit(gx[:, D:2 * D] + gh[:, D:])
    rh = r * H
    cand_pre = gx[:, 2 * D:] + mm(rh, U[:, 2 * D:])
    cand = _activation(cand_pre, activation)
    H_new = (1.0 - z) * H + z * cand
    return H_new, (A, H, z, r, rh, cand_pre, cand)


def embed(params: Params, batch: Batch) -> np.ndarray:
    return np.asarray(batch.tok @ params["embedding"]) + np.asarray(batch.typ @ params["type_embedding"])


def propagate(params: Params, batch: Batch, X: np.ndarray, config: GGNNConfig, cache: Optional[list] = None):
    H = X
    for _ in range(config.steps):
        M = messages(params, batch, H)
        A, picks = aggregate(batch, M, config.aggregation)
        H, step_cache = gru_step(params, A, H, config.gru_activation)
        _check_finite(H, "node states")
        if cache is not None:
            cache.append((step_cache, picks))
    return H


def readout(params: Params, h: np.ndarray, config: GGNNConfig, cache: Optional[list] = None) -> np.ndarray:
    """Class probabilities for center states ``h`` of shape (batch, D)."""
    a = h
    L = n_mlp_layers(config)
    for i in range(L):
        pre = mm(a, params[f"mlp_W{i}"]) + params[f"mlp_b{i}"]
        if cache is not None:
            cache.append((a, pre))
        a = np.maximum(pre, 0.0) if i < L - 1 else pre
    probs = softmax(a)
    _check_finite(probs, "predictions")
    return probs


@dataclass
class ForwardCache:
    X: np.ndarray
    steps: list
    mlp: list
    H: np.ndarray
    probs: np.ndarray


def forward(params: Params, batch: Batch, config: GGNNConfig, keep_cache: bool = False):
    X = embed(params, batch)
    steps = [] if keep_cache else None
    H = propagate(params, batch, X, config, steps)
    mlp = [] if keep_cache else None
    probs = readout(params, H[batch.centers], config, mlp)
    if keep_cache:
        return probs, ForwardCache(X, steps, mlp, H, probs)
    return probs


def class_weight_vector(labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Inverse-frequency weights normalized to mean one over observed classes."""
    counts = np.bincount(labels, minlength=n_classes).astype(float)
    w = np.zeros(n_classes)
    seen = counts > 0
    w[seen] = counts[seen].sum() / (seen.sum() * counts[seen])
    return w


def loss(probs: np.ndarray, labels: np.ndarray, weights: Optional[np.ndarray] = None) -> float:
    """Mean cross-entropy of the true-class probabilities, floored at 1e-12."""
    labels = np.asarray(labels)
    if probs.ndim == 1:
        probs = probs[None, :]
        labels = labels.reshape(1)
    p = np.maximum(probs[np.arange(len(labels)), labels], PROB_FLOOR)
    per = -np.log(p)
    if weights is None:
        return float(per.mean())
    w = weights[labels]
    return float((w * per).sum() / w.sum())


def backward(params: Params, batch: Batch, cache: ForwardCache, config: GGNNConfig,
             weights: Optional[np.ndarray] = None) -> Params:
    """Gradients of :func:`loss` over the batch with respect to every parameter."""
    grads = zeros_like(params)
    labels = batch.labels
    if np.any(labels < 0):
        raise ConfigError("gradients need a fully labeled batch")
    B = len(labels)
    rows = np.arange(B)
    probs = cache.probs
    coef = np.full(B, 1.0 / B) if weights is None else weights[labels] / weights[labels].sum()
    coef = np.where(probs[rows, labels] > PROB_FLOOR, coef, 0.0)
    dlogits = probs.copy()
    dlogits[rows, labels] -= 1.0
    dlogits *= coef[:, None]

    L = n_mlp_layers(config)
    da = dlogits
    for i in reversed(range(L)):
        a_in, pre = cache.mlp[i]
        dpre = da if i == L - 1 else da * (pre > 0)
        grads[f"mlp_W{i}"] += a_in.T @ dpre
        grads[f"mlp_b{i}"] += dpre.sum(axis=0)
        da = dpre @ params[f"mlp_W{i}"].T

    D = config.hidden_size
    dH = np.zeros((batch.n_nodes, D))
    np.add.at(dH, batch.centers, da)

    W, U = params["gru_W"], params["gru_U"]
    msg_W = params["msg_W"]
    for (A, H, z, r, rh, cand_pre, cand), picks in reversed(cache.steps):
        dz = dH * (cand - H)
        dcand = dH * z
        dH_prev = dH * (1.0 - z)
        if config.gru_activation == "tanh":
            dcand_pre = dcand * (1.0 - cand * cand)
        else:
            dcand_pre = dcand * (cand_pre > 0)
        grads["gru_U"][:, 2 * D:] += rh.T @ dcand_pre
        drh = dcand_pre @ U[:, 2 * D:].T
        dr = drh * H
        dH_prev += drh * r
        dz_pre = dz * z * (1.0 - z)
        dr_pre = dr * r * (1.0 - r)
        dgx = np.concatenate([dz_pre, dr_pre, dcand_pre], axis=1)
        grads["gru_W"] += A.T @ dgx
        grads["gru_b"] += dgx.sum(axis=0)
        dA = dgx @ W.T
        dgh = dgx[:, :2 * D]
        grads["gru_U"][:, :2 * D] += H.T @ dgh
        dH_prev += dgh @ U[:, :2 * D].T

        dM = np.zeros((len(batch.src), D))
        for g, (nodes, idx) in enumerate(batch.groups):
            if config.aggregation == "mean":
                dM[idx] = (dA[nodes] / idx.shape[1])[:, None, :]
            else:
                chosen = np.take_along_axis(idx, picks[g], axis=1)
                dM[chosen, np.arange(D)] = dA[nodes]
        dsrc = np.empty_like(dM)
        for c, lo, hi in batch.channels:
            Hs = H[batch.src[lo:hi]]
            grads["msg_W"][c] += Hs.T @ dM[lo:hi]
            grads["msg_b"][c] += dM[lo:hi].sum(axis=0)
            dsrc[lo:hi] = dM[lo:hi] @ msg_W[c].T
        dH = dH_prev + np.asarray(batch.scatter_src @ dsrc)

    grads["embedding"] += np.asarray(batch.tok.T @ dH)
    grads["type_embedding"] += np.asarray(batch.typ.T @ dH)
    for name, g in grads.items():
        _check_finite(g, f"gradient of {name}")
    return grads


def loss_and_gradients(params: Params, batch: Batch, config: GGNNConfig,
                       weights: Optional[np.ndarray] = None) -> tuple[float, Params]:
    probs, cache = forward(params, batch, config, keep_cache=True)
    return loss(probs, batch.labels, weights), backward(params, batch, cache, config, weights)


def predict_proba(params: Params, prepared: Sequence[PreparedSample], config: GGNNConfig,
                  batch_size: Optional[int] = None) -> np.ndarray:
    batch_size = batch_size or config.batch_size
    out = np.empty((len(prepared), config.n_classes))
    for lo in range(0, len(prepared), batch_size):
        chunk = prepared[lo:lo + batch_size]
        out[lo:lo + len(chunk)] = forward(params, collate(chunk), config)
    return out


def ensemble(pred_a: np.ndarray, pred_b: np.ndarray, weight: float) -> np.ndarray:
    """Weighted addition ``w * a + (1 - w) * b`` of prediction arrays, renormalized."""
    if not 0.0 <= weight <= 1.0:
        raise ConfigError(f"ensemble weight must lie in [0, 1], got {weight}")
    if weight == 1.0:
        return np.array(pred_a, dtype=float)
    if weight == 0.0:
        return np.array(pred_b, dtype=float)
    mixed = weight * np.asarray(pred_a, dtype=float) + (1.0 - weight) * np.asarray(pred_b, dtype=float)
    return mixed / mixed.sum(axis=-1, keepdims=True)
