"""Independent reference implementations used by the tests.

Nothing here calls into the code under test except for the plain data
classes, so a bug in the package cannot hide behind a matching bug here.
"""
import itertools
import math
import random

import numpy as np

from loglevel_ggnn.graph import Edge, EdgeType, Node, NodeType, ProgramGraph


def random_graph(n, seed, edge_factor=1.5):
    rng = random.Random(seed)
    types = list(NodeType)
    nodes = [Node(i, rng.choice(types), f"t{rng.randrange(5)}") for i in range(n)]
    edges = set()
    if n:
        for _ in range(int(edge_factor * n)):
            edges.add(Edge(rng.randrange(n), rng.randrange(n), rng.choice(list(EdgeType))))
    return ProgramGraph(nodes, sorted(edges, key=lambda e: (e.src, e.dst, e.etype.name)), "r.java", "r")


def random_graphs(count, max_nodes, seed):
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(1, max_nodes)
        g = random_graph(n, rng.randrange(2**31), edge_factor=rng.choice([0.3, 1.0, 2.0]))
        yield g, rng.randrange(n)


def brute_force_distances(g, center):
    """Undirected hop distances by repeated edge relaxation until nothing changes."""
    inf = math.inf
    dist = [inf] * len(g.nodes)
    dist[center] = 0
    changed = True
    while changed:
        changed = False
        for e in g.edges:
            for a, b in ((e.src, e.dst), (e.dst, e.src)):
                if dist[a] + 1 < dist[b]:
                    dist[b] = dist[a] + 1
                    changed = True
    return {v: int(d) for v, d in enumerate(dist) if d != inf}


def brute_force_induced(g, keep):
    keep = sorted(set(keep))
    remap = {old: new for new, old in enumerate(keep)}
    edges = [(remap[e.src], remap[e.dst], e.etype) for e in g.edges if e.src in remap and e.dst in remap]
    texts = [(g.nodes[old].node_type, g.nodes[old].text) for old in keep]
    return texts, sorted(edges, key=lambda x: (x[0], x[1], x[2].name)), remap


def pairwise_auc(scores, positive):
    """O(n^2) ROC area: P(score_pos > score_neg) + 0.5 P(tie)."""
    pos = [s for s, p in zip(scores, positive) if p]
    neg = [s for s, p in zip(scores, positive) if not p]
    if not pos or not neg:
        return None
    wins = 0.0
    for a, b in itertools.product(pos, neg):
        wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))


def pairwise_macro_auc(probs, labels, n_classes=6):
    aucs = [pairwise_auc(list(probs[:, c]), [y == c for y in labels]) for c in range(n_classes)]
    aucs = [a for a in aucs if a is not None]
    return sum(aucs) / len(aucs) if aucs else None


def finite_difference(f, x, h=1e-5):
    """Central differences of scalar f with respect to every entry of x (in place, restored)."""
    grad = np.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        up = f()
        flat[i] = old - h
        down = f()
        flat[i] = old
        gflat[i] = (up - down) / (2 * h)
    return grad


def max_relative_error(analytic, numeric, floor=1e-5):
    a, f = np.asarray(analytic).ravel(), np.asarray(numeric).ravel()
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - f) / np.maximum(np.maximum(np.abs(a), np.abs(f)), floor)))
