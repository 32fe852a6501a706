"""Program graph data model, validation, neighbourhood queries and JSON I/O.

A :class:`ProgramGraph` is immutable once built.  Nodes carry dense ids
``0..n-1``; edges are typed and directed.  For learning, every base edge
type is paired with a reversed channel so that there are
``2 * len(EdgeType)`` message channels in total.
"""
from __future__ import annotations

import enum
import functools
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import ConfigError, GraphFormatError


class NodeType(enum.Enum):
    TOKEN = "TOKEN"
    IDENTIFIER_TOKEN = "IDENTIFIER_TOKEN"
    COMMENT_LINE = "COMMENT_LINE"
    AST_ELEMENT = "AST_ELEMENT"
    FAKE_AST = "FAKE_AST"
    SYMBOL_TYP = "SYMBOL_TYP"
    TYPE = "TYPE"

    @property
    def index(self) -> int:
        return _NODE_TYPE_INDEX[self]


class EdgeType(enum.Enum):
    AST_CHILD = "AST_CHILD"
    NEXT_TOKEN = "NEXT_TOKEN"
    LAST_WRITE = "LAST_WRITE"
    LAST_USE = "LAST_USE"
    COMPUTED_FROM = "COMPUTED_FROM"
    RETURNS_TO = "RETURNS_TO"
    FORMAL_ARG_NAME = "FORMAL_ARG_NAME"
    GUARDED_BY = "GUARDED_BY"
    GUARDED_BY_NEGATION = "GUARDED_BY_NEGATION"
    LAST_LEXICAL_USE = "LAST_LEXICAL_USE"
    ASSOCIATED_TOKEN = "ASSOCIATED_TOKEN"
    HAS_TYPE = "HAS_TYPE"
    ASSOCIATED_SYMBOL = "ASSOCIATED_SYMBOL"

    @property
    def index(self) -> int:
        return _EDGE_TYPE_INDEX[self]

    def channel(self, reversed: bool = False) -> int:
        """Message channel id: ``2 * index`` forward, ``2 * index + 1`` reversed."""
        return 2 * self.index + int(reversed)


_NODE_TYPE_INDEX = {t: i for i, t in enumerate(NodeType)}
_EDGE_TYPE_INDEX = {t: i for i, t in enumerate(EdgeType)}

N_NODE_TYPES = len(NodeType)
N_EDGE_TYPES = len(EdgeType)
N_CHANNELS = 2 * N_EDGE_TYPES

AST_NODE_TYPES = frozenset({NodeType.AST_ELEMENT, NodeType.FAKE_AST})
TEXT_REQUIRED = frozenset({NodeType.TOKEN, NodeType.IDENTIFIER_TOKEN})


def channel_name(channel: int) -> str:
    etype = list(EdgeType)[channel // 2]
    return etype.value + ("_REV" if channel % 2 else "")


@dataclass(frozen=True)
class Node:
    id: int
    node_type: NodeType
    text: str = ""
    span: Optional[tuple[int, int]] = None


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    etype: EdgeType


@dataclass(frozen=True)
class ProgramGraph:
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()
    file_path: str = ""
    project: str = ""

    def __post_init__(self):
        # accept lists for convenience, store tuples
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    def __len__(self):
        return len(self.nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @functools.cached_property
    def _adjacency(self):
        out: dict[tuple[int, EdgeType], list[int]] = {}
        inc: dict[tuple[int, EdgeType], list[int]] = {}
        for e in self.edges:
            out.setdefault((e.src, e.etype), []).append(e.dst)
            inc.setdefault((e.dst, e.etype), []).append(e.src)
        for table in (out, inc):
            for key in table:
                table[key] = sorted(set(table[key]))
        return out, inc

    @functools.cached_property
    def _undirected(self) -> list[list[int]]:
        adj: list[set[int]] = [set() for _ in self.nodes]
        for e in self.edges:
            if 0 <= e.src < len(adj) and 0 <= e.dst < len(adj):
                adj[e.src].add(e.dst)
                adj[e.dst].add(e.src)
        return [sorted(a) for a in adj]

    def edges_of_type(self, etype: EdgeType) -> list[Edge]:
        return [e for e in self.edges if e.etype is etype]

    def has_edge(self, src: int, dst: int, etype: EdgeType) -> bool:
        return dst in self._adjacency[0].get((src, etype), ())

    def nodes_of_type(self, node_type: NodeType) -> list[Node]:
        return [n for n in self.nodes if n.node_type is node_type]


def validate_graph(g: ProgramGraph) -> list[str]:
    """Return human readable invariant violations; empty when ``g`` is valid.

    Induced subgraphs may cut an AST node off from its parent, so an AST
    node is required to have *at most* one incoming ``AST_CHILD`` edge; a
    node with none is treated as a root.
    """
    problems = []
    n = len(g.nodes)
    for i, node in enumerate(g.nodes):
        if node.id != i:
            problems.append(f"node {i}: id {node.id} is not the dense index {i}")
        if not isinstance(node.node_type, NodeType):
            problems.append(f"node {i}: unknown node type {node.node_type!r}")
            continue
        if node.node_type in TEXT_REQUIRED and not node.text:
            problems.append(f"node {i}: {node.node_type.value} node has empty text")
        if node.span is not None:
            start, end = node.span
            if start < 0 or end < start:
                problems.append(f"node {i}: invalid span {node.span}")

    seen = set()
    ast_parents = [0] * n
    for i, e in enumerate(g.edges):
        ok = True
        if not (0 <= e.src < n):
            problems.append(f"edge {i}: src out of range")
            ok = False
        if not (0 <= e.dst < n):
            problems.append(f"edge {i}: dst out of range")
            ok = False
        if not isinstance(e.etype, EdgeType):
            problems.append(f"edge {i}: unknown edge type {e.etype!r}")
            ok = False
        key = (e.src, e.dst, e.etype)
        if key in seen:
            problems.append(f"edge {i}: duplicate ({e.src}, {e.dst}, {e.etype.value})")
        seen.add(key)
        if ok and e.etype is EdgeType.AST_CHILD:
            src_t, dst_t = g.nodes[e.src].node_type, g.nodes[e.dst].node_type
            if src_t not in AST_NODE_TYPES or dst_t not in AST_NODE_TYPES:
                problems.append(f"edge {i}: AST_CHILD between non-AST nodes")
            ast_parents[e.dst] += 1
    for i, count in enumerate(ast_parents):
        if count > 1:
            problems.append(f"node {i}: {count} incoming AST_CHILD edges")
    return problems


def _check_node(g: ProgramGraph, n: int) -> None:
    if not (0 <= n < len(g.nodes)):
        raise IndexError(f"node {n} not in graph with {len(g.nodes)} nodes")


def neighbors(g: ProgramGraph, n: int, etype: EdgeType, direction: str = "out") -> list[int]:
    """Adjacent node ids under one edge type, ascending."""
    _check_node(g, n)
    out, inc = g._adjacency
    if direction == "out":
        return list(out.get((n, etype), ()))
    if direction == "in":
        return list(inc.get((n, etype), ()))
    raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")


def hop_distances(g: ProgramGraph, center: int, max_hops: Optional[int] = None) -> dict[int, int]:
    """Breadth-first hop counts from ``center`` over the undirected view."""
    _check_node(g, center)
    adj = g._undirected
    dist = {center: 0}
    queue = deque([center])
    while queue:
        u = queue.popleft()
        d = dist[u]
        if max_hops is not None and d >= max_hops:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = d + 1
                queue.append(v)
    return dist


def k_hop_nodes(g: ProgramGraph, center: int, min_hops: int, max_hops: int) -> set[int]:
    if min_hops < 0 or max_hops < min_hops:
        raise ConfigError(f"need 0 <= min_hops <= max_hops, got {min_hops}, {max_hops}")
    dist = hop_distances(g, center, max_hops)
    return {v for v, d in dist.items() if min_hops <= d <= max_hops}


def induced_subgraph(g: ProgramGraph, keep: Iterable[int]) -> tuple[ProgramGraph, dict[int, int]]:
    """Subgraph on ``keep`` re-indexed densely; returns it with the old->new id map."""
    keep = set(keep)
    for n in keep:
        _check_node(g, n)
    order = sorted(keep)
    remap = {old: new for new, old in enumerate(order)}
    nodes = [
        Node(remap[old], g.nodes[old].node_type, g.nodes[old].text, g.nodes[old].span)
        for old in order
    ]
    edges = [
        Edge(remap[e.src], remap[e.dst], e.etype)
        for e in g.edges
        if e.src in remap and e.dst in remap
    ]
    return ProgramGraph(nodes, edges, g.file_path, g.project), remap


# ---- serialization -------------------------------------------------------

def graph_to_dict(g: ProgramGraph) -> dict:
    return {
        "file": g.file_path,
        "project": g.project,
        "nodes": [
            {
                "id": n.id,
                "type": n.node_type.value,
                "text": n.text,
                "span": list(n.span) if n.span is not None else None,
            }
            for n in g.nodes
        ],
        "edges": [{"src": e.src, "dst": e.dst, "type": e.etype.value} for e in g.edges],
    }


def _require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise GraphFormatError(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise GraphFormatError(f"{where}: {key!r} must be an integer")
    if not isinstance(value, kind):
        raise GraphFormatError(f"{where}: {key!r} has wrong type {type(value).__name__}")
    return value


def graph_from_dict(data: dict) -> ProgramGraph:
    if not isinstance(data, dict):
        raise GraphFormatError("graph document must be a JSON object")
    file_path = _require(data, "file", str, "graph")
    project = _require(data, "project", str, "graph")
    nodes = []
    for i, raw in enumerate(_require(data, "nodes", list, "graph")):
        where = f"node {i}"
        node_id = _require(raw, "id", int, where)
        type_name = _require(raw, "type", str, where)
        try:
            node_type = NodeType(type_name)
        except ValueError:
            raise GraphFormatError(f"{where}: unknown node type {type_name!r}") from None
        text = _require(raw, "text", str, where)
        span = raw.get("span")
        if span is not None:
            if (not isinstance(span, list) or len(span) != 2
                    or not all(isinstance(s, int) and not isinstance(s, bool) for s in span)):
                raise GraphFormatError(f"{where}: span must be [int, int] or null")
            span = (span[0], span[1])
        nodes.append(Node(node_id, node_type, text, span))
    edges = []
    for i, raw in enumerate(_require(data, "edges", list, "graph")):
        where = f"edge {i}"
        src = _require(raw, "src", int, where)
        dst = _require(raw, "dst", int, where)
        type_name = _require(raw, "type", str, where)
        try:
            etype = EdgeType(type_name)
        except ValueError:
            raise GraphFormatError(f"{where}: unknown edge type {type_name!r}") from None
        edges.append(Edge(src, dst, etype))
    return ProgramGraph(nodes, edges, file_path, project)


def dumps_graph(g: ProgramGraph) -> str:
    return json.dumps(graph_to_dict(g), sort_keys=True)


def loads_graph(text: str) -> ProgramGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise GraphFormatError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno, offset) from None
    return graph_from_dict(data)


def write_graph(g: ProgramGraph, path) -> None:
    Path(path).write_text(dumps_graph(g) + "\n", encoding="utf-8")


def read_graph(path) -> ProgramGraph:
    return loads_graph(Path(path).read_text(encoding="utf-8"))
