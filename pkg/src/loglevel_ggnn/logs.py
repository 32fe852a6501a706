"""Log statement detection, redaction and labeled subgraph extraction.

A log statement is an expression statement calling ``<recv>.<level>(...)``
where the receiver's name contains ``log`` (any case) and the method name
is one of the six verbosity levels.  Each statement becomes one sample: it
is replaced by a bare ``;`` in the source (other log statements stay put),
the file is re-parsed and graphed, and the nodes within a hop window of the
empty statement form the sample's subgraph.
"""
from __future__ import annotations

import enum
import json
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Union

from .errors import ConfigError, DataError, ExtractionError, GraphFormatError, RedactionError
from .graph import (
    Edge, EdgeType, NodeType, ProgramGraph, graph_from_dict, graph_to_dict,
    induced_subgraph, k_hop_nodes, loads_graph, validate_graph,
)
from .java.graph_builder import build_graph
from .java.lexer import SourceToken
from .java.parser import AstNode, parse_source

logger = logging.getLogger(__name__)

DEFAULT_MIN_HOPS = 0
DEFAULT_MAX_HOPS = 8


class LogLevel(enum.IntEnum):
    TRACE = 0
    DEBUG = 1
    INFO = 2
    WARN = 3
    ERROR = 4
    FATAL = 5

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value) -> "LogLevel":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown log level {value!r}") from None
        if isinstance(value, (int,)) or hasattr(value, "__index__"):
            return cls(int(value))
        raise ValueError(f"cannot interpret {value!r} as a log level")


LEVEL_NAMES = tuple(level.label for level in LogLevel)
N_LEVELS = len(LogLevel)


class Origin(NamedTuple):
    project: str = ""
    file: str = ""
    span: Optional[tuple[int, int]] = None


@dataclass(frozen=True)
class LabeledSample:
    graph: ProgramGraph
    center: int
    label: Optional[LogLevel] = None
    origin: Origin = Origin()

    def __post_init__(self):
        if not (0 <= self.center < len(self.graph.nodes)):
            raise ExtractionError(f"center {self.center} outside graph of {len(self.graph.nodes)} nodes")
        if self.label is not None and not isinstance(self.label, LogLevel):
            object.__setattr__(self, "label", LogLevel.parse(self.label))

    @property
    def project(self) -> str:
        return self.origin.project or self.graph.project


class LogSite(NamedTuple):
    statement: AstNode
    level: LogLevel
    span: tuple[int, int]


# ---- detection ------------------------------------------------------------

def _last_identifier(expr: AstNode) -> Optional[SourceToken]:
    if expr.kind == "Name":
        return expr.roles["name"]
    if expr.kind == "FieldAccess":
        return expr.roles["name"]
    return None


def log_call_level(call: AstNode) -> Optional[LogLevel]:
    """Level of a ``<logger>.<level>(...)`` call node, else None."""
    if call.kind != "MethodCall" or "receiver" not in call.roles:
        return None
    receiver = _last_identifier(call.roles["receiver"])
    if receiver is None or "log" not in receiver.text.lower():
        return None
    try:
        return LogLevel[call.roles["name"].text.upper()]
    except KeyError:
        return None


def find_log_statements(ast: AstNode, tokens: Optional[list] = None) -> list[LogSite]:
    """All log statements in source order."""
    sites = []
    for node in ast.walk():
        if node.kind != "ExpressionStatement":
            continue
        level = log_call_level(node.roles["expr"])
        if level is not None:
            sites.append(LogSite(node, level, node.span))
    return sites


# ---- redaction ------------------------------------------------------------

def _splice(source: str, span: tuple[int, int]) -> str:
    raw = source.encode("utf-8")
    start, end = span
    if not (0 <= start < end <= len(raw)):
        raise RedactionError(f"span {span} outside source of {len(raw)} bytes")
    if raw[end - 1:end] != b";":
        raise RedactionError(f"span {span} does not end with ';'")
    return (raw[:start] + b";" + raw[end:]).decode("utf-8")


def _redact_and_parse(source: str, span: tuple[int, int]):
    text = _splice(source, span)
    try:
        ast, tokens = parse_source(text)
    except DataError as exc:
        raise RedactionError(f"redacted source no longer parses: {exc}") from exc
    return text, ast, tokens


def redact(source: str, span: tuple[int, int]) -> str:
    """Replace the statement covering byte ``span`` with a single ``;``."""
    return _redact_and_parse(source, span)[0]


def _empty_statement_at(ast: AstNode, offset: int) -> AstNode:
    for node in ast.walk():
        if node.kind == "EmptyStatement" and node.span is not None and node.span[0] == offset:
            return node
    raise ExtractionError(f"no empty statement at byte {offset} after redaction")


# ---- samples --------------------------------------------------------------

def make_sample(graph: ProgramGraph, center: int, label=None, min_hops: int = DEFAULT_MIN_HOPS,
                max_hops: int = DEFAULT_MAX_HOPS, origin: Optional[Origin] = None) -> LabeledSample:
    """Cut the hop window around ``center`` out of ``graph``."""
    if not (0 <= center < len(graph.nodes)):
        raise ExtractionError(f"center {center} missing from graph")
    keep = k_hop_nodes(graph, center, min_hops, max_hops) | {center}
    sub, remap = induced_subgraph(graph, keep)
    if origin is None:
        origin = Origin(graph.project, graph.file_path, graph.nodes[center].span)
    label = None if label is None else LogLevel.parse(label)
    return LabeledSample(sub, remap[center], label, origin)


@dataclass
class ExtractionStats:
    files: int = 0
    files_with_logs: int = 0
    samples: int = 0
    per_level: Counter = field(default_factory=Counter)
    per_project: Counter = field(default_factory=Counter)
    dropped: Counter = field(default_factory=Counter)
    calls: Counter = field(default_factory=Counter)

    def merge(self, other: "ExtractionStats") -> "ExtractionStats":
        return ExtractionStats(
            self.files + other.files,
            self.files_with_logs + other.files_with_logs,
            self.samples + other.samples,
            self.per_level + other.per_level,
            self.per_project + other.per_project,
            self.dropped + other.dropped,
            self.calls + other.calls,
        )

    __add__ = merge

    def record(self, sample: LabeledSample) -> None:
        self.samples += 1
        if sample.label is not None:
            self.per_level[sample.label.label] += 1
        self.per_project[sample.project] += 1

    def to_dict(self) -> dict:
        return {
            "files": self.files,
            "files_with_logs": self.files_with_logs,
            "samples": self.samples,
            "per_level": {name: self.per_level.get(name, 0) for name in LEVEL_NAMES},
            "per_project": dict(sorted(self.per_project.items())),
            "dropped": dict(sorted(self.dropped.items())),
            "calls": dict(sorted(self.calls.items())),
        }


def extract_source(source: str, file_path: str = "", project: str = "",
                   min_hops: int = DEFAULT_MIN_HOPS, max_hops: int = DEFAULT_MAX_HOPS,
                   stats: Optional[ExtractionStats] = None) -> list[LabeledSample]:
    """One labeled sample per log statement of a Java source file."""
    if stats is None:
        stats = ExtractionStats()
    ast, tokens = parse_source(source)
    sites = find_log_statements(ast, tokens)
    if sites:
        stats.files_with_logs += 1
    samples = []
    for site in sites:
        try:
            _, red_ast, red_tokens = _redact_and_parse(source, site.span)
            center_stmt = _empty_statement_at(red_ast, site.span[0])
        except (RedactionError, ExtractionError) as exc:
            logger.warning("%s: dropping %s statement at %s: %s", file_path, site.level.label, site.span, exc)
            stats.dropped["redaction_failed"] += 1
            continue
        call_stats: Counter = Counter()
        graph = build_graph(red_ast, red_tokens, file_path, project, call_stats)
        if not samples:  # call resolution is counted once per file
            stats.calls.update(call_stats)
        center = _statement_node(graph, center_stmt)
        sample = make_sample(graph, center, site.level, min_hops, max_hops,
                             Origin(project, file_path, site.span))
        stats.record(sample)
        samples.append(sample)
    return samples


def _statement_node(graph: ProgramGraph, statement: AstNode) -> int:
    for node in graph.nodes:
        if (node.node_type is NodeType.AST_ELEMENT and node.text == statement.kind
                and node.span == statement.span):
            return node.id
    raise ExtractionError(f"{statement.kind} at {statement.span} not found in graph")


# ---- graph-level extraction (imported interchange graphs) ----------------

_TOKEN_TYPES = (NodeType.TOKEN, NodeType.IDENTIFIER_TOKEN, NodeType.COMMENT_LINE)


def _ordered_tokens(g: ProgramGraph) -> list[int]:
    toks = [n for n in g.nodes if n.node_type in _TOKEN_TYPES]
    return [n.id for n in sorted(toks, key=lambda n: (n.span[0] if n.span else float("inf"), n.id))]


class GraphLogSite(NamedTuple):
    tokens: tuple[int, ...]  # statement token node ids, terminating ';' last
    level: LogLevel


def find_log_sites_in_graph(g: ProgramGraph) -> list[GraphLogSite]:
    """Token-pattern detection of ``<logger>.<level>(...);`` in a graph."""
    order = [i for i in _ordered_tokens(g) if g.nodes[i].node_type is not NodeType.COMMENT_LINE]
    texts = [g.nodes[i].text for i in order]
    sites = []
    k = 0
    while k + 3 < len(order):
        node = g.nodes[order[k]]
        if (node.node_type is NodeType.IDENTIFIER_TOKEN and "log" in node.text.lower()
                and (k == 0 or texts[k - 1] != ".") and texts[k + 1] == "."
                and texts[k + 2].upper() in LogLevel.__members__ and texts[k + 3] == "("):
            depth, j = 0, k + 3
            while j < len(order):
                if texts[j] == "(":
                    depth += 1
                elif texts[j] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if j + 1 < len(order) and texts[j + 1] == ";":
                sites.append(GraphLogSite(tuple(order[k:j + 2]), LogLevel[texts[k + 2].upper()]))
                k = j + 2
                continue
        k += 1
    return sites


def redact_graph(g: ProgramGraph, site: GraphLogSite) -> tuple[ProgramGraph, int]:
    """Drop a log statement's tokens (and AST nodes left empty) from ``g``.

    The terminating ``;`` token survives; returns the new graph and the id
    of the statement node owning it (or of the ``;`` itself).
    """
    semicolon = site.tokens[-1]
    order = _ordered_tokens(g)
    lo, hi = order.index(site.tokens[0]), order.index(semicolon)
    removed = set(order[lo:hi])

    owned: dict[int, list[int]] = {}
    children: dict[int, list[int]] = {}
    for e in g.edges:
        if e.etype is EdgeType.ASSOCIATED_TOKEN:
            owned.setdefault(e.dst, []).append(e.src)
        elif e.etype is EdgeType.AST_CHILD:
            children.setdefault(e.src, []).append(e.dst)

    memo: dict[int, bool] = {}

    def emptied(n: int) -> bool:
        if n in memo:
            return memo[n]
        stack, post = [n], []
        while stack:
            u = stack.pop()
            if u in memo:
                continue
            post.append(u)
            stack.extend(c for c in children.get(u, ()) if c not in memo)
        for u in reversed(post):
            parts = [t in removed for t in owned.get(u, ())]
            parts += [memo.get(c, False) for c in children.get(u, ())]
            memo[u] = bool(parts) and all(parts)
        return memo[n]

    for node in g.nodes:
        if node.node_type in (NodeType.AST_ELEMENT, NodeType.FAKE_AST) and emptied(node.id):
            removed.add(node.id)

    owners = [e.dst for e in g.edges if e.etype is EdgeType.ASSOCIATED_TOKEN and e.src == semicolon]
    center = owners[0] if owners else semicolon
    keep = [n.id for n in g.nodes if n.id not in removed]
    sub, remap = induced_subgraph(g, keep)
    edges = list(sub.edges)
    if lo > 0:
        prev = order[lo - 1]
        if prev in remap:
            extra = Edge(remap[prev], remap[semicolon], EdgeType.NEXT_TOKEN)
            if extra not in set(edges):
                edges.append(extra)
    return ProgramGraph(sub.nodes, edges, g.file_path, g.project), remap[center]


def extract_graph(g: ProgramGraph, min_hops: int = DEFAULT_MIN_HOPS, max_hops: int = DEFAULT_MAX_HOPS,
                  stats: Optional[ExtractionStats] = None) -> list[LabeledSample]:
    if stats is None:
        stats = ExtractionStats()
    sites = find_log_sites_in_graph(g)
    if sites:
        stats.files_with_logs += 1
    samples = []
    for site in sites:
        first, last = g.nodes[site.tokens[0]].span, g.nodes[site.tokens[-1]].span
        span = (first[0], last[1]) if first and last else None
        redacted, center = redact_graph(g, site)
        sample = make_sample(redacted, center, site.level, min_hops, max_hops,
                             Origin(g.project, g.file_path, span))
        stats.record(sample)
        samples.append(sample)
    return samples


# ---- corpus ----------------------------------------------------------------

def _project_of(root: Path, path: Path) -> str:
    rel = path.relative_to(root)
    return rel.parts[0] if len(rel.parts) > 1 else root.name


def _extract_one(args) -> tuple[list[LabeledSample], ExtractionStats]:
    path, root, min_hops, max_hops = args
    stats = ExtractionStats(files=1)
    project = _project_of(root, path)
    rel = path.relative_to(root).as_posix()
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        logger.warning("skipping unreadable file %s: %s", path, exc)
        stats.dropped["unreadable"] += 1
        return [], stats
    try:
        if path.suffix == ".java":
            samples = extract_source(text, rel, project, min_hops, max_hops, stats)
        else:
            graph = loads_graph(text)
            problems = validate_graph(graph)
            if problems:
                raise GraphFormatError(f"invalid graph: {problems[0]}")
            if not graph.project:
                graph = ProgramGraph(graph.nodes, graph.edges, graph.file_path or rel, project)
            samples = extract_graph(graph, min_hops, max_hops, stats)
    except DataError as exc:
        logger.warning("skipping %s: %s", path, exc)
        stats.dropped[type(exc).__name__] += 1
        return [], stats
    return samples, stats


def corpus_files(root) -> list[Path]:
    root = Path(root)
    files = [p for p in root.rglob("*") if p.is_file() and p.suffix in (".java", ".json")]
    return sorted(files, key=lambda p: p.relative_to(root).as_posix())


def extract_corpus(root, min_hops: int = DEFAULT_MIN_HOPS, max_hops: int = DEFAULT_MAX_HOPS,
                   n_jobs: int = 1) -> tuple[list[LabeledSample], ExtractionStats]:
    """Samples for every log statement under ``root``.

    Files directly under ``root`` belong to a project named after ``root``;
    anything deeper belongs to the project named by its first path component.
    """
    root = Path(root)
    if not root.is_dir():
        raise ConfigError(f"corpus directory {root} does not exist")
    if min_hops < 0 or max_hops < min_hops:
        raise ConfigError(f"need 0 <= min_hops <= max_hops, got {min_hops}, {max_hops}")
    jobs = [(path, root, min_hops, max_hops) for path in corpus_files(root)]
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_extract_one, jobs))
    else:
        results = [_extract_one(job) for job in jobs]
    samples: list[LabeledSample] = []
    stats = ExtractionStats()
    for file_samples, file_stats in results:
        samples.extend(file_samples)
        stats = stats + file_stats
    return samples, stats


# ---- prediction sites -----------------------------------------------------

def prediction_sites(source: str, file_path: str = "", project: str = "",
                     min_hops: int = DEFAULT_MIN_HOPS, max_hops: int = DEFAULT_MAX_HOPS) -> list[LabeledSample]:
    """Unlabeled samples for every log statement and every bare ``;`` statement.

    Log statements are redacted first, so the model never sees the level it
    is asked to predict; the true level is kept on the sample as its label.
    """
    ast, tokens = parse_source(source)
    samples = extract_source(source, file_path, project, min_hops, max_hops)
    graph = None
    for node in ast.walk():
        if node.kind != "EmptyStatement":
            continue
        if graph is None:
            graph = build_graph(ast, tokens, file_path, project)
        center = _statement_node(graph, node)
        samples.append(make_sample(graph, center, None, min_hops, max_hops,
                                   Origin(project, file_path, node.span)))
    return sorted(samples, key=lambda s: s.origin.span or (0, 0))


# ---- sample files -----------------------------------------------------------

def sample_to_dict(sample: LabeledSample) -> dict:
    return {
        "graph": graph_to_dict(sample.graph),
        "center": sample.center,
        "label": None if sample.label is None else sample.label.label,
        "project": sample.project,
        "file": sample.origin.file,
        "span": list(sample.origin.span) if sample.origin.span else None,
    }


def sample_from_dict(data: dict) -> LabeledSample:
    try:
        graph = graph_from_dict(data["graph"])
        center = data["center"]
        label = data.get("label")
        span = data.get("span")
        origin = Origin(data.get("project", graph.project), data.get("file", graph.file_path),
                        tuple(span) if span else None)
    except (KeyError, TypeError) as exc:
        raise ExtractionError(f"malformed sample record: {exc}") from None
    if not isinstance(center, int):
        raise ExtractionError("sample center must be an integer")
    try:
        level = None if label is None else LogLevel.parse(label)
    except ValueError as exc:
        raise ExtractionError(str(exc)) from None
    return LabeledSample(graph, center, level, origin)


def write_samples(path, samples: Iterable[LabeledSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample_to_dict(sample), sort_keys=True))
            fh.write("\n")


def read_samples(path) -> list[LabeledSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExtractionError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
            samples.append(sample_from_dict(data))
    return samples


def read_sample_dir(directory) -> list[LabeledSample]:
    samples = []
    for path in sorted(Path(directory).glob("*.jsonl")):
        samples.extend(read_samples(path))
    return samples


def level_counts(samples: Iterable[LabeledSample]) -> dict[str, int]:
    counts = Counter(s.label.label for s in samples if s.label is not None)
    return {name: counts.get(name, 0) for name in LEVEL_NAMES}


def source_level_histogram(text: str) -> dict[str, int]:
    """Level histogram of log statements in one source text."""
    ast, tokens = parse_source(text)
    counts = Counter(site.level.label for site in find_log_statements(ast, tokens))
    return {name: counts.get(name, 0) for name in LEVEL_NAMES}


__all__ = [
    "DEFAULT_MAX_HOPS", "DEFAULT_MIN_HOPS", "ExtractionStats", "LEVEL_NAMES",
    "LabeledSample", "LogLevel", "LogSite", "N_LEVELS", "Origin", "extract_corpus",
    "extract_graph", "extract_source", "find_log_sites_in_graph", "find_log_statements",
    "log_call_level", "make_sample", "prediction_sites", "read_sample_dir",
    "read_samples", "redact", "redact_graph", "sample_from_dict", "sample_to_dict",
    "write_samples",
]
