import json
import re
from pathlib import Path

import pytest

from loglevel_ggnn.errors import ConfigError, ExtractionError, RedactionError
from loglevel_ggnn.graph import EdgeType, NodeType, dumps_graph, validate_graph, write_graph
from loglevel_ggnn.java.graph_builder import graph_from_source
from loglevel_ggnn.java.parser import parse_source
from loglevel_ggnn.logs import (
    LEVEL_NAMES, LabeledSample, LogLevel, extract_corpus, extract_source, find_log_statements,
    level_counts, make_sample, prediction_sites, read_samples, redact, sample_from_dict, sample_to_dict,
    write_samples,
)
from loglevel_ggnn.synthetic import write_corpus

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"
GOLDEN = FIXTURES / "golden_extract_stats.json"


def wrap(body, members=""):
    return "class A {\n" + members + "\nvoid m(Object argNb, Object arg, String errMsg, Throwable t) {\n" \
        + body + "\n}\n}\n"


def levels(source):
    ast, toks = parse_source(source)
    return [site.level for site in find_log_statements(ast, toks)]


def test_level_order_and_parse():
    assert LEVEL_NAMES == ("trace", "debug", "info", "warn", "error", "fatal")
    assert [int(l) for l in LogLevel] == list(range(6))
    assert LogLevel.parse("WARN") is LogLevel.WARN
    assert LogLevel.parse(4) is LogLevel.ERROR
    with pytest.raises(ValueError):
        LogLevel.parse("verbose")


@pytest.mark.parametrize("stmt,expected", [
    ('LOG.info("Args[{}]:{}", argNb, arg);', [LogLevel.INFO]),
    ("logger.error(errMsg, t);", [LogLevel.ERROR]),
    ("this.log.Warn(errMsg);", [LogLevel.WARN]),
    ("if (LOG.isDebugEnabled()) { }", []),
    ("catalog.info(errMsg);", [LogLevel.INFO]),
    ("out.info(errMsg);", []),
    ("LOG.verbose(errMsg);", []),
    ("String s = LOG.info(errMsg);", []),
])
def test_detection(stmt, expected):
    assert levels(wrap(stmt)) == expected


def test_redact_multiline_statement():
    src = wrap('LOG.info("a",\n    argNb,\n    arg);\nint z = 1;')
    (site,) = find_log_statements(*parse_source(src))
    out = redact(src, site.span)
    raw, new = src.encode(), out.encode()
    assert new == raw[:site.span[0]] + b";" + raw[site.span[1]:]
    assert "LOG" not in out


def test_redact_rejects_bad_span():
    src = wrap("int z = 1;")
    with pytest.raises(RedactionError):
        redact(src, (0, 5))


def test_no_log_statements_is_identity():
    src = (CORPUS / "hdfs" / "PathUtil.java").read_text()
    assert extract_source(src) == []
    assert levels(src) == []


def test_throw_adjacent_example():
    src = (FIXTURES / "throw_adjacent_redacted.java").read_text()
    sites = prediction_sites(src)
    assert len(sites) == 2
    for s in sites:
        g = s.graph
        semis = [e.src for e in g.edges if e.etype == EdgeType.ASSOCIATED_TOKEN and e.dst == s.center]
        nxt = {e.dst for e in g.edges if e.etype == EdgeType.NEXT_TOKEN and e.src in semis}
        assert any(g.nodes[n].text == "throw" for n in nxt)


def test_each_sample_redacts_only_its_own_statement():
    body = 'LOG.info("first message");\nint z = 1;\nLOG.warn("second message");\nLOG.error("third message");'
    samples = extract_source(wrap(body), max_hops=100)
    assert [s.label for s in samples] == [LogLevel.INFO, LogLevel.WARN, LogLevel.ERROR]
    msgs = ['"first message"', '"second message"', '"third message"']
    for i, s in enumerate(samples):
        texts = {n.text for n in s.graph.nodes}
        assert msgs[i] not in texts
        assert all(m in texts for j, m in enumerate(msgs) if j != i)
        assert s.graph.nodes[s.center].text == "EmptyStatement"
        assert validate_graph(s.graph) == []


def test_make_sample_windows():
    src = wrap("LOG.info(errMsg);")
    (sample,) = extract_source(src, max_hops=0)
    assert len(sample.graph.nodes) == 1 and sample.center == 0
    (full,) = extract_source(src, max_hops=1000)
    whole = graph_from_source(redact(src, find_log_statements(*parse_source(src))[0].span))
    assert len(full.graph.nodes) == len(whole.nodes)
    with pytest.raises(ExtractionError):
        make_sample(whole, len(whole.nodes))
    with pytest.raises(ConfigError):
        make_sample(whole, 0, min_hops=3, max_hops=1)


def test_labeled_sample_checks_center():
    g = graph_from_source("class A { }")
    with pytest.raises(ExtractionError):
        LabeledSample(g, 99)
    assert LabeledSample(g, 0, "info").label is LogLevel.INFO


def test_golden_stats():
    samples, stats = extract_corpus(CORPUS)
    assert stats.to_dict() == json.loads(GOLDEN.read_text())
    assert len(samples) == 18
    for s in samples:
        assert validate_graph(s.graph) == []
        assert 0 <= s.center < len(s.graph.nodes)


def test_parallel_extraction_matches_serial():
    a, sa = extract_corpus(CORPUS, n_jobs=1)
    b, sb = extract_corpus(CORPUS, n_jobs=3)
    assert sa.to_dict() == sb.to_dict()
    assert [sample_to_dict(x) for x in a] == [sample_to_dict(x) for x in b]


def test_empty_and_missing_corpus(tmp_path):
    samples, stats = extract_corpus(tmp_path)
    assert samples == [] and stats.files == 0
    (tmp_path / "p").mkdir()
    (tmp_path / "p" / "Quiet.java").write_text("class Quiet { void m() { int x = 1; } }")
    samples, stats = extract_corpus(tmp_path)
    assert samples == [] and stats.files == 1
    with pytest.raises(ConfigError):
        extract_corpus(tmp_path / "nope")


def grep_levels(text):
    """Count `<...log...>.<level>(` with a regex, independent of the parser."""
    counts = dict.fromkeys(LEVEL_NAMES, 0)
    for m in re.finditer(r"\b(\w+)\s*\.\s*(trace|debug|info|warn|error|fatal)\s*\(", text):
        if "log" in m.group(1).lower():
            counts[m.group(2)] += 1
    return counts


def test_synthetic_histogram_matches_grep(tmp_path):
    paths = write_corpus(tmp_path, n_per_level=2, seed=3, projects=("one",))[:10]
    keep = set(paths)
    for p in tmp_path.rglob("*.java"):
        if p not in keep:
            p.unlink()
    expected = dict.fromkeys(LEVEL_NAMES, 0)
    for p in paths:
        for k, v in grep_levels(p.read_text()).items():
            expected[k] += v
    samples, stats = extract_corpus(tmp_path)
    assert stats.files == 10
    assert level_counts(samples) == expected
    assert {k: stats.per_level.get(k, 0) for k in LEVEL_NAMES} == expected


def test_interchange_graph_path(tmp_path):
    src = (CORPUS / "zk" / "Election.java").read_text()
    g = graph_from_source(src, "Election.java", "zk")
    (tmp_path / "zk").mkdir()
    write_graph(g, tmp_path / "zk" / "Election.json")
    samples, stats = extract_corpus(tmp_path)
    expected = [s.label for s in extract_source(src, "Election.java", "zk")]
    assert [s.label for s in samples] == expected
    for s in samples:
        assert validate_graph(s.graph) == []
        center = s.graph.nodes[s.center]
        assert center.node_type is NodeType.AST_ELEMENT
        assert s.label.label not in [n.text for n in s.graph.nodes]
    assert stats.per_project == {"zk": len(expected)}


def test_invalid_interchange_graph_dropped(tmp_path):
    g = graph_from_source("class A { }")
    doc = json.loads(dumps_graph(g))
    doc["edges"].append({"src": 0, "dst": 999, "type": "NEXT_TOKEN"})
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    samples, stats = extract_corpus(tmp_path)
    assert samples == [] and stats.dropped == {"GraphFormatError": 1}


def test_sample_jsonl_round_trip(tmp_path):
    samples, _ = extract_corpus(CORPUS)
    path = tmp_path / "s.jsonl"
    write_samples(path, samples)
    back = read_samples(path)
    assert back == samples
    line = json.loads(path.read_text().splitlines()[0])
    assert {"graph", "center", "label", "project"} <= set(line)
    unlabeled = sample_from_dict({**line, "label": None})
    assert unlabeled.label is None


def test_malformed_sample_line(tmp_path):
    path = tmp_path / "s.jsonl"
    path.write_text('{"center": 0}\n')
    with pytest.raises(ExtractionError):
        read_samples(path)
    path.write_text("{not json\n")
    with pytest.raises(ExtractionError, match=":1:"):
        read_samples(path)


def test_prediction_sites_include_bare_semicolons():
    src = (FIXTURES / "debug_guard_redacted.java").read_text()
    sites = prediction_sites(src)
    assert len(sites) == 1 and sites[0].label is None
    assert prediction_sites("class A { void m() { int x = 1; } }") == []
    mixed = prediction_sites(wrap("LOG.debug(errMsg);\n;"))
    assert [s.label for s in mixed] == [LogLevel.DEBUG, None]
