from pathlib import Path

import pytest

from loglevel_ggnn.errors import LexError, ParseError
from loglevel_ggnn.graph import EdgeType, NodeType, validate_graph
from loglevel_ggnn.java.graph_builder import analyze_scopes, graph_from_source
from loglevel_ggnn.java.lexer import tokenize
from loglevel_ggnn.java.parser import AstNode, parse_source
from loglevel_ggnn.synthetic import generate_corpus

from .snippets import EDGE_CHECKS, edge_types, method_graph, occurrences

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"
PARSEABLE = [p for p in sorted(CORPUS.rglob("*.java")) if p.name != "Scheduler.java"]


def texts(tokens):
    return [t.text for t in tokens]


def test_tokenize_examples():
    assert texts(tokenize("int i;")) == ["int", "i", ";"]
    toks = tokenize("i = 9; // done")
    assert texts(toks) == ["i", "=", "9", ";", "// done"]
    assert [t.kind for t in toks] == ["identifier", "punctuation", "literal", "punctuation", "comment"]


@pytest.mark.parametrize("source", ['"unclosed', "x = '", "/* never closed"])
def test_tokenize_errors_carry_position(source):
    with pytest.raises(LexError) as info:
        tokenize(source)
    assert info.value.line == 1


def test_tokens_reproduce_source_with_whitespace():
    source = "class A {\n  /* c */ int x = 1; // é\n  String s = \"a b\";\n}\n"
    raw = source.encode("utf-8")
    toks = tokenize(source)
    rebuilt, pos = b"", 0
    for t in toks:
        assert raw[pos:t.span[0]].strip() == b""
        rebuilt += raw[pos:t.span[0]] + t.text.encode("utf-8")
        assert raw[t.span[0]:t.span[1]].decode("utf-8") == t.text
        pos = t.span[1]
    assert rebuilt + raw[pos:] == raw


def test_spans_ordered_and_disjoint():
    toks = tokenize((CORPUS / "zk" / "Quorum.java").read_text(encoding="utf-8"))
    for a, b in zip(toks, toks[1:]):
        assert a.span[1] <= b.span[0]


def test_shift_operators_in_generics():
    ast, toks = parse_source("class A { Map<String, List<Integer>> m; int f(int a) { return a >> 2 >>> 1; } }")
    assert [t.index for t in ast.leaves()] == list(range(len(toks)))


@pytest.mark.parametrize("path", PARSEABLE, ids=lambda p: p.name)
def test_leaf_order_reproduces_tokens(path):
    ast, toks = parse_source(path.read_text(encoding="utf-8"))
    assert [t.index for t in ast.leaves()] == list(range(len(toks)))


def test_parse_assignment_shape():
    ast, _ = parse_source("class A { void m() { x = y + 5; } }")
    assign = next(n for n in ast.walk() if n.kind == "Assignment")
    kinds = [c.kind for c in assign.children if isinstance(c, AstNode)]
    assert "BinaryExpr" in kinds


def test_parse_if_else_roles():
    ast, _ = parse_source("class A { void m() { if (x>y){ a(); } else { b(); } } }")
    node = next(n for n in ast.walk() if n.kind == "IfStatement")
    assert set(node.roles) >= {"cond", "then", "else"}
    assert node.roles["cond"].text() == "x>y"


def test_empty_class_body():
    ast, _ = parse_source("class Empty { }")
    body = next(n for n in ast.walk() if n.kind == "ClassBody")
    assert [c for c in body.children if isinstance(c, AstNode)] == []


def test_parse_error_names_token():
    with pytest.raises(ParseError, match="';'") as info:
        parse_source("class A { void m() { x = ; } }")
    assert (info.value.line, info.value.column) == (1, 26)


def test_lambda_is_rejected():
    with pytest.raises(ParseError, match="lambda"):
        parse_source((CORPUS / "hdfs" / "Scheduler.java").read_text())


@pytest.mark.parametrize("name", list(EDGE_CHECKS))
def test_edge_examples(name):
    EDGE_CHECKS[name]()


def test_returns_to_method():
    src, g = method_graph("return;", params="")
    ret = next(n.id for n in g.nodes if n.text == "return")
    method = next(n.id for n in g.nodes if n.text == "MethodDecl")
    assert [(e.src, e.dst) for e in g.edges if e.etype == EdgeType.RETURNS_TO] == [(ret, method)]


def test_syntax_edge_counts():
    g = graph_from_source("class A { }")
    tokens = [n for n in g.nodes if n.node_type in (NodeType.TOKEN, NodeType.IDENTIFIER_TOKEN)]
    assert len(tokens) == 4
    assert sum(e.etype == EdgeType.NEXT_TOKEN for e in g.edges) == 3
    ident = next(n.id for n in g.nodes if n.node_type == NodeType.IDENTIFIER_TOKEN)
    assert sum(e.etype == EdgeType.ASSOCIATED_TOKEN and e.src == ident for e in g.edges) == 1
    ast_nodes = [n for n in g.nodes if n.node_type in (NodeType.AST_ELEMENT, NodeType.FAKE_AST)]
    assert sum(e.etype == EdgeType.AST_CHILD for e in g.edges) == len(ast_nodes) - 1


def test_last_write_chain():
    body = "int a = 1;\n a = 2;\n a = 3;\n a = 4;\n"
    src, g = method_graph(body, params="")
    w0, w1, w2, w3 = occurrences(src, g, "a")
    writes = {(e.src, e.dst) for e in g.edges if e.etype == EdgeType.LAST_WRITE}
    assert writes == {(w1, w0), (w2, w1), (w3, w2)}
    assert not any(e.etype == EdgeType.LAST_USE for e in g.edges)


def test_lexical_use_across_sibling_scopes():
    body = "{ int tmp = 1; f(tmp); } { int tmp = 2; g(tmp); }"
    src, g = method_graph(body, params="")
    first_use, second_decl = occurrences(src, g, "tmp")[1:3]
    assert edge_types(g, second_decl, first_use) == {EdgeType.LAST_LEXICAL_USE}
    first = set(occurrences(src, g, "tmp")[:2])
    second = set(occurrences(src, g, "tmp")[2:])
    assert not any(e.etype in (EdgeType.LAST_WRITE, EdgeType.LAST_USE) and
                   ((e.src in first and e.dst in second) or (e.src in second and e.dst in first)) for e in g.edges)


def test_at_most_one_last_write_per_occurrence():
    for path in PARSEABLE:
        g = graph_from_source(path.read_text(encoding="utf-8"))
        out = {}
        for e in g.edges:
            if e.etype == EdgeType.LAST_WRITE:
                out[e.src] = out.get(e.src, 0) + 1
        assert max(out.values(), default=0) <= 1


def test_condition_only_variable_has_no_guard():
    src, g = method_graph("if (x > 0) { f(); }", params="int x")
    assert not any(e.etype in (EdgeType.GUARDED_BY, EdgeType.GUARDED_BY_NEGATION) for e in g.edges)


def test_has_type_for_int_declaration():
    src, g = method_graph("int i; i = 3; f(i);", params="")
    int_type = next(n.id for n in g.nodes if n.node_type == NodeType.TYPE and n.text == "int")
    for occ in occurrences(src, g, "i"):
        assert edge_types(g, occ, int_type) == {EdgeType.HAS_TYPE}


def test_unresolved_call_counted():
    from collections import Counter
    stats = Counter()
    src = "class A { void m(int x) { other.call(x); missing(x); } }"
    g = graph_from_source(src, stats=stats)
    assert not any(e.etype == EdgeType.FORMAL_ARG_NAME for e in g.edges)
    assert stats["unresolved_calls"] == 2


def expected_guards(ast):
    """Enclosing guard conditions for every token leaf, by direct AST walk."""
    out = {}

    def walk(node, guards):
        if not isinstance(node, AstNode):
            out[node.index] = set(guards)
            return
        for child in node.children:
            extra = []
            if node.kind in ("IfStatement", "WhileStatement", "DoStatement", "ForStatement") \
                    and child is not node.roles.get("cond") and "cond" in node.roles:
                if child is node.roles.get("then") or child is node.roles.get("body"):
                    extra = [(id(node.roles["cond"]), False)]
                elif child is node.roles.get("else"):
                    extra = [(id(node.roles["cond"]), True)]
            walk(child, guards + extra)

    walk(ast, [])
    return out


NESTED = """
class G {
  int f(int a, int b) {
    int c = 0;
    if (a > b) {
      while (c < a) {
        if (b != 0) { c = c + b; } else { c++; }
      }
    } else {
      for (int k = 0; k < b; k++) { c += k; }
    }
    do { a--; } while (a > 0);
    return c;
  }
}
"""


@pytest.mark.parametrize("source", [NESTED] + [p.read_text(encoding="utf-8") for p in PARSEABLE[:6]])
def test_guard_edges_match_ast_walk(source):
    ast, toks = parse_source(source)
    g = graph_from_source(source)
    cond_ids = {}
    for node in ast.walk():
        for role in ("cond",):
            if role in node.roles:
                c = node.roles[role]
                cond_ids[id(c)] = c
    # graph ids follow pre-order creation, so map AST nodes by span and kind
    by_key = {}
    for n in g.nodes:
        if n.node_type in (NodeType.AST_ELEMENT, NodeType.FAKE_AST):
            by_key.setdefault((n.text, n.span), n.id)
    tok_node = {}
    for n in g.nodes:
        if n.node_type in (NodeType.TOKEN, NodeType.IDENTIFIER_TOKEN, NodeType.COMMENT_LINE):
            tok_node[n.span] = n.id
    variables = {tok_node[occ.token.span] for occ in analyze_scopes(ast).occurrences}
    expected = set()
    for index, guards in expected_guards(ast).items():
        node = tok_node[toks[index].span]
        if node not in variables:
            continue
        for cid, negated in guards:
            c = cond_ids[cid]
            etype = EdgeType.GUARDED_BY_NEGATION if negated else EdgeType.GUARDED_BY
            expected.add((node, by_key[(c.kind, c.span)], etype))
    actual = {(e.src, e.dst, e.etype) for e in g.edges
              if e.etype in (EdgeType.GUARDED_BY, EdgeType.GUARDED_BY_NEGATION)}
    assert actual == expected


def test_nested_ifs_guard_inner_variable_twice():
    src, g = method_graph("if (x > 0) { if (y > 0) { f(j); } }")
    j = occurrences(src, g, "j")[-1]
    targets = {e.dst for e in g.edges if e.src == j and e.etype == EdgeType.GUARDED_BY}
    assert len(targets) == 2


def test_graphs_validate_on_corpora():
    for path in PARSEABLE:
        assert validate_graph(graph_from_source(path.read_text(encoding="utf-8"))) == []
    for source in generate_corpus(3, seed=5).values():
        assert validate_graph(graph_from_source(source)) == []
