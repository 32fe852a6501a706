"""Small Java snippets with known edges, wrapped into compilable classes."""
from loglevel_ggnn.graph import EdgeType, NodeType
from loglevel_ggnn.java.graph_builder import graph_from_source

ANALYSIS_EDGES = frozenset(EdgeType) - {EdgeType.AST_CHILD, EdgeType.NEXT_TOKEN, EdgeType.ASSOCIATED_TOKEN,
                                        EdgeType.HAS_TYPE, EdgeType.ASSOCIATED_SYMBOL}


def method_graph(body, members="", params="int j, int y, int x"):
    src = "class A { " + members + " void m(" + params + ") { " + body + " } }"
    return src, graph_from_source(src)


def occurrences(src, g, name):
    """Graph ids of IDENTIFIER_TOKEN nodes spelled ``name``, in source order."""
    out = [n for n in g.nodes if n.node_type == NodeType.IDENTIFIER_TOKEN and n.text == name]
    return [n.id for n in sorted(out, key=lambda n: n.span)]


def edge_types(g, a, b):
    return {e.etype for e in g.edges if e.src == a and e.dst == b}


def between(g, a, b):
    """Edge types in either direction between nodes a and b."""
    return edge_types(g, a, b) | edge_types(g, b, a)


def analysis_edges(g):
    return {(e.src, e.dst, e.etype) for e in g.edges if e.etype in ANALYSIS_EDGES}


def check_last_write_only():
    src, g = method_graph("int i; i = 9;", params="")
    decl, write = occurrences(src, g, "i")
    assert edge_types(g, write, decl) == {EdgeType.LAST_WRITE}
    assert analysis_edges(g) == {(write, decl, EdgeType.LAST_WRITE)}


def check_last_write_and_use():
    src, g = method_graph("i = 0; x = i + j;", params="int i, int j, int x")
    _, w, r = occurrences(src, g, "i")
    assert edge_types(g, r, w) == {EdgeType.LAST_WRITE, EdgeType.LAST_USE}


def check_computed_from():
    src, g = method_graph("x = y + 5;", params="int y, int x")
    x = occurrences(src, g, "x")[-1]
    y = occurrences(src, g, "y")[-1]
    assert EdgeType.COMPUTED_FROM in edge_types(g, x, y)
    assert [(e.src, e.dst) for e in g.edges if e.etype == EdgeType.COMPUTED_FROM] == [(x, y)]


def check_formal_arg_name():
    src, g = method_graph("myfunc(x);", members="private static int myfunc(int param) { return 0; }",
                          params="int x")
    param = occurrences(src, g, "param")[0]
    x = occurrences(src, g, "x")[-1]
    assert [(e.src, e.dst) for e in g.edges if e.etype == EdgeType.FORMAL_ARG_NAME] == [(x, param)]


def check_guards():
    src, g = method_graph("if (x>y){ x++; } else { y++; }", params="int x, int y")
    cond = [n.id for n in g.nodes if n.node_type == NodeType.AST_ELEMENT and n.text == "BinaryExpr"]
    assert len(cond) == 1
    cond = cond[0]
    assert "".join(g.nodes[t].text for t in sorted(
        (e.src for e in g.edges if e.etype == EdgeType.ASSOCIATED_TOKEN and e.dst in
         {cond} | {c.dst for c in g.edges if c.etype == EdgeType.AST_CHILD and c.src == cond}),
        key=lambda t: g.nodes[t].span)) == "x>y"
    x_body = occurrences(src, g, "x")[-1]
    y_else = occurrences(src, g, "y")[-1]
    guard = {(e.src, e.dst, e.etype) for e in g.edges
             if e.etype in (EdgeType.GUARDED_BY, EdgeType.GUARDED_BY_NEGATION)}
    assert guard == {(x_body, cond, EdgeType.GUARDED_BY), (y_else, cond, EdgeType.GUARDED_BY_NEGATION)}


EDGE_CHECKS = {
    "LAST_WRITE only": check_last_write_only,
    "LAST_WRITE + LAST_USE": check_last_write_and_use,
    "COMPUTED_FROM": check_computed_from,
    "FORMAL_ARG_NAME": check_formal_arg_name,
    "GUARDED_BY / GUARDED_BY_NEGATION": check_guards,
}
