"""Java subset frontend: tokenizer, parser and program-graph builder."""
from .graph_builder import (
    GraphBuilder,
    ScopeTable,
    analyze_scopes,
    build_graph,
    graph_from_source,
    link_call_and_type_edges,
    link_dataflow_edges,
    link_guard_edges,
    link_syntax_edges,
)
from .lexer import SourceToken, tokenize
from .parser import AstNode, parse, parse_source

__all__ = [
    "AstNode", "GraphBuilder", "ScopeTable", "SourceToken", "analyze_scopes",
    "build_graph", "graph_from_source", "link_call_and_type_edges",
    "link_dataflow_edges", "link_guard_edges", "link_syntax_edges", "parse",
    "parse_source", "tokenize",
]
