"""Turn a parsed Java file into a :class:`~loglevel_ggnn.graph.ProgramGraph`.

Nodes are emitted in a pre-order walk of the syntax tree: every AST node
becomes an ``AST_ELEMENT`` (``FAKE_AST`` for synthesized wrappers) and every
token leaf a ``TOKEN``/``IDENTIFIER_TOKEN``/``COMMENT_LINE`` node.  ``TYPE``
and ``SYMBOL_TYP`` nodes are appended last.

Dataflow is computed by one lexical pass (:func:`analyze_scopes`) in which
the most recent textual occurrence wins; there is no path sensitivity.  In
assignments and initializers the right-hand side is scanned before the
target.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Union

from ..graph import Edge, EdgeType, Node, NodeType, ProgramGraph
from .lexer import SourceToken
from .parser import AstNode, parse_source

_TOKEN_NODE_TYPES = {
    "comment": NodeType.COMMENT_LINE,
    "identifier": NodeType.IDENTIFIER_TOKEN,
}

@dataclass(eq=False)
class Variable:
    name: str
    decl: Optional[SourceToken]
    type_text: Optional[str]


@dataclass(eq=False)
class Occurrence:
    token: SourceToken
    var: Variable
    access: str  # read | write | readwrite
    guards: tuple = ()  # ((condition AstNode, negated), ...) outermost first


@dataclass
class CallSite:
    node: AstNode
    name: str
    args: list
    qualified: bool


@dataclass
class ScopeTable:
    """Result of the lexical scope walk over one file."""

    occurrences: list = field(default_factory=list)
    computed_from: list = field(default_factory=list)  # (target token, source token)
    returns: list = field(default_factory=list)  # (return token, method AstNode)
    calls: list = field(default_factory=list)
    methods: dict = field(default_factory=dict)  # name -> [(decl AstNode, [Param AstNode])]

    def variables(self) -> list[Variable]:
        seen = {}
        for occ in self.occurrences:
            seen.setdefault(id(occ.var), occ.var)
        return list(seen.values())


def type_text(type_node: AstNode, dims: int = 0) -> str:
    return type_node.text() + "[]" * dims


class _ScopeWalker:
    def __init__(self, table: ScopeTable):
        self.table = table
        self.scopes: list[dict[str, Variable]] = []
        self.class_scopes: list[dict[str, Variable]] = []
        self.unresolved: dict[str, Variable] = {}
        self.guards: list[tuple[AstNode, bool]] = []
        self.methods: list[Optional[AstNode]] = []

    # ---- bookkeeping ----------------------------------------------------

    def occur(self, tok: SourceToken, var: Variable, access: str) -> None:
        self.table.occurrences.append(Occurrence(tok, var, access, tuple(self.guards)))

    def declare(self, tok: SourceToken, type_str: Optional[str], var: Optional[Variable] = None) -> Variable:
        if var is None:
            var = Variable(tok.text, tok, type_str)
            self.scopes[-1][tok.text] = var
        self.occur(tok, var, "write")
        return var

    def resolve(self, name: str) -> Variable:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return self.unresolved.setdefault(name, Variable(name, None, None))

    def resolve_field(self, name: str) -> Variable:
        if self.class_scopes and name in self.class_scopes[-1]:
            return self.class_scopes[-1][name]
        return self.unresolved.setdefault(name, Variable(name, None, None))

    def push(self) -> dict:
        scope: dict[str, Variable] = {}
        self.scopes.append(scope)
        return scope

    def pop(self) -> None:
        self.scopes.pop()

    def tokens_read_during(self, start: int) -> list[SourceToken]:
        return [occ.token for occ in self.table.occurrences[start:]]

    # ---- dispatch -------------------------------------------------------

    def visit(self, node) -> None:
        if isinstance(node, AstNode):
            getattr(self, "visit_" + node.kind, self.generic)(node)

    def generic(self, node: AstNode) -> None:
        for child in node.children:
            self.visit(child)

    def skip(self, node: AstNode) -> None:
        pass

    visit_Type = visit_TypeArgs = visit_TypeParams = visit_Annotation = skip
    visit_Modifiers = visit_ImportDecl = visit_PackageDecl = visit_ThrowsClause = skip
    visit_ClassLiteral = skip

    def visit_CompilationUnit(self, node: AstNode) -> None:
        for decl in node.walk():
            if decl.kind in ("MethodDecl", "ConstructorDecl") and "name" in decl.roles:
                params = decl.roles["params"].roles["params"]
                self.table.methods.setdefault(decl.roles["name"].text, []).append((decl, params))
        self.push()
        self.generic(node)
        self.pop()

    def _class_body(self, body: AstNode) -> None:
        scope = self.push()
        self.class_scopes.append(scope)
        for member in body.roles.get("members", []):
            if member.kind == "FieldDecl":
                base = member.roles["type"]
                for d in member.roles["declarators"]:
                    name = d.roles["name"]
                    scope[name.text] = Variable(name.text, name, type_text(base, d.roles.get("dims", 0)))
            elif member.kind == "EnumConstant":
                name = member.roles["name"]
                scope[name.text] = Variable(name.text, name, None)
        self.generic(body)
        self.class_scopes.pop()
        self.pop()

    def visit_ClassDecl(self, node: AstNode) -> None:
        self._class_body(node.roles["body"])

    visit_InterfaceDecl = visit_EnumDecl = visit_ClassDecl

    def visit_EnumConstant(self, node: AstNode) -> None:
        self.occur(node.roles["name"], self.resolve(node.roles["name"].text), "write")
        if "args" in node.roles:
            self.visit(node.roles["args"])
        if "body" in node.roles:
            self._class_body(node.roles["body"])

    def visit_FieldDecl(self, node: AstNode) -> None:
        for d in node.roles["declarators"]:
            name = d.roles["name"]
            start = len(self.table.occurrences)
            if "init" in d.roles:
                self.visit(d.roles["init"])
            sources = self.tokens_read_during(start)
            self.declare(name, None, self.class_scopes[-1][name.text])
            for src in sources:
                self.table.computed_from.append((name, src))

    def visit_MethodDecl(self, node: AstNode) -> None:
        self.methods.append(node)
        self.push()
        for param in node.roles["params"].roles["params"]:
            self._declare_param(param)
        if "body" in node.roles:
            self.generic(node.roles["body"])
        self.pop()
        self.methods.pop()

    visit_ConstructorDecl = visit_MethodDecl

    def _declare_param(self, param: AstNode) -> None:
        types = [c for c in param.children if isinstance(c, AstNode) and c.kind == "Type"]
        text = "|".join(t.text() for t in types)
        dims = param.roles.get("dims", 0) + (1 if param.roles.get("varargs") else 0)
        self.declare(param.roles["name"], text + "[]" * dims)

    def visit_Initializer(self, node: AstNode) -> None:
        self.methods.append(None)
        self.visit(node.roles["body"])
        self.methods.pop()

    def visit_Block(self, node: AstNode) -> None:
        self.push()
        self.generic(node)
        self.pop()

    def visit_LocalVarDecl(self, node: AstNode) -> None:
        base = node.roles["type"]
        for d in node.roles["declarators"]:
            start = len(self.table.occurrences)
            if "init" in d.roles:
                self.visit(d.roles["init"])
            sources = self.tokens_read_during(start)
            name = d.roles["name"]
            self.declare(name, type_text(base, d.roles.get("dims", 0)))
            for src in sources:
                self.table.computed_from.append((name, src))

    def visit_ForEachStatement(self, node: AstNode) -> None:
        self.push()
        start = len(self.table.occurrences)
        self.visit(node.roles["iterable"])
        sources = self.tokens_read_during(start)
        var = node.roles["var"]
        name = var.roles["declarators"][0].roles["name"]
        self.declare(name, type_text(var.roles["type"]))
        for src in sources:
            self.table.computed_from.append((name, src))
        self.visit(node.roles["body"])
        self.pop()

    def visit_ForStatement(self, node: AstNode) -> None:
        self.push()
        cond = node.roles.get("cond")
        for child in node.children:
            if child is node.roles["body"] and cond is not None:
                self.guards.append((cond, False))
                self.visit(child)
                self.guards.pop()
            else:
                self.visit(child)
        self.pop()

    def visit_WhileStatement(self, node: AstNode) -> None:
        self.visit(node.roles["cond"])
        self.guards.append((node.roles["cond"], False))
        self.visit(node.roles["body"])
        self.guards.pop()

    def visit_DoStatement(self, node: AstNode) -> None:
        self.guards.append((node.roles["cond"], False))
        self.visit(node.roles["body"])
        self.guards.pop()
        self.visit(node.roles["cond"])

    def visit_IfStatement(self, node: AstNode) -> None:
        cond = node.roles["cond"]
        self.visit(cond)
        self.guards.append((cond, False))
        self.visit(node.roles["then"])
        self.guards.pop()
        if "else" in node.roles:
            self.guards.append((cond, True))
            self.visit(node.roles["else"])
            self.guards.pop()

    def visit_TryStatement(self, node: AstNode) -> None:
        self.push()
        self.generic(node)
        self.pop()

    def visit_CatchClause(self, node: AstNode) -> None:
        self.push()
        self._declare_param(node.roles["param"])
        self.visit(node.roles["body"])
        self.pop()

    def visit_SwitchStatement(self, node: AstNode) -> None:
        self.visit(node.roles["selector"])
        self.push()
        for case in node.roles["cases"]:
            self.visit(case)
        self.pop()

    def visit_ReturnStatement(self, node: AstNode) -> None:
        method = self.methods[-1] if self.methods else None
        if method is not None:
            self.table.returns.append((node.roles["keyword"], method))
        if "value" in node.roles:
            self.visit(node.roles["value"])

    def visit_Assignment(self, node: AstNode) -> None:
        start = len(self.table.occurrences)
        self.visit(node.roles["value"])
        sources = self.tokens_read_during(start)
        access = "write" if node.roles["op"] == "=" else "readwrite"
        target_tok = self._write_target(node.roles["target"], access)
        if target_tok is not None:
            for src in sources:
                self.table.computed_from.append((target_tok, src))

    def _write_target(self, target: AstNode, access: str) -> Optional[SourceToken]:
        while target.kind == "Parenthesized":
            target = target.roles["expr"]
        if target.kind == "Name":
            tok = target.roles["name"]
            self.occur(tok, self.resolve(tok.text), access)
            return tok
        if target.kind == "FieldAccess" and target.roles["target"].kind == "This":
            tok = target.roles["name"]
            self.occur(tok, self.resolve_field(tok.text), access)
            return tok
        if target.kind == "ArrayAccess":
            base = target.roles["target"]
            self.visit(target)
            while base.kind == "ArrayAccess":
                base = base.roles["target"]
            if base.kind == "Name":
                return base.roles["name"]
            return None
        self.visit(target)
        return None

    def visit_UnaryExpr(self, node: AstNode) -> None:
        if node.roles["op"] in ("++", "--"):
            self._write_target(node.roles["operand"], "readwrite")
        else:
            self.visit(node.roles["operand"])

    visit_PostfixExpr = visit_UnaryExpr

    def visit_Name(self, node: AstNode) -> None:
        tok = node.roles["name"]
        self.occur(tok, self.resolve(tok.text), "read")

    def visit_FieldAccess(self, node: AstNode) -> None:
        target = node.roles["target"]
        if target.kind == "This" and node.roles["name"].kind == "identifier":
            tok = node.roles["name"]
            self.occur(tok, self.resolve_field(tok.text), "read")
        else:
            self.visit(target)

    def visit_MethodCall(self, node: AstNode) -> None:
        receiver = node.roles.get("receiver")
        if receiver is not None:
            self.visit(receiver)
        args = node.roles["args"].roles["args"]
        for arg in args:
            self.visit(arg)
        qualified = receiver is not None and receiver.kind != "This"
        self.table.calls.append(CallSite(node, node.roles["name"].text, args, qualified))

    def visit_ObjectCreation(self, node: AstNode) -> None:
        args = node.roles["args"].roles["args"]
        for arg in args:
            self.visit(arg)
        type_tokens = [t for t in node.roles["type"].code_tokens() if t.kind == "identifier"]
        if type_tokens:
            self.table.calls.append(CallSite(node, type_tokens[-1].text, args, False))
        if "body" in node.roles:
            self._class_body(node.roles["body"])

    def visit_CastExpr(self, node: AstNode) -> None:
        self.visit(node.roles["operand"])

    def visit_InstanceOf(self, node: AstNode) -> None:
        self.visit(node.roles["expr"])
        if "binding" in node.roles:
            self.declare(node.roles["binding"], type_text(node.roles["type"]))


def analyze_scopes(ast: AstNode) -> ScopeTable:
    """Resolve variable occurrences lexically; see :class:`ScopeTable`."""
    table = ScopeTable()
    _ScopeWalker(table).visit(ast)
    return table


class GraphBuilder:
    """Mutable graph under construction for one source file."""

    def __init__(self, ast: AstNode, tokens: list[SourceToken], file_path: str = "", project: str = ""):
        self.ast = ast
        self.tokens = tokens
        self.file_path = file_path
        self.project = project
        self.nodes: list[Node] = []
        self.edges: dict[tuple[int, int, EdgeType], None] = {}
        self.ast_ids: dict[int, int] = {}
        self.token_ids: dict[int, int] = {}
        self.ast_children: list[tuple[int, int]] = []
        self.token_owner: list[tuple[int, int]] = []
        self.type_nodes: dict[str, int] = {}
        self.symbol_nodes: dict[str, int] = {}
        self.stats: Counter = Counter()
        self._add_subtree(ast)

    def _new_node(self, node_type: NodeType, text: str, span) -> int:
        nid = len(self.nodes)
        self.nodes.append(Node(nid, node_type, text, span))
        return nid

    def _add_subtree(self, root: AstNode) -> None:
        stack = [(root, None)]
        while stack:
            item, parent = stack.pop()
            if isinstance(item, AstNode):
                if item.fake:
                    nid = self._new_node(NodeType.FAKE_AST, "", item.span)
                else:
                    nid = self._new_node(NodeType.AST_ELEMENT, item.kind, item.span)
                self.ast_ids[id(item)] = nid
                if parent is not None:
                    self.ast_children.append((parent, nid))
                stack.extend((child, nid) for child in reversed(item.children))
            else:
                ntype = _TOKEN_NODE_TYPES.get(item.kind, NodeType.TOKEN)
                nid = self._new_node(ntype, item.text, item.span)
                self.token_ids[item.index] = nid
                self.token_owner.append((nid, parent))

    def node_of(self, item: Union[AstNode, SourceToken]) -> int:
        if isinstance(item, AstNode):
            return self.ast_ids[id(item)]
        return self.token_ids[item.index]

    def add_edge(self, src: int, dst: int, etype: EdgeType) -> None:
        if src != dst:
            self.edges.setdefault((src, dst, etype), None)

    def type_node(self, text: str) -> int:
        if text not in self.type_nodes:
            self.type_nodes[text] = self._new_node(NodeType.TYPE, text, None)
        return self.type_nodes[text]

    def symbol_node(self, text: str) -> int:
        if text not in self.symbol_nodes:
            self.symbol_nodes[text] = self._new_node(NodeType.SYMBOL_TYP, text, None)
        return self.symbol_nodes[text]

    def build(self) -> ProgramGraph:
        edges = [Edge(s, d, t) for (s, d, t) in self.edges]
        return ProgramGraph(self.nodes, edges, self.file_path, self.project)


def link_syntax_edges(b: GraphBuilder) -> None:
    for parent, child in b.ast_children:
        b.add_edge(parent, child, EdgeType.AST_CHILD)
    ordered = [b.token_ids[t.index] for t in b.tokens]
    for prev, nxt in zip(ordered, ordered[1:]):
        b.add_edge(prev, nxt, EdgeType.NEXT_TOKEN)
    for tok_node, owner in b.token_owner:
        b.add_edge(tok_node, owner, EdgeType.ASSOCIATED_TOKEN)


def link_dataflow_edges(b: GraphBuilder, table: ScopeTable) -> None:
    last_write: dict[int, SourceToken] = {}
    last_seen: dict[int, SourceToken] = {}
    last_by_name: dict[str, tuple[SourceToken, Variable]] = {}
    for occ in table.occurrences:
        node = b.node_of(occ.token)
        key = id(occ.var)
        if key in last_write:
            b.add_edge(node, b.node_of(last_write[key]), EdgeType.LAST_WRITE)
        if occ.access != "write" and key in last_seen:
            b.add_edge(node, b.node_of(last_seen[key]), EdgeType.LAST_USE)
        previous = last_by_name.get(occ.var.name)
        if previous is not None and previous[1] is not occ.var:
            b.add_edge(node, b.node_of(previous[0]), EdgeType.LAST_LEXICAL_USE)
        last_seen[key] = occ.token
        last_by_name[occ.var.name] = (occ.token, occ.var)
        if occ.access != "read":
            last_write[key] = occ.token
    for target, source in table.computed_from:
        b.add_edge(b.node_of(target), b.node_of(source), EdgeType.COMPUTED_FROM)


def link_guard_edges(b: GraphBuilder, table: ScopeTable) -> None:
    for occ in table.occurrences:
        node = b.node_of(occ.token)
        for cond, negated in occ.guards:
            etype = EdgeType.GUARDED_BY_NEGATION if negated else EdgeType.GUARDED_BY
            b.add_edge(node, b.node_of(cond), etype)


def _argument_node(b: GraphBuilder, arg: AstNode) -> int:
    inner = arg
    while inner.kind == "Parenthesized":
        inner = inner.roles["expr"]
    if inner.kind == "Name":
        return b.node_of(inner.roles["name"])
    return b.node_of(arg)


def link_call_and_type_edges(b: GraphBuilder, table: ScopeTable) -> None:
    for ret_tok, method in table.returns:
        b.add_edge(b.node_of(ret_tok), b.node_of(method), EdgeType.RETURNS_TO)

    for call in table.calls:
        candidates = [] if call.qualified else [
            params for decl, params in table.methods.get(call.name, [])
            if len(params) == len(call.args) and not any(p.roles.get("varargs") for p in params)
        ]
        if len(candidates) != 1:
            b.stats["unresolved_calls"] += 1
            continue
        b.stats["resolved_calls"] += 1
        for arg, param in zip(call.args, candidates[0]):
            b.add_edge(_argument_node(b, arg), b.node_of(param.roles["name"]), EdgeType.FORMAL_ARG_NAME)

    for occ in table.occurrences:
        if occ.var.type_text:
            b.add_edge(b.node_of(occ.token), b.type_node(occ.var.type_text), EdgeType.HAS_TYPE)

    for node in b.ast.walk():
        if node.kind != "Type":
            continue
        idents = [c for c in node.children if not isinstance(c, AstNode) and c.kind == "identifier"]
        if idents:
            tok = idents[-1]
            b.add_edge(b.node_of(tok), b.symbol_node(tok.text), EdgeType.ASSOCIATED_SYMBOL)


def build_graph(ast: AstNode, tokens: list[SourceToken], file_path: str = "", project: str = "",
                stats: Optional[Counter] = None) -> ProgramGraph:
    """Build the full program graph for one parsed file.

    ``stats``, when given, is updated with resolved/unresolved call counts.
    """
    b = GraphBuilder(ast, tokens, file_path, project)
    table = analyze_scopes(ast)
    link_syntax_edges(b)
    link_dataflow_edges(b, table)
    link_guard_edges(b, table)
    link_call_and_type_edges(b, table)
    if stats is not None:
        stats.update(b.stats)
    return b.build()


def graph_from_source(source: str, file_path: str = "", project: str = "",
                      stats: Optional[Counter] = None) -> ProgramGraph:
    ast, tokens = parse_source(source)
    return build_graph(ast, tokens, file_path, project, stats)
