"""Recursive descent parser for a Java subset.

Supported: package/import headers, classes, interfaces and enums (nested
ones included), fields, constructors, methods, initializer blocks, local
variables, the usual statements (if, while, do, for, for-each, try with
resources/catch/finally, switch with colon cases, synchronized, return,
throw, break, continue, labels, assert) and expressions up to casts,
ternaries, array creation and anonymous classes.  Lambdas, method
references and arrow-switches raise :class:`ParseError`.

Every token, comments included, becomes a leaf of exactly one node, so an
in-order walk of the leaves gives back the token stream.
"""
from __future__ import annotations

from typing import Iterator, Optional, Union

from ..errors import ParseError
from .lexer import PRIMITIVE_TYPES, SourceToken, tokenize

MODIFIERS = frozenset("""
    public protected private static final abstract native synchronized
    transient volatile strictfp default
""".split())

ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="})

BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7, "instanceof": 7,
    "<<": 8, ">>": 8, ">>>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}

UNARY_OPS = frozenset({"+", "-", "++", "--", "!", "~"})

_CAST_OPERAND_KEYWORDS = frozenset({"this", "super", "new"}) | PRIMITIVE_TYPES


class AstNode:
    """Syntax tree node.  ``children`` holds nodes and token leaves in order.

    ``roles`` gives named access to structurally important children
    (``cond``, ``then``, ``name``, ``args`` ...).  Synthesized wrappers that
    own no source text of their own are flagged ``fake``.
    """

    __slots__ = ("kind", "children", "roles", "fake")

    def __init__(self, kind: str, fake: bool = False):
        self.kind = kind
        self.children: list[Union[AstNode, SourceToken]] = []
        self.roles: dict = {}
        self.fake = fake

    def add(self, child, role: Optional[str] = None):
        self.children.append(child)
        if role is not None:
            self.roles[role] = child
        return child

    def __repr__(self):
        return f"AstNode({self.kind!r}, {len(self.children)} children)"

    def leaves(self) -> Iterator[SourceToken]:
        for child in self.children:
            if isinstance(child, AstNode):
                yield from child.leaves()
            else:
                yield child

    def walk(self) -> Iterator["AstNode"]:
        """Pre-order over AST nodes only."""
        yield self
        for child in self.children:
            if isinstance(child, AstNode):
                yield from child.walk()

    def code_tokens(self) -> list[SourceToken]:
        return [t for t in self.leaves() if not t.is_comment]

    @property
    def span(self) -> Optional[tuple[int, int]]:
        toks = self.code_tokens()
        if not toks:
            return None
        return toks[0].span[0], toks[-1].span[1]

    def text(self) -> str:
        return "".join(t.text for t in self.code_tokens())


class Parser:
    def __init__(self, tokens: list[SourceToken]):
        self.tokens = tokens
        self.code = [t for t in tokens if not t.is_comment]
        self.pos = 0
        self.attached = 0  # index into self.tokens of the first unattached token

    # ---- token plumbing -------------------------------------------------

    def peek(self, k: int = 0) -> Optional[SourceToken]:
        i = self.pos + k
        return self.code[i] if i < len(self.code) else None

    def at(self, *texts: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind != "literal" and tok.text in texts

    def at_ident(self, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind == "identifier"

    def error(self, what: Optional[str] = None) -> ParseError:
        tok = self.peek()
        if tok is None:
            return ParseError(what or "unexpected end of input")
        return ParseError(what or f"unexpected token {tok.text!r}", tok.line, tok.column)

    def take(self, node: AstNode, role: Optional[str] = None) -> SourceToken:
        tok = self.peek()
        if tok is None:
            raise self.error()
        for i in range(self.attached, tok.index):
            node.add(self.tokens[i])
        node.add(tok, role)
        self.attached = tok.index + 1
        self.pos += 1
        return tok

    def expect(self, node: AstNode, text: str, role: Optional[str] = None) -> SourceToken:
        if not self.at(text):
            tok = self.peek()
            got = "end of input" if tok is None else repr(tok.text)
            raise self.error(f"expected {text!r} but found {got}")
        return self.take(node, role)

    def expect_ident(self, node: AstNode, role: Optional[str] = None) -> SourceToken:
        if not self.at_ident():
            raise self.error()
        return self.take(node, role)

    def flush(self, node: AstNode) -> None:
        """Attach comments that precede the next code token to ``node``."""
        tok = self.peek()
        stop = tok.index if tok is not None else len(self.tokens)
        for i in range(self.attached, stop):
            node.add(self.tokens[i])
        self.attached = max(self.attached, stop)

    def mark(self):
        return self.pos, self.attached

    def reset(self, state) -> None:
        self.pos, self.attached = state

    def adjacent(self, k: int) -> bool:
        a, b = self.peek(k), self.peek(k + 1)
        return a is not None and b is not None and a.span[1] == b.span[0]

    def glued_operator(self) -> tuple[Optional[str], int]:
        """Operator at the cursor, gluing split '>' tokens into shifts."""
        tok = self.peek()
        if tok is None or tok.kind != "punctuation":
            return (tok.text if tok is not None and tok.text == "instanceof" else None), 1
        if tok.text == ">":
            if self.at(">", k=1) and self.adjacent(0):
                if self.at(">", k=2) and self.adjacent(1):
                    return ">>>", 3
                if self.at(">=", k=2) and self.adjacent(1):
                    return ">>>=", 3
                return ">>", 2
            if self.at(">=", k=1) and self.adjacent(0):
                return ">>=", 2
        return tok.text, 1

    # ---- declarations ---------------------------------------------------

    def parse_compilation_unit(self) -> AstNode:
        cu = AstNode("CompilationUnit")
        self.flush(cu)
        if self.at("package"):
            pkg = cu.add(AstNode("PackageDecl"))
            self.take(pkg)
            self.parse_qualified_name(pkg)
            self.expect(pkg, ";")
        while True:
            self.flush(cu)
            if not self.at("import"):
                break
            imp = cu.add(AstNode("ImportDecl"))
            self.take(imp)
            if self.at("static"):
                self.take(imp)
            self.parse_qualified_name(imp, allow_star=True)
            self.expect(imp, ";")
        while self.peek() is not None:
            self.flush(cu)
            if self.at(";"):
                self.take(cu)
                continue
            cu.add(self.parse_type_decl())
        self.flush(cu)
        return cu

    def parse_qualified_name(self, node: AstNode, allow_star: bool = False) -> None:
        self.expect_ident(node)
        while self.at("."):
            self.take(node)
            if allow_star and self.at("*"):
                self.take(node)
                return
            self.expect_ident(node)

    def parse_modifiers(self) -> Optional[AstNode]:
        if not (self.at(*MODIFIERS) or (self.at("@") and not self.at("interface", k=1))):
            return None
        mods = AstNode("Modifiers")
        while True:
            if self.at(*MODIFIERS):
                self.take(mods)
            elif self.at("@") and not self.at("interface", k=1):
                mods.add(self.parse_annotation())
            else:
                return mods

    def parse_annotation(self) -> AstNode:
        ann = AstNode("Annotation")
        self.expect(ann, "@")
        self.parse_qualified_name(ann)
        if self.at("("):
            depth = 0
            while True:
                if self.peek() is None:
                    raise self.error()
                if self.at("("):
                    depth += 1
                elif self.at(")"):
                    depth -= 1
                self.take(ann)
                if depth == 0:
                    break
        return ann

    def parse_type_decl(self, mods: Optional[AstNode] = None) -> AstNode:
        if mods is None:
            mods = self.parse_modifiers()
        if self.at("class"):
            decl = AstNode("ClassDecl")
        elif self.at("interface"):
            decl = AstNode("InterfaceDecl")
        elif self.at("enum"):
            decl = AstNode("EnumDecl")
        else:
            raise self.error()
        if mods is not None:
            decl.add(mods, "modifiers")
        keyword = self.take(decl)
        self.expect_ident(decl, "name")
        if self.at("<"):
            decl.add(self.parse_type_params())
        if self.at("extends"):
            self.take(decl)
            decl.add(self.parse_type(), "extends")
            while self.at(","):
                self.take(decl)
                decl.add(self.parse_type())
        if self.at("implements"):
            self.take(decl)
            decl.add(self.parse_type())
            while self.at(","):
                self.take(decl)
                decl.add(self.parse_type())
        if keyword.text == "enum":
            decl.add(self.parse_enum_body(), "body")
        else:
            decl.add(self.parse_class_body(), "body")
        return decl

    def parse_type_params(self) -> AstNode:
        node = AstNode("TypeParams")
        self.expect(node, "<")
        while True:
            param = node.add(AstNode("TypeParam"))
            self.expect_ident(param, "name")
            if self.at("extends"):
                self.take(param)
                param.add(self.parse_type())
                while self.at("&"):
                    self.take(param)
                    param.add(self.parse_type())
            if not self.at(","):
                break
            self.take(node)
        self.expect(node, ">")
        return node

    def parse_enum_body(self) -> AstNode:
        body = AstNode("ClassBody")
        self.expect(body, "{")
        members = []
        while True:
            self.flush(body)
            if self.at(";", "}"):
                break
            const = body.add(AstNode("EnumConstant"))
            if self.at("@"):
                const.add(self.parse_annotation())
            self.expect_ident(const, "name")
            if self.at("("):
                const.add(self.parse_arguments(), "args")
            if self.at("{"):
                const.add(self.parse_class_body(), "body")
            members.append(const)
            if not self.at(","):
                break
            self.take(body)
        if self.at(";"):
            self.take(body)
            while True:
                self.flush(body)
                if self.at("}") or self.peek() is None:
                    break
                member = self.parse_member()
                if member is not None:
                    body.add(member)
                    members.append(member)
        self.expect(body, "}")
        body.roles["members"] = members
        return body

    def parse_class_body(self) -> AstNode:
        body = AstNode("ClassBody")
        self.expect(body, "{")
        members = []
        while True:
            self.flush(body)
            if self.at("}") or self.peek() is None:
                break
            if self.at(";"):
                self.take(body)
                continue
            member = body.add(self.parse_member())
            members.append(member)
        self.expect(body, "}")
        body.roles["members"] = members
        return body

    def parse_member(self) -> AstNode:
        mods = self.parse_modifiers()
        if self.at("class", "interface", "enum"):
            return self.parse_type_decl(mods)
        if self.at("{"):
            init = AstNode("Initializer")
            if mods is not None:
                init.add(mods, "modifiers")
            init.add(self.parse_block(), "body")
            return init
        type_params = self.parse_type_params() if self.at("<") else None
        if self.at_ident() and self.at("(", k=1):
            decl = AstNode("ConstructorDecl")
            self._method_head(decl, mods, type_params)
            self.expect_ident(decl, "name")
        else:
            # tentatively a method; downgraded to a field when no '(' follows the name
            decl = AstNode("MethodDecl")
            self._method_head(decl, mods, type_params)
            if self.at("void"):
                self.take(decl, "result")
            else:
                decl.add(self.parse_type(), "result")
            if not self.at("(", k=1):
                if type_params is not None:
                    raise self.error()
                return self._field_rest(mods, decl.roles["result"])
            self.expect_ident(decl, "name")
        decl.add(self.parse_formal_params(), "params")
        while self.at("["):
            self.take(decl)
            self.expect(decl, "]")
        if self.at("throws"):
            throws = decl.add(AstNode("ThrowsClause"))
            self.take(throws)
            throws.add(self.parse_type())
            while self.at(","):
                self.take(throws)
                throws.add(self.parse_type())
        if self.at("default"):
            # annotation element default values
            self.take(decl)
            decl.add(self.parse_expression())
        if self.at(";"):
            self.take(decl)
        else:
            decl.add(self.parse_block(), "body")
        return decl

    def _method_head(self, decl, mods, type_params):
        if mods is not None:
            decl.add(mods, "modifiers")
        if type_params is not None:
            decl.add(type_params)

    def _field_rest(self, mods, type_node) -> AstNode:
        field = AstNode("FieldDecl")
        if mods is not None:
            field.add(mods, "modifiers")
        field.add(type_node, "type")
        field.roles["declarators"] = self.parse_declarators(field)
        self.expect(field, ";")
        return field

    def parse_formal_params(self) -> AstNode:
        node = AstNode("FormalParams")
        self.expect(node, "(")
        params = []
        if not self.at(")"):
            while True:
                param = node.add(AstNode("Param"))
                mods = self.parse_modifiers()
                if mods is not None:
                    param.add(mods, "modifiers")
                param.add(self.parse_type(), "type")
                if self.at("..."):
                    self.take(param)
                    param.roles["varargs"] = True
                self.expect_ident(param, "name")
                while self.at("["):
                    self.take(param)
                    self.expect(param, "]")
                    param.roles["dims"] = param.roles.get("dims", 0) + 1
                params.append(param)
                if not self.at(","):
                    break
                self.take(node)
        self.expect(node, ")")
        node.roles["params"] = params
        return node

    def parse_declarators(self, owner: AstNode) -> list[AstNode]:
        decls = []
        while True:
            decl = owner.add(AstNode("VarDeclarator"))
            self.expect_ident(decl, "name")
            while self.at("["):
                self.take(decl)
                self.expect(decl, "]")
                decl.roles["dims"] = decl.roles.get("dims", 0) + 1
            if self.at("="):
                self.take(decl)
                if self.at("{"):
                    decl.add(self.parse_array_init(), "init")
                else:
                    decl.add(self.parse_expression(), "init")
            decls.append(decl)
            if not self.at(","):
                return decls
            self.take(owner)

    # ---- types ------------------------------------------------------------

    def parse_type(self, allow_dims: bool = True) -> AstNode:
        node = AstNode("Type")
        while self.at("@"):
            node.add(self.parse_annotation())
        if self.at(*PRIMITIVE_TYPES):
            self.take(node)
        else:
            self.expect_ident(node)
            if self.at("<"):
                node.add(self.parse_type_args())
            while self.at(".") and self.at_ident(k=1):
                self.take(node)
                self.take(node)
                if self.at("<"):
                    node.add(self.parse_type_args())
        if allow_dims:
            while self.at("[") and self.at("]", k=1):
                self.take(node)
                self.take(node)
        return node

    def parse_type_args(self) -> AstNode:
        node = AstNode("TypeArgs")
        self.expect(node, "<")
        if self.at(">"):
            self.take(node)
            return node
        while True:
            if self.at("?"):
                wildcard = node.add(AstNode("Wildcard"))
                self.take(wildcard)
                if self.at("extends", "super"):
                    self.take(wildcard)
                    wildcard.add(self.parse_type())
            else:
                node.add(self.parse_type())
            if not self.at(","):
                break
            self.take(node)
        self.expect(node, ">")
        return node

    # ---- statements -------------------------------------------------------

    def parse_block(self) -> AstNode:
        block = AstNode("Block")
        self.expect(block, "{")
        statements = []
        while True:
            self.flush(block)
            if self.at("}") or self.peek() is None:
                break
            statements.append(block.add(self.parse_block_statement()))
        self.expect(block, "}")
        block.roles["statements"] = statements
        return block

    def _looks_like_local_decl(self) -> bool:
        if self.at("final") or self.at("@"):
            return True
        if self.at(*PRIMITIVE_TYPES):
            return not self.at(".", k=1)
        if not self.at_ident():
            return False
        state = self.mark()
        try:
            self.parse_type()
            return self.at_ident() and self.at("=", ";", ",", "[", ":", k=1)
        except ParseError:
            return False
        finally:
            self.reset(state)

    def parse_block_statement(self) -> AstNode:
        if self.at("class", "interface", "enum") or (
            self.at("abstract", "final", "static") and self.at("class", k=1)
        ):
            return self.parse_type_decl()
        if self._looks_like_local_decl():
            decl = self.parse_local_var_decl()
            self.expect(decl, ";")
            return decl
        return self.parse_statement()

    def parse_local_var_decl(self) -> AstNode:
        decl = AstNode("LocalVarDecl")
        mods = self.parse_modifiers()
        if mods is not None:
            decl.add(mods, "modifiers")
        if self.at("class"):
            raise self.error("local class declarations with modifiers are not supported")
        decl.add(self.parse_type(), "type")
        decl.roles["declarators"] = self.parse_declarators(decl)
        return decl

    def parse_body(self) -> AstNode:
        """Statement body of if/else/loops; non-block bodies get a fake block."""
        stmt = self.parse_statement()
        if stmt.kind == "Block":
            return stmt
        wrapper = AstNode("Block", fake=True)
        wrapper.add(stmt)
        wrapper.roles["statements"] = [stmt]
        return wrapper

    def parse_statement(self) -> AstNode:
        tok = self.peek()
        if tok is None:
            raise self.error()
        text = tok.text if tok.kind != "literal" else None
        if text == "{":
            return self.parse_block()
        if text == ";":
            node = AstNode("EmptyStatement")
            self.take(node)
            return node
        if text == "if":
            node = AstNode("IfStatement")
            self.take(node)
            self.expect(node, "(")
            node.add(self.parse_expression(), "cond")
            self.expect(node, ")")
            node.add(self.parse_body(), "then")
            if self.at("else"):
                self.take(node)
                node.add(self.parse_body(), "else")
            return node
        if text == "while":
            node = AstNode("WhileStatement")
            self.take(node)
            self.expect(node, "(")
            node.add(self.parse_expression(), "cond")
            self.expect(node, ")")
            node.add(self.parse_body(), "body")
            return node
        if text == "do":
            node = AstNode("DoStatement")
            self.take(node)
            node.add(self.parse_body(), "body")
            self.expect(node, "while")
            self.expect(node, "(")
            node.add(self.parse_expression(), "cond")
            self.expect(node, ")")
            self.expect(node, ";")
            return node
        if text == "for":
            return self.parse_for()
        if text == "try":
            return self.parse_try()
        if text == "switch":
            return self.parse_switch()
        if text == "synchronized":
            node = AstNode("SynchronizedStatement")
            self.take(node)
            self.expect(node, "(")
            node.add(self.parse_expression(), "lock")
            self.expect(node, ")")
            node.add(self.parse_block(), "body")
            return node
        if text == "return":
            node = AstNode("ReturnStatement")
            self.take(node, "keyword")
            if not self.at(";"):
                node.add(self.parse_expression(), "value")
            self.expect(node, ";")
            return node
        if text == "throw":
            node = AstNode("ThrowStatement")
            self.take(node)
            node.add(self.parse_expression(), "value")
            self.expect(node, ";")
            return node
        if text in ("break", "continue"):
            node = AstNode("BreakStatement" if text == "break" else "ContinueStatement")
            self.take(node)
            if self.at_ident():
                self.take(node)
            self.expect(node, ";")
            return node
        if text == "assert":
            node = AstNode("AssertStatement")
            self.take(node)
            node.add(self.parse_expression(), "cond")
            if self.at(":"):
                self.take(node)
                node.add(self.parse_expression(), "message")
            self.expect(node, ";")
            return node
        if tok.kind == "identifier" and self.at(":", k=1):
            node = AstNode("LabeledStatement")
            self.take(node)
            self.take(node)
            node.add(self.parse_statement(), "body")
            return node
        if text in ("class", "interface", "enum"):
            return self.parse_type_decl()
        node = AstNode("ExpressionStatement")
        node.add(self.parse_expression(), "expr")
        self.expect(node, ";")
        return node

    def parse_for(self) -> AstNode:
        start = self.mark()
        probe = AstNode("ForEachStatement")
        self.take(probe)
        self.expect(probe, "(")
        is_foreach = False
        if self._looks_like_local_decl():
            state = self.mark()
            try:
                self.parse_modifiers()
                self.parse_type()
                is_foreach = self.at_ident() and self.at(":", k=1)
            except ParseError:
                is_foreach = False
            self.reset(state)
        self.reset(start)

        if is_foreach:
            node = AstNode("ForEachStatement")
            self.take(node)
            self.expect(node, "(")
            var = node.add(AstNode("LocalVarDecl"), "var")
            mods = self.parse_modifiers()
            if mods is not None:
                var.add(mods, "modifiers")
            var.add(self.parse_type(), "type")
            declarator = var.add(AstNode("VarDeclarator"))
            self.expect_ident(declarator, "name")
            var.roles["declarators"] = [declarator]
            self.expect(node, ":")
            node.add(self.parse_expression(), "iterable")
            self.expect(node, ")")
            node.add(self.parse_body(), "body")
            return node

        node = AstNode("ForStatement")
        self.take(node)
        self.expect(node, "(")
        if not self.at(";"):
            if self._looks_like_local_decl():
                node.add(self.parse_local_var_decl(), "init")
            else:
                init = node.add(AstNode("ForInit"), "init")
                self._expression_list(init)
        self.expect(node, ";")
        if not self.at(";"):
            node.add(self.parse_expression(), "cond")
        self.expect(node, ";")
        if not self.at(")"):
            update = node.add(AstNode("ForUpdate"), "update")
            self._expression_list(update)
        self.expect(node, ")")
        node.add(self.parse_body(), "body")
        return node

    def _expression_list(self, owner: AstNode) -> None:
        exprs = [owner.add(self.parse_expression())]
        while self.at(","):
            self.take(owner)
            exprs.append(owner.add(self.parse_expression()))
        owner.roles["exprs"] = exprs

    def parse_try(self) -> AstNode:
        node = AstNode("TryStatement")
        self.take(node)
        if self.at("("):
            res = node.add(AstNode("Resources"), "resources")
            self.take(res)
            decls = []
            while not self.at(")"):
                if self._looks_like_local_decl():
                    decl = self.parse_local_var_decl()
                else:
                    decl = AstNode("ResourceRef")
                    decl.add(self.parse_expression(), "expr")
                decls.append(res.add(decl))
                if self.at(";"):
                    self.take(res)
                else:
                    break
            self.expect(res, ")")
            res.roles["decls"] = decls
        node.add(self.parse_block(), "body")
        catches = []
        while True:
            self.flush(node)
            if not self.at("catch"):
                break
            clause = node.add(AstNode("CatchClause"))
            self.take(clause)
            self.expect(clause, "(")
            param = clause.add(AstNode("Param"), "param")
            mods = self.parse_modifiers()
            if mods is not None:
                param.add(mods, "modifiers")
            param.add(self.parse_type(), "type")
            while self.at("|"):
                self.take(param)
                param.add(self.parse_type())
            self.expect_ident(param, "name")
            self.expect(clause, ")")
            clause.add(self.parse_block(), "body")
            catches.append(clause)
        node.roles["catches"] = catches
        if self.at("finally"):
            fin = node.add(AstNode("FinallyClause"), "finally")
            self.take(fin)
            fin.add(self.parse_block(), "body")
        if not catches and "finally" not in node.roles and "resources" not in node.roles:
            raise self.error("try without catch or finally")
        return node

    def parse_switch(self) -> AstNode:
        node = AstNode("SwitchStatement")
        self.take(node)
        self.expect(node, "(")
        node.add(self.parse_expression(), "selector")
        self.expect(node, ")")
        self.expect(node, "{")
        cases = []
        while True:
            self.flush(node)
            if self.at("}") or self.peek() is None:
                break
            case = node.add(AstNode("SwitchCase"))
            if self.at("case"):
                self.take(case)
                case.add(self.parse_conditional())
                while self.at(","):
                    self.take(case)
                    case.add(self.parse_conditional())
            else:
                self.expect(case, "default")
            if self.at("->"):
                raise self.error("arrow-form switch cases are not supported")
            self.expect(case, ":")
            statements = []
            while True:
                self.flush(case)
                if self.at("case", "default", "}") or self.peek() is None:
                    break
                statements.append(case.add(self.parse_block_statement()))
            case.roles["statements"] = statements
            cases.append(case)
        self.expect(node, "}")
        node.roles["cases"] = cases
        return node

    # ---- expressions ------------------------------------------------------

    def parse_expression(self) -> AstNode:
        if (self.at_ident() and self.at("->", k=1)) or self._at_paren_lambda():
            raise self.error("lambda expressions are not supported")
        lhs = self.parse_conditional()
        op, width = self.glued_operator()
        if op in ASSIGN_OPS:
            node = AstNode("Assignment")
            node.add(lhs, "target")
            for _ in range(width):
                self.take(node)
            node.roles["op"] = op
            if self.at("{"):
                node.add(self.parse_array_init(), "value")
            else:
                node.add(self.parse_expression(), "value")
            return node
        return lhs

    def _at_paren_lambda(self) -> bool:
        if not self.at("("):
            return False
        depth, k = 0, 0
        while True:
            tok = self.peek(k)
            if tok is None:
                return False
            if tok.text == "(" and tok.kind == "punctuation":
                depth += 1
            elif tok.text == ")" and tok.kind == "punctuation":
                depth -= 1
                if depth == 0:
                    return self.at("->", k=k + 1)
            k += 1

    def parse_conditional(self) -> AstNode:
        cond = self.parse_binary(1)
        if not self.at("?"):
            return cond
        node = AstNode("Conditional")
        node.add(cond, "cond")
        self.take(node)
        node.add(self.parse_expression(), "then")
        self.expect(node, ":")
        node.add(self.parse_conditional(), "else")
        return node

    def parse_binary(self, min_prec: int) -> AstNode:
        left = self.parse_unary()
        while True:
            op, width = self.glued_operator()
            prec = BINARY_PRECEDENCE.get(op)
            if prec is None or prec < min_prec:
                return left
            if op == "instanceof":
                node = AstNode("InstanceOf")
                node.add(left, "expr")
                self.take(node)
                if self.at("final"):
                    self.take(node)
                node.add(self.parse_type(), "type")
                if self.at_ident():
                    self.take(node, "binding")
                left = node
                continue
            node = AstNode("BinaryExpr")
            node.add(left, "left")
            for _ in range(width):
                self.take(node)
            node.roles["op"] = op
            node.add(self.parse_binary(prec + 1), "right")
            left = node

    def parse_unary(self) -> AstNode:
        if self.at(*UNARY_OPS):
            node = AstNode("UnaryExpr")
            op = self.take(node)
            node.roles["op"] = op.text
            node.add(self.parse_unary(), "operand")
            return node
        if self.at("("):
            cast = self._try_cast()
            if cast is not None:
                return cast
        return self.parse_postfix()

    def _try_cast(self) -> Optional[AstNode]:
        state = self.mark()
        node = AstNode("CastExpr")
        try:
            self.take(node)
            type_node = node.add(self.parse_type(), "type")
            while self.at("&"):
                self.take(node)
                node.add(self.parse_type())
            self.expect(node, ")")
        except ParseError:
            self.reset(state)
            return None
        primitive = (len(type_node.children) >= 1
                     and not isinstance(type_node.children[0], AstNode)
                     and type_node.children[0].text in PRIMITIVE_TYPES)
        nxt = self.peek()
        if nxt is None:
            self.reset(state)
            return None
        starts_operand = (
            nxt.kind in ("identifier", "literal")
            or (nxt.kind == "keyword" and nxt.text in _CAST_OPERAND_KEYWORDS)
            or nxt.text in ("(", "!", "~")
        )
        if primitive and nxt.text in ("+", "-", "++", "--"):
            starts_operand = True
        if not starts_operand:
            self.reset(state)
            return None
        node.add(self.parse_unary(), "operand")
        return node

    def parse_postfix(self) -> AstNode:
        expr = self.parse_primary()
        while True:
            if self.at("."):
                if self.at_ident(k=1) and self.at("(", k=2):
                    call = AstNode("MethodCall")
                    call.add(expr, "receiver")
                    self.take(call)
                    self.take(call, "name")
                    call.add(self.parse_arguments(), "args")
                    expr = call
                elif self.at_ident(k=1):
                    access = AstNode("FieldAccess")
                    access.add(expr, "target")
                    self.take(access)
                    self.take(access, "name")
                    expr = access
                elif self.at("class", k=1):
                    lit = AstNode("ClassLiteral")
                    lit.add(expr, "target")
                    self.take(lit)
                    self.take(lit)
                    expr = lit
                elif self.at("this", k=1):
                    access = AstNode("FieldAccess")
                    access.add(expr, "target")
                    self.take(access)
                    self.take(access, "name")
                    expr = access
                elif self.at("new", k=1):
                    outer = AstNode("QualifiedCreation")
                    outer.add(expr, "outer")
                    self.take(outer)
                    outer.add(self.parse_creation(), "creation")
                    expr = outer
                elif self.at("<", k=1):
                    raise self.error("explicit generic method calls are not supported")
                else:
                    raise self.error()
            elif self.at("["):
                if self.at("]", k=1):
                    raise self.error()
                access = AstNode("ArrayAccess")
                access.add(expr, "target")
                self.take(access)
                access.add(self.parse_expression(), "index")
                self.expect(access, "]")
                expr = access
            elif self.at("::"):
                raise self.error("method references are not supported")
            elif self.at("++", "--"):
                node = AstNode("PostfixExpr")
                node.add(expr, "operand")
                op = self.take(node)
                node.roles["op"] = op.text
                expr = node
            else:
                return expr

    def parse_arguments(self) -> AstNode:
        node = AstNode("Arguments")
        self.expect(node, "(")
        args = []
        if not self.at(")"):
            while True:
                args.append(node.add(self.parse_expression()))
                if not self.at(","):
                    break
                self.take(node)
        self.expect(node, ")")
        node.roles["args"] = args
        return node

    def parse_array_init(self) -> AstNode:
        node = AstNode("ArrayInit")
        self.expect(node, "{")
        while not self.at("}"):
            if self.at("{"):
                node.add(self.parse_array_init())
            else:
                node.add(self.parse_expression())
            if not self.at(","):
                break
            self.take(node)
        self.expect(node, "}")
        return node

    def parse_creation(self) -> AstNode:
        node = AstNode("ObjectCreation")
        self.expect(node, "new")
        type_node = self.parse_type(allow_dims=False)
        if self.at("["):
            node.kind = "ArrayCreation"
            node.add(type_node, "type")
            while self.at("["):
                self.take(node)
                if not self.at("]"):
                    node.add(self.parse_expression())
                self.expect(node, "]")
            if self.at("{"):
                node.add(self.parse_array_init(), "init")
            return node
        node.add(type_node, "type")
        node.add(self.parse_arguments(), "args")
        if self.at("{"):
            node.add(self.parse_class_body(), "body")
        return node

    def parse_primary(self) -> AstNode:
        tok = self.peek()
        if tok is None:
            raise self.error()
        if tok.kind == "literal":
            node = AstNode("Literal")
            self.take(node)
            return node
        if tok.text == "(":
            node = AstNode("Parenthesized")
            self.take(node)
            node.add(self.parse_expression(), "expr")
            self.expect(node, ")")
            return node
        if tok.text in ("this", "super"):
            if self.at("(", k=1):
                call = AstNode("MethodCall")
                self.take(call, "name")
                call.add(self.parse_arguments(), "args")
                return call
            node = AstNode("This" if tok.text == "this" else "Super")
            self.take(node)
            return node
        if tok.text == "new":
            return self.parse_creation()
        if tok.kind == "identifier":
            if self.at("(", k=1):
                call = AstNode("MethodCall")
                self.take(call, "name")
                call.add(self.parse_arguments(), "args")
                return call
            if self.at("[", k=1) and self.at("]", k=2):
                return self._class_literal()
            node = AstNode("Name")
            self.take(node, "name")
            return node
        if tok.text in PRIMITIVE_TYPES or tok.text == "void":
            return self._class_literal()
        raise self.error()

    def _class_literal(self) -> AstNode:
        lit = AstNode("ClassLiteral")
        if self.at("void"):
            self.take(lit)
        else:
            lit.add(self.parse_type(), "type")
        self.expect(lit, ".")
        self.expect(lit, "class")
        return lit


def parse(tokens: list[SourceToken]) -> AstNode:
    """Parse a token stream (from :func:`tokenize`) into a compilation unit."""
    parser = Parser(tokens)
    return parser.parse_compilation_unit()


def parse_source(source: str) -> tuple[AstNode, list[SourceToken]]:
    tokens = tokenize(source)
    return parse(tokens), tokens
