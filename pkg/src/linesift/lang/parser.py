"""Recursive-descent parser for the C-like subset.

Produces FunctionDef and global VarDecl nodes with line spans and per-statement
header lines. The grammar is documented in docs/grammar.ebnf.
"""

from __future__ import annotations

from ..errors import SourceSyntaxError, UnsupportedConstructError
from . import astnodes as ast
from .lexer import Token, tokenize

TYPE_KEYWORDS = {"int", "float", "bool", "char", "void"}
ASSIGN_OPS = {"=", "+=", "-=", "*=", "/="}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    # --- token helpers ---

    def peek(self, offset=0) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def check(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def match(self, kind: str, value: str | None = None) -> Token | None:
        if self.check(kind, value):
            return self.advance()
        return None

    def expect(self, kind: str, value: str | None = None) -> Token:
        tok = self.peek()
        if not self.check(kind, value):
            want = value if value is not None else kind
            raise SourceSyntaxError(f"expected {want!r}, found {tok.value!r}", tok.line, tok.col)
        return self.advance()

    def error(self, msg: str, tok: Token | None = None, cls=SourceSyntaxError):
        tok = tok or self.peek()
        raise cls(msg, tok.line, tok.col)

    # --- types / top level ---

    def at_type(self) -> bool:
        return self.peek().kind == "keyword" and self.peek().value in TYPE_KEYWORDS

    def parse_type(self) -> str:
        tok = self.expect("keyword")
        if tok.value not in TYPE_KEYWORDS:
            self.error(f"expected a type, found {tok.value!r}", tok)
        name = tok.value
        if self.check("op", "*"):
            if name != "char":
                self.error(f"unsupported construct (pointer type {name}*)", self.peek(),
                           UnsupportedConstructError)
            self.advance()
            name = "char*"
        return name

    def parse_unit(self) -> tuple[list[ast.FunctionDef], list[ast.VarDecl]]:
        functions: list[ast.FunctionDef] = []
        globals_: list[ast.VarDecl] = []
        while not self.check("eof"):
            if not self.at_type():
                self.error(f"expected a declaration or function, found {self.peek().value!r}")
            start_tok = self.peek()
            var_type = self.parse_type()
            name_tok = self.expect("ident")
            if self.check("op", "("):
                functions.append(self.parse_function(var_type, name_tok, start_tok))
            else:
                globals_.append(self.finish_var_decl(var_type, name_tok, start_tok))
        return functions, globals_

    def parse_function(self, return_type: str, name_tok: Token, start_tok: Token) -> ast.FunctionDef:
        self.expect("op", "(")
        params: list[tuple[str, str]] = []
        if not self.check("op", ")"):
            if self.check("keyword", "void") and self.peek(1).value == ")":
                self.advance()
            else:
                while True:
                    ptype = self.parse_type()
                    pname = self.expect("ident").value
                    params.append((ptype, pname))
                    if not self.match("op", ","):
                        break
        self.expect("op", ")")
        body = self.parse_block()
        fn = ast.FunctionDef(name=name_tok.value, return_type=return_type, params=params, body=body)
        fn.start_line = start_tok.line
        fn.end_line = body.end_line
        fn.signature_line = name_tok.line
        return fn

    def finish_var_decl(self, var_type: str, name_tok: Token, start_tok: Token) -> ast.VarDecl:
        init = None
        if self.match("op", "="):
            init = self.parse_expr()
        semi = self.expect("op", ";")
        decl = ast.VarDecl(var_type=var_type, name=name_tok.value, init=init)
        decl.start_line = start_tok.line
        decl.end_line = semi.line
        decl.header_lines = tuple(range(start_tok.line, semi.line + 1))
        decl.name_line = name_tok.line
        return decl

    # --- statements ---

    def parse_block(self) -> ast.Block:
        open_tok = self.expect("op", "{")
        body: list[ast.Stmt] = []
        while not self.check("op", "}"):
            if self.check("eof"):
                self.error("unterminated block", open_tok)
            body.append(self.parse_statement())
        close_tok = self.expect("op", "}")
        block = ast.Block(body=body)
        block.start_line = open_tok.line
        block.end_line = close_tok.line
        return block

    def parse_statement(self) -> ast.Stmt:
        tok = self.peek()
        if self.check("op", "{"):
            return self.parse_block()
        if self.at_type():
            start_tok = self.peek()
            var_type = self.parse_type()
            name_tok = self.expect("ident")
            return self.finish_var_decl(var_type, name_tok, start_tok)
        if tok.kind == "keyword":
            if tok.value == "if":
                return self.parse_if()
            if tok.value == "while":
                return self.parse_while()
            if tok.value == "do":
                return self.parse_do_while()
            if tok.value == "for":
                return self.parse_for()
            if tok.value == "switch":
                return self.parse_switch()
            if tok.value == "try":
                return self.parse_try()
            if tok.value == "return":
                return self.parse_return()
            if tok.value == "break":
                kw = self.advance()
                semi = self.expect("op", ";")
                stmt = ast.Break()
                self._simple_span(stmt, kw, semi)
                return stmt
            if tok.value == "continue":
                kw = self.advance()
                semi = self.expect("op", ";")
                stmt = ast.Continue()
                self._simple_span(stmt, kw, semi)
                return stmt
            if tok.value in ("else", "case", "default", "catch"):
                self.error(f"{tok.value!r} without matching construct", tok)
        expr = self.parse_expr()
        semi = self.expect("op", ";")
        stmt = ast.ExprStmt(expr=expr)
        stmt.start_line = tok.line
        stmt.end_line = semi.line
        stmt.header_lines = tuple(range(tok.line, semi.line + 1))
        return stmt

    @staticmethod
    def _simple_span(stmt: ast.Stmt, first: Token, last: Token):
        stmt.start_line = first.line
        stmt.end_line = last.line
        stmt.header_lines = tuple(range(first.line, last.line + 1))

    def parse_return(self) -> ast.Return:
        kw = self.advance()
        value = None
        if not self.check("op", ";"):
            value = self.parse_expr()
        semi = self.expect("op", ";")
        stmt = ast.Return(value=value)
        self._simple_span(stmt, kw, semi)
        return stmt

    def parse_if(self) -> ast.If:
        kw = self.advance()
        self.expect("op", "(")
        cond = self.parse_expr()
        close = self.expect("op", ")")
        then_branch = self.parse_statement()
        else_branch = None
        if self.match("keyword", "else"):
            else_branch = self.parse_statement()
        stmt = ast.If(cond=cond, then_branch=then_branch, else_branch=else_branch)
        stmt.start_line = kw.line
        stmt.end_line = else_branch.end_line if else_branch is not None else then_branch.end_line
        stmt.header_lines = tuple(range(kw.line, close.line + 1))
        return stmt

    def parse_while(self) -> ast.While:
        kw = self.advance()
        self.expect("op", "(")
        cond = self.parse_expr()
        close = self.expect("op", ")")
        body = self.parse_statement()
        stmt = ast.While(cond=cond, body=body)
        stmt.start_line = kw.line
        stmt.end_line = body.end_line
        stmt.header_lines = tuple(range(kw.line, close.line + 1))
        return stmt

    def parse_do_while(self) -> ast.DoWhile:
        kw = self.advance()
        body = self.parse_statement()
        while_kw = self.expect("keyword", "while")
        self.expect("op", "(")
        cond = self.parse_expr()
        self.expect("op", ")")
        semi = self.expect("op", ";")
        stmt = ast.DoWhile(body=body, cond=cond)
        stmt.start_line = kw.line
        stmt.end_line = semi.line
        stmt.header_lines = tuple(sorted({kw.line, *range(while_kw.line, semi.line + 1)}))
        return stmt

    def parse_for(self) -> ast.For:
        kw = self.advance()
        self.expect("op", "(")
        init: ast.Stmt | None = None
        if self.check("op", ";"):
            self.advance()
        elif self.at_type():
            start_tok = self.peek()
            var_type = self.parse_type()
            name_tok = self.expect("ident")
            init = self.finish_var_decl(var_type, name_tok, start_tok)
        else:
            start_tok = self.peek()
            expr = self.parse_expr()
            semi = self.expect("op", ";")
            init = ast.ExprStmt(expr=expr)
            self._simple_span(init, start_tok, semi)
        cond = None
        if not self.check("op", ";"):
            cond = self.parse_expr()
        self.expect("op", ";")
        update = None
        if not self.check("op", ")"):
            update = self.parse_expr()
        close = self.expect("op", ")")
        body = self.parse_statement()
        stmt = ast.For(init=init, cond=cond, update=update, body=body)
        stmt.start_line = kw.line
        stmt.end_line = body.end_line
        stmt.header_lines = tuple(range(kw.line, close.line + 1))
        return stmt

    def parse_switch(self) -> ast.Switch:
        kw = self.advance()
        self.expect("op", "(")
        scrutinee = self.parse_expr()
        close = self.expect("op", ")")
        self.expect("op", "{")
        cases: list[ast.Case] = []
        while not self.check("op", "}"):
            case_tok = self.peek()
            if self.match("keyword", "case"):
                test = self.parse_expr()
            elif self.match("keyword", "default"):
                test = None
            else:
                self.error("expected 'case' or 'default' inside switch")
            colon = self.expect("op", ":")
            body: list[ast.Stmt] = []
            while not (self.check("op", "}") or self.check("keyword", "case")
                       or self.check("keyword", "default")):
                body.append(self.parse_statement())
            case = ast.Case(test=test, body=body)
            case.start_line = case_tok.line
            case.end_line = body[-1].end_line if body else colon.line
            case.header_lines = tuple(range(case_tok.line, colon.line + 1))
            cases.append(case)
        end = self.expect("op", "}")
        stmt = ast.Switch(scrutinee=scrutinee, cases=cases)
        stmt.start_line = kw.line
        stmt.end_line = end.line
        stmt.header_lines = tuple(range(kw.line, close.line + 1))
        return stmt

    def parse_try(self) -> ast.TryCatch:
        kw = self.advance()
        try_body = self.parse_block()
        catch_kw = self.expect("keyword", "catch")
        self.expect("op", "(")
        param_type = param_name = None
        if not self.check("op", ")"):
            param_type = self.parse_type()
            if self.check("ident"):
                param_name = self.advance().value
        close = self.expect("op", ")")
        catch_body = self.parse_block()
        handler = ast.CatchClause(param_type=param_type, param_name=param_name, body=catch_body)
        handler.start_line = catch_kw.line
        handler.end_line = catch_body.end_line
        handler.header_lines = tuple(range(catch_kw.line, close.line + 1))
        stmt = ast.TryCatch(try_body=try_body, handler=handler)
        stmt.start_line = kw.line
        stmt.end_line = catch_body.end_line
        stmt.header_lines = (kw.line,)
        return stmt

    # --- expressions (precedence climbing) ---

    def parse_expr(self) -> ast.Expr:
        return self.parse_assignment()

    def parse_assignment(self) -> ast.Expr:
        left = self.parse_logic_or()
        tok = self.peek()
        if tok.kind == "op" and tok.value in ASSIGN_OPS:
            if not isinstance(left, ast.Identifier):
                self.error("assignment target must be a variable", tok)
            self.advance()
            value = self.parse_assignment()
            return ast.Assign(line=tok.line, op=tok.value, target=left, value=value)
        return left

    def _binary_level(self, ops: tuple[str, ...], next_level):
        left = next_level()
        while self.peek().kind == "op" and self.peek().value in ops:
            op_tok = self.advance()
            right = next_level()
            left = ast.Binary(line=op_tok.line, op=op_tok.value, left=left, right=right)
        return left

    def parse_logic_or(self) -> ast.Expr:
        return self._binary_level(("||",), self.parse_logic_and)

    def parse_logic_and(self) -> ast.Expr:
        return self._binary_level(("&&",), self.parse_equality)

    def parse_equality(self) -> ast.Expr:
        return self._binary_level(("==", "!="), self.parse_relational)

    def parse_relational(self) -> ast.Expr:
        return self._binary_level(("<", "<=", ">", ">="), self.parse_additive)

    def parse_additive(self) -> ast.Expr:
        return self._binary_level(("+", "-"), self.parse_multiplicative)

    def parse_multiplicative(self) -> ast.Expr:
        return self._binary_level(("*", "/", "%"), self.parse_unary)

    def parse_unary(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.value in ("!", "-"):
            self.advance()
            operand = self.parse_unary()
            return ast.Unary(line=tok.line, op=tok.value, operand=operand)
        if tok.kind == "op" and tok.value in ("++", "--"):
            self.advance()
            target = self.parse_unary()
            if not isinstance(target, ast.Identifier):
                self.error(f"{tok.value} target must be a variable", tok)
            return ast.IncDec(line=tok.line, op=tok.value, target=target, prefix=True)
        if tok.kind == "op" and tok.value == "*":
            self.error("unsupported construct (pointer dereference): '*'", tok,
                       UnsupportedConstructError)
        return self.parse_postfix()

    def parse_postfix(self) -> ast.Expr:
        expr = self.parse_primary()
        while self.peek().kind == "op" and self.peek().value in ("++", "--"):
            op_tok = self.advance()
            if not isinstance(expr, ast.Identifier):
                self.error(f"{op_tok.value} target must be a variable", op_tok)
            expr = ast.IncDec(line=op_tok.line, op=op_tok.value, target=expr, prefix=False)
        return expr

    def parse_primary(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return ast.Literal(line=tok.line, kind="number", value=tok.value)
        if tok.kind == "string":
            self.advance()
            return ast.Literal(line=tok.line, kind="string", value=tok.value)
        if tok.kind == "char":
            self.advance()
            return ast.Literal(line=tok.line, kind="char", value=tok.value)
        if tok.kind == "keyword" and tok.value in ("true", "false"):
            self.advance()
            return ast.Literal(line=tok.line, kind="bool", value=tok.value)
        if tok.kind == "ident":
            self.advance()
            if self.check("op", "("):
                self.advance()
                args: list[ast.Expr] = []
                if not self.check("op", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.match("op", ","):
                            break
                self.expect("op", ")")
                return ast.Call(line=tok.line, callee=tok.value, args=args)
            return ast.Identifier(line=tok.line, name=tok.value)
        if tok.kind == "op" and tok.value == "(":
            self.advance()
            expr = self.parse_expr()
            self.expect("op", ")")
            return expr
        if tok.kind == "op" and tok.value == "?":
            self.error("unsupported construct (ternary operator): '?'", tok,
                       UnsupportedConstructError)
        self.error(f"unexpected token {tok.value!r}", tok)


def _link_parents(root: ast.Stmt):
    for _, child in ast.child_stmts(root):
        child.parent = root
        child.parent_slot = _slot_for(root, child)
        _link_parents(child)


def _slot_for(parent: ast.Stmt, child: ast.Stmt) -> str:
    for slot, c in ast.child_stmts(parent):
        if c is child:
            return slot
    return ""


def parse(text: str) -> tuple[list[ast.FunctionDef], list[ast.VarDecl]]:
    """Parse a compilation unit into (functions, global declarations)."""
    tokens = tokenize(text)
    functions, globals_ = _Parser(tokens).parse_unit()
    for fn in functions:
        _link_parents(fn.body)
    return functions, globals_
