"""AST node definitions for the C-like subset.

Every node records the 1-based source lines it occupies. Statements
additionally carry `header_lines`: the lines holding the statement's own
tokens, excluding nested statements (for an if, the `if (...)` part; for a
declaration, the whole declaration). `header_lines` drives the line index
used by the per-line feature queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field


# --- expressions -----------------------------------------------------------

@dataclass
class Expr:
    line: int


@dataclass
class Literal(Expr):
    kind: str  # number | string | char | bool
    value: str


@dataclass
class Identifier(Expr):
    name: str


@dataclass
class Unary(Expr):
    op: str  # ! or - (sign)
    operand: Expr


@dataclass
class IncDec(Expr):
    op: str  # ++ or --
    target: Identifier
    prefix: bool


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Assign(Expr):
    op: str  # = += -= *= /=
    target: Identifier
    value: Expr


@dataclass
class Call(Expr):
    callee: str
    args: list[Expr]


def walk_expr(expr: Expr):
    yield expr
    if isinstance(expr, Unary):
        yield from walk_expr(expr.operand)
    elif isinstance(expr, IncDec):
        yield from walk_expr(expr.target)
    elif isinstance(expr, Binary):
        yield from walk_expr(expr.left)
        yield from walk_expr(expr.right)
    elif isinstance(expr, Assign):
        yield from walk_expr(expr.target)
        yield from walk_expr(expr.value)
    elif isinstance(expr, Call):
        for arg in expr.args:
            yield from walk_expr(arg)


# --- statements -------------------------------------------------------------

@dataclass
class Stmt:
    start_line: int = field(init=False, default=0)
    end_line: int = field(init=False, default=0)
    header_lines: tuple[int, ...] = field(init=False, default=())
    node_id: int = field(init=False, default=-1)  # CFG node id; -1 for structural nodes
    parent: "Stmt | None" = field(init=False, default=None, repr=False)
    parent_slot: str = field(init=False, default="")

    @property
    def line(self) -> int:
        return self.header_lines[0] if self.header_lines else self.start_line


@dataclass
class VarDecl(Stmt):
    var_type: str
    name: str
    init: Expr | None
    name_line: int = 0


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Return(Stmt):
    value: Expr | None


@dataclass
class Break(Stmt):
    pass


@dataclass
class Continue(Stmt):
    pass


@dataclass
class Block(Stmt):
    body: list[Stmt]


@dataclass
class If(Stmt):
    cond: Expr
    then_branch: Stmt
    else_branch: Stmt | None


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class DoWhile(Stmt):
    body: Stmt
    cond: Expr


@dataclass
class For(Stmt):
    init: Stmt | None  # VarDecl or ExprStmt, folded into the header node
    cond: Expr | None
    update: Expr | None
    body: Stmt


@dataclass
class Case(Stmt):
    test: Expr | None  # None for default
    body: list[Stmt]


@dataclass
class Switch(Stmt):
    scrutinee: Expr
    cases: list[Case]


@dataclass
class CatchClause(Stmt):
    param_type: str | None
    param_name: str | None
    body: Block


@dataclass
class TryCatch(Stmt):
    try_body: Block
    handler: CatchClause


@dataclass
class FunctionDef:
    name: str
    return_type: str
    params: list[tuple[str, str]]  # (type, name)
    body: Block
    start_line: int = 0
    end_line: int = 0
    signature_line: int = 0


def child_stmts(stmt: Stmt) -> list[tuple[str, Stmt]]:
    """(slot, child) pairs for the statements nested directly under `stmt`.

    A For's init clause is part of the header, not a child.
    """
    if isinstance(stmt, Block):
        return [("block", s) for s in stmt.body]
    if isinstance(stmt, If):
        out = [("then", stmt.then_branch)]
        if stmt.else_branch is not None:
            out.append(("else", stmt.else_branch))
        return out
    if isinstance(stmt, While):
        return [("body", stmt.body)]
    if isinstance(stmt, DoWhile):
        return [("body", stmt.body)]
    if isinstance(stmt, For):
        return [("body", stmt.body)]
    if isinstance(stmt, Switch):
        return [("case", c) for c in stmt.cases]
    if isinstance(stmt, Case):
        return [("casebody", s) for s in stmt.body]
    if isinstance(stmt, TryCatch):
        return [("try", stmt.try_body), ("catch", stmt.handler)]
    if isinstance(stmt, CatchClause):
        return [("catchbody", stmt.body)]
    return []


def walk_stmts(stmt: Stmt):
    yield stmt
    for _, child in child_stmts(stmt):
        yield from walk_stmts(child)


def iter_all_stmts(stmt: Stmt):
    """Like walk_stmts but also yields For init clauses."""
    yield stmt
    if isinstance(stmt, For) and stmt.init is not None:
        yield stmt.init
    for _, child in child_stmts(stmt):
        yield from iter_all_stmts(child)


def stmt_exprs(stmt: Stmt) -> list[Expr]:
    """Expressions owned by the statement's header (not by nested statements)."""
    if isinstance(stmt, VarDecl):
        return [stmt.init] if stmt.init is not None else []
    if isinstance(stmt, ExprStmt):
        return [stmt.expr]
    if isinstance(stmt, Return):
        return [stmt.value] if stmt.value is not None else []
    if isinstance(stmt, If):
        return [stmt.cond]
    if isinstance(stmt, (While, DoWhile)):
        return [stmt.cond]
    if isinstance(stmt, For):
        # the init clause is its own statement; iterate it via iter_all_stmts
        out = []
        if stmt.cond is not None:
            out.append(stmt.cond)
        if stmt.update is not None:
            out.append(stmt.update)
        return out
    if isinstance(stmt, Switch):
        return [stmt.scrutinee]
    if isinstance(stmt, Case):
        return [stmt.test] if stmt.test is not None else []
    return []
