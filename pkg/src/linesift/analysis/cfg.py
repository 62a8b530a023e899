"""Control flow graph over statements of one function.

One node per statement (not per basic block). Synthetic entry and exit nodes,
plus an augmenting entry->exit edge required by the control-dependence
computation. Structured control only; the grammar has no goto.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..lang import astnodes as ast

ENTRY = 0
EXIT = 1


@dataclass
class Cfg:
    entry: int = ENTRY
    exit: int = EXIT
    nodes: list[int] = field(default_factory=lambda: [ENTRY, EXIT])
    succ: dict[int, list[int]] = field(default_factory=dict)
    stmt_of: dict[int, ast.Stmt] = field(default_factory=dict)

    def add_node(self, node: int, stmt: ast.Stmt | None = None):
        if node not in self.succ:
            self.succ[node] = []
            if node not in (ENTRY, EXIT):
                self.nodes.append(node)
        if stmt is not None:
            self.stmt_of[node] = stmt

    def add_edge(self, u: int, v: int):
        self.add_node(u)
        self.add_node(v)
        if v not in self.succ[u]:
            self.succ[u].append(v)

    def pred(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {n: [] for n in self.nodes}
        for u, vs in self.succ.items():
            for v in vs:
                out[v].append(u)
        return out


# statements that own a CFG node; Block is structural, For.init folds into For
_CFG_STMTS = (ast.VarDecl, ast.ExprStmt, ast.Return, ast.Break, ast.Continue,
              ast.If, ast.While, ast.DoWhile, ast.For, ast.Switch, ast.Case,
              ast.TryCatch, ast.CatchClause)


def assign_node_ids(body: ast.Block) -> list[ast.Stmt]:
    """Number CFG statements 2,3,... in syntactic order; returns them in order."""
    numbered: list[ast.Stmt] = []
    next_id = 2

    def visit(stmt: ast.Stmt, in_for_header: bool = False):
        nonlocal next_id
        if isinstance(stmt, _CFG_STMTS) and not in_for_header:
            stmt.node_id = next_id
            next_id += 1
            numbered.append(stmt)
        if isinstance(stmt, ast.For) and stmt.init is not None:
            visit(stmt.init, in_for_header=True)
        for _, child in ast.child_stmts(stmt):
            visit(child)

    visit(body)
    return numbered


class _Builder:
    def __init__(self):
        self.cfg = Cfg()
        self.cfg.add_node(ENTRY)
        self.cfg.add_node(EXIT)
        self.break_stack: list[list[int]] = []
        self.continue_stack: list[int] = []
        self.catch_stack: list[int] = []

    def connect(self, preds: set[int], node: int):
        for p in preds:
            self.cfg.add_edge(p, node)

    def enter(self, stmt: ast.Stmt, preds: set[int]) -> int:
        node = stmt.node_id
        self.cfg.add_node(node, stmt)
        self.connect(preds, node)
        if self.catch_stack:
            # any statement inside a try body may transfer to the innermost handler
            self.cfg.add_edge(node, self.catch_stack[-1])
        return node

    def wire_seq(self, stmts: list[ast.Stmt], preds: set[int]) -> set[int]:
        for stmt in stmts:
            preds = self.wire(stmt, preds)
        return preds

    def wire(self, stmt: ast.Stmt, preds: set[int]) -> set[int]:
        if isinstance(stmt, ast.Block):
            return self.wire_seq(stmt.body, preds)

        if isinstance(stmt, (ast.VarDecl, ast.ExprStmt)):
            node = self.enter(stmt, preds)
            return {node}

        if isinstance(stmt, ast.Return):
            node = self.enter(stmt, preds)
            self.cfg.add_edge(node, EXIT)
            return set()

        if isinstance(stmt, ast.Break):
            node = self.enter(stmt, preds)
            if not self.break_stack:
                # grammar permits stray break; treat as jump to exit
                self.cfg.add_edge(node, EXIT)
            else:
                self.break_stack[-1].append(node)
            return set()

        if isinstance(stmt, ast.Continue):
            node = self.enter(stmt, preds)
            if self.continue_stack:
                self.cfg.add_edge(node, self.continue_stack[-1])
            else:
                self.cfg.add_edge(node, EXIT)
            return set()

        if isinstance(stmt, ast.If):
            cond = self.enter(stmt, preds)
            then_out = self.wire(stmt.then_branch, {cond})
            if stmt.else_branch is not None:
                else_out = self.wire(stmt.else_branch, {cond})
            else:
                else_out = {cond}
            return then_out | else_out

        if isinstance(stmt, ast.While):
            cond = self.enter(stmt, preds)
            self.break_stack.append([])
            self.continue_stack.append(cond)
            body_out = self.wire(stmt.body, {cond})
            self.continue_stack.pop()
            breaks = self.break_stack.pop()
            self.connect(body_out, cond)
            return {cond} | set(breaks)

        if isinstance(stmt, ast.DoWhile):
            cond = stmt.node_id
            self.cfg.add_node(cond, stmt)
            self.break_stack.append([])
            self.continue_stack.append(cond)
            body_out = self.wire(stmt.body, preds | {cond})
            self.continue_stack.pop()
            breaks = self.break_stack.pop()
            if self.catch_stack:
                self.cfg.add_edge(cond, self.catch_stack[-1])
            self.connect(body_out, cond)
            return {cond} | set(breaks)

        if isinstance(stmt, ast.For):
            header = self.enter(stmt, preds)
            self.break_stack.append([])
            self.continue_stack.append(header)
            body_out = self.wire(stmt.body, {header})
            self.continue_stack.pop()
            breaks = self.break_stack.pop()
            self.connect(body_out, header)
            return {header} | set(breaks)

        if isinstance(stmt, ast.Switch):
            head = self.enter(stmt, preds)
            self.break_stack.append([])
            fallthrough: set[int] = set()
            has_default = any(c.test is None for c in stmt.cases)
            for case in stmt.cases:
                case_node = self.enter(case, fallthrough | {head})
                fallthrough = self.wire_seq(case.body, {case_node})
            breaks = self.break_stack.pop()
            out = fallthrough | set(breaks)
            if not has_default or not stmt.cases:
                out |= {head}
            return out

        if isinstance(stmt, ast.TryCatch):
            try_node = self.enter(stmt, preds)
            handler = stmt.handler
            self.cfg.add_node(handler.node_id, handler)
            self.catch_stack.append(handler.node_id)
            # entering the try may itself raise, keeping the handler reachable
            self.cfg.add_edge(try_node, handler.node_id)
            try_out = self.wire(stmt.try_body, {try_node})
            self.catch_stack.pop()
            if self.catch_stack:
                self.cfg.add_edge(handler.node_id, self.catch_stack[-1])
            catch_out = self.wire(handler.body, {handler.node_id})
            return try_out | catch_out

        if isinstance(stmt, ast.Case):  # handled by Switch
            raise AssertionError("case outside switch")
        raise AssertionError(f"unhandled statement {type(stmt).__name__}")


def build_cfg(body: ast.Block) -> Cfg:
    """Build the CFG for a function body whose statements are already numbered."""
    builder = _Builder()
    out = builder.wire(body, {ENTRY})
    builder.connect(out, EXIT)
    builder.cfg.add_edge(ENTRY, EXIT)  # augmenting edge for control dependence
    return builder.cfg
