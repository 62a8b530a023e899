"""Per-snapshot code model: AST + CFG + post-dominators + dependence edges,
indexed by source line."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..lang import astnodes as ast
from ..lang.parser import parse
from .cfg import ENTRY, EXIT, Cfg, assign_node_ids, build_cfg
from .dataflow import (
    PostDominatorTree,
    compute_control_dependence,
    compute_data_dependence,
    compute_postdominators,
)


@dataclass(eq=False)
class FunctionModel:
    name: str
    params: list[tuple[str, str]]
    body: ast.Block
    cfg: Cfg
    postdom: PostDominatorTree
    cdg: set[tuple[int, int]]  # (controller node, controlled node)
    ddg: set[tuple[int, int, str]]  # (def node, use node, variable)
    stmts: list[ast.Stmt]  # CFG statements in syntactic order
    line_index: dict[int, set[int]]  # source line -> statement node ids
    locals_: dict[str, str]  # declared name -> type (params included)
    start_line: int = 0
    end_line: int = 0
    signature_line: int = 0

    def node_line(self, node: int) -> int | None:
        """Primary source line of a CFG node; the signature line for entry."""
        if node == ENTRY:
            return self.signature_line
        if node == EXIT:
            return None
        stmt = self.cfg.stmt_of.get(node)
        return stmt.line if stmt is not None else None

    def nodes_at_line(self, line_no: int) -> set[int]:
        return set(self.line_index.get(line_no, set()))


@dataclass(eq=False)
class SourceUnit:
    path: str
    functions: list[FunctionModel]
    globals_: list[ast.VarDecl]
    line_count: int
    global_names: dict[str, str] = field(default_factory=dict)

    def function_at_line(self, line_no: int) -> FunctionModel | None:
        for fn in self.functions:
            if fn.start_line <= line_no <= fn.end_line:
                return fn
        return None


def _collect_locals(fn: ast.FunctionDef) -> dict[str, str]:
    table = {name: ptype for ptype, name in fn.params}

    def visit(stmt: ast.Stmt):
        if isinstance(stmt, ast.VarDecl) and stmt.name not in table:
            table[stmt.name] = stmt.var_type
        if isinstance(stmt, ast.For) and stmt.init is not None:
            visit(stmt.init)
        if isinstance(stmt, ast.CatchClause) and stmt.param_name and stmt.param_name not in table:
            table[stmt.param_name] = stmt.param_type or "int"
        for _, child in ast.child_stmts(stmt):
            visit(child)

    visit(fn.body)
    return table


def build_function_model(fn: ast.FunctionDef, path: str = "") -> FunctionModel:
    stmts = assign_node_ids(fn.body)
    cfg = build_cfg(fn.body)
    postdom = compute_postdominators(cfg)
    cdg = compute_control_dependence(cfg, postdom)
    ddg = compute_data_dependence(cfg, [name for _, name in fn.params])
    line_index: dict[int, set[int]] = {}
    for stmt in stmts:
        for line in stmt.header_lines:
            line_index.setdefault(line, set()).add(stmt.node_id)
    return FunctionModel(
        name=fn.name,
        params=fn.params,
        body=fn.body,
        cfg=cfg,
        postdom=postdom,
        cdg=cdg,
        ddg=ddg,
        stmts=stmts,
        line_index=line_index,
        locals_=_collect_locals(fn),
        start_line=fn.start_line,
        end_line=fn.end_line,
        signature_line=fn.signature_line,
    )


def parse_source(text: str, path: str = "") -> SourceUnit:
    """Parse a compilation unit and run all per-function analyses."""
    functions, globals_ = parse(text)
    models = [build_function_model(fn, path) for fn in functions]
    return SourceUnit(
        path=path,
        functions=models,
        globals_=globals_,
        line_count=text.count("\n") + (0 if text.endswith("\n") or not text else 1),
        global_names={g.name: g.var_type for g in globals_},
    )


def statements_at_line(unit: SourceUnit, line_no: int) -> set[int]:
    """Statement node ids at a source line; empty for blank/comment/brace lines.

    Global declarations are not CFG statements and yield the empty set here;
    they are visible through `unit.globals_`.
    """
    fn = unit.function_at_line(line_no)
    if fn is None:
        return set()
    return fn.nodes_at_line(line_no)


# --- debug dumps (golden-testable text format) -------------------------------


def _node_label(fn: FunctionModel, node: int) -> str:
    if node == ENTRY:
        return "entry"
    if node == EXIT:
        return "exit"
    stmt = fn.cfg.stmt_of[node]
    return f"n{node}:{type(stmt).__name__}@{stmt.line}"


def dump_graphs(unit: SourceUnit) -> str:
    """Text dump of CFG/CDG/DDG per function, stable across runs."""
    out = []
    for fn in unit.functions:
        out.append(f"function {fn.name} lines {fn.start_line}..{fn.end_line}")
        out.append("  cfg:")
        for u in sorted(fn.cfg.succ):
            for v in fn.cfg.succ[u]:
                out.append(f"    {_node_label(fn, u)} -> {_node_label(fn, v)}")
        out.append("  cdg:")
        for u, v in sorted(fn.cdg):
            out.append(f"    {_node_label(fn, u)} -> {_node_label(fn, v)}")
        out.append("  ddg:")
        for u, v, var in sorted(fn.ddg, key=lambda e: (e[0], e[1], e[2])):
            out.append(f"    {_node_label(fn, u)} -> {_node_label(fn, v)} [{var}]")
        out.append("  postdom:")
        for n in sorted(fn.postdom.ipdom):
            out.append(f"    ipdom({_node_label(fn, n)}) = {_node_label(fn, fn.postdom.ipdom[n])}")
    return "\n".join(out) + "\n"
