"""Post-dominance, control dependence, and reaching-definitions analyses.

All three operate on the statement-level CFG. Post-dominance is the set-based
fixpoint on the reversed graph; control dependence follows the classical
branch-outcome definition; data dependence is reaching definitions over scalar
variables with def-use edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import AnalysisError
from ..lang import astnodes as ast
from .cfg import ENTRY, EXIT, Cfg


@dataclass
class PostDominatorTree:
    # full reflexive post-dominator sets and the immediate post-dominator map
    pdom: dict[int, set[int]]
    ipdom: dict[int, int]

    def strictly_postdominates(self, a: int, b: int) -> bool:
        """True when a strictly post-dominates b."""
        return a != b and a in self.pdom[b]


def compute_postdominators(cfg: Cfg) -> PostDominatorTree:
    """Set-based fixpoint: pdom(exit) = {exit}; pdom(n) = {n} u intersection over successors."""
    nodes = list(cfg.nodes)
    all_nodes = set(nodes)
    pdom: dict[int, set[int]] = {n: (set(all_nodes) if n != EXIT else {EXIT}) for n in nodes}
    for n in nodes:
        if n != EXIT and not cfg.succ.get(n):
            raise AnalysisError(f"node {n} cannot reach exit (no successors)")

    changed = True
    while changed:
        changed = False
        for n in nodes:
            if n == EXIT:
                continue
            inter: set[int] | None = None
            for s in cfg.succ[n]:
                inter = set(pdom[s]) if inter is None else (inter & pdom[s])
            new = {n} | (inter or set())
            if new != pdom[n]:
                pdom[n] = new
                changed = True

    for n in nodes:
        if EXIT not in pdom[n]:
            raise AnalysisError(f"exit unreachable from node {n}")

    ipdom: dict[int, int] = {EXIT: EXIT}
    for n in nodes:
        if n == EXIT:
            continue
        strict = pdom[n] - {n}
        # the immediate post-dominator is the strict post-dominator that every
        # other strict post-dominator also post-dominates transitively
        candidates = [d for d in strict if strict <= pdom[d] | {d}]
        if len(candidates) != 1:
            raise AnalysisError(f"no unique immediate post-dominator for node {n}")
        ipdom[n] = candidates[0]
    return PostDominatorTree(pdom=pdom, ipdom=ipdom)


def compute_control_dependence(cfg: Cfg, postdom: PostDominatorTree) -> set[tuple[int, int]]:
    """Edges (controller X -> controlled Y): some successor S of X has Y in
    pdom(S) while Y is not in pdom(X). Requires the augmenting entry->exit edge."""
    edges: set[tuple[int, int]] = set()
    for x in cfg.nodes:
        succs = cfg.succ.get(x, [])
        if len(succs) < 2:
            continue
        for s in succs:
            for y in postdom.pdom[s]:
                if y not in postdom.pdom[x]:
                    edges.add((x, y))
    return edges


# --- reaching definitions ----------------------------------------------------


def stmt_defs_uses(stmt: ast.Stmt) -> tuple[set[str], set[str]]:
    """Variables defined and used by a statement's own expressions."""
    defs: set[str] = set()
    uses: set[str] = set()

    def visit(expr: ast.Expr, reading: bool = True):
        if isinstance(expr, ast.Identifier):
            if reading:
                uses.add(expr.name)
        elif isinstance(expr, ast.Literal):
            pass
        elif isinstance(expr, ast.Unary):
            visit(expr.operand)
        elif isinstance(expr, ast.IncDec):
            defs.add(expr.target.name)
            uses.add(expr.target.name)
        elif isinstance(expr, ast.Binary):
            visit(expr.left)
            visit(expr.right)
        elif isinstance(expr, ast.Assign):
            defs.add(expr.target.name)
            if expr.op != "=":
                uses.add(expr.target.name)
            visit(expr.value)
        elif isinstance(expr, ast.Call):
            for arg in expr.args:
                visit(arg)

    if isinstance(stmt, ast.VarDecl):
        if stmt.init is not None:
            defs.add(stmt.name)
            visit(stmt.init)
        return defs, uses
    if isinstance(stmt, ast.For):
        if stmt.init is not None:
            d, u = stmt_defs_uses(stmt.init)
            defs |= d
            uses |= u
        if stmt.cond is not None:
            visit(stmt.cond)
        if stmt.update is not None:
            visit(stmt.update)
        return defs, uses
    if isinstance(stmt, ast.CatchClause):
        if stmt.param_name:
            defs.add(stmt.param_name)
        return defs, uses
    for expr in ast.stmt_exprs(stmt):
        visit(expr)
    return defs, uses


def _gen_kill_uses(cfg: Cfg, params: list[str]):
    gen: dict[int, set[tuple[str, int]]] = {}
    kill_vars: dict[int, set[str]] = {}
    uses: dict[int, set[str]] = {}
    for n in cfg.nodes:
        if n == ENTRY:
            gen[n] = {(p, ENTRY) for p in params}
            kill_vars[n] = set(params)
            uses[n] = set()
        elif n == EXIT:
            gen[n] = set()
            kill_vars[n] = set()
            uses[n] = set()
        else:
            d, u = stmt_defs_uses(cfg.stmt_of[n])
            gen[n] = {(v, n) for v in d}
            kill_vars[n] = d
            uses[n] = u
    return gen, kill_vars, uses


def reaching_in_sets(cfg: Cfg, params: list[str]) -> dict[int, set[tuple[str, int]]]:
    """IN sets of the reaching-definitions fixpoint: (variable, defining node) pairs."""
    gen, kill_vars, _ = _gen_kill_uses(cfg, params)
    preds = cfg.pred()
    in_sets: dict[int, set[tuple[str, int]]] = {n: set() for n in cfg.nodes}
    out_sets: dict[int, set[tuple[str, int]]] = {n: set(gen[n]) for n in cfg.nodes}
    changed = True
    while changed:
        changed = False
        for n in cfg.nodes:
            new_in: set[tuple[str, int]] = set()
            for p in preds[n]:
                new_in |= out_sets[p]
            new_out = gen[n] | {(v, d) for (v, d) in new_in if v not in kill_vars[n]}
            if new_in != in_sets[n] or new_out != out_sets[n]:
                in_sets[n] = new_in
                out_sets[n] = new_out
                changed = True
    return in_sets


def compute_data_dependence(cfg: Cfg, params: list[str]) -> set[tuple[int, int, str]]:
    """Reaching-definitions def-use edges (def node, use node, variable).

    Parameters are defined at the entry node. A use within the defining
    statement consumes the definitions flowing in (its own definition only
    reaches it around a loop).
    """
    _, _, uses = _gen_kill_uses(cfg, params)
    in_sets = reaching_in_sets(cfg, params)
    edges: set[tuple[int, int, str]] = set()
    for n in cfg.nodes:
        for v in uses[n]:
            for (var, d) in in_sets[n]:
                if var == v:
                    edges.add((d, n, v))
    return edges
