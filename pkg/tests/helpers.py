"""Shared test support: brute-force definitional oracles for the graph
analyses, and a seeded random generator of small well-formed source functions.

The oracles deliberately avoid the dataflow fixpoint machinery: post-dominance
is decided by path-existence checks, control dependence by applying its
definition over all node pairs, and reaching definitions by pruned-graph
reachability. They are slow and obviously correct.
"""

from __future__ import annotations

import random
from collections import deque

from linesift.analysis.cfg import ENTRY, EXIT, Cfg
from linesift.analysis.dataflow import stmt_defs_uses


def _reaches(cfg: Cfg, start: int, goal: int, banned: set[int]) -> bool:
    """True if a path start->goal exists whose intermediate nodes avoid
    `banned`. The endpoints themselves may be banned; start == goal counts."""
    if start == goal:
        return True
    seen = {start}
    queue = deque([start])
    while queue:
        n = queue.popleft()
        for s in cfg.succ.get(n, []):
            if s == goal:
                return True
            if s not in banned and s not in seen:
                seen.add(s)
                queue.append(s)
    return False


def brute_postdom_sets(cfg: Cfg) -> dict[int, set[int]]:
    """pdom(n) = {p : every path n->exit passes through p}, decided by checking
    whether exit stays reachable from n once p is removed."""
    out: dict[int, set[int]] = {}
    for n in cfg.nodes:
        pdoms = set()
        for p in cfg.nodes:
            if p == n or p == EXIT:
                pdoms.add(p)
            elif not _reaches(cfg, n, EXIT, banned={p}):
                pdoms.add(p)
        if n == EXIT:
            pdoms = {EXIT}
        out[n] = pdoms
    return out


def brute_control_dependence(cfg: Cfg) -> set[tuple[int, int]]:
    """Apply the definition directly: Y depends on X iff some successor S of X
    has Y post-dominating S while Y does not post-dominate X."""
    pdom = brute_postdom_sets(cfg)
    edges = set()
    for x in cfg.nodes:
        for s in cfg.succ.get(x, []):
            for y in pdom[s]:
                if y not in pdom[x]:
                    edges.add((x, y))
    return edges


def brute_data_dependence(cfg: Cfg, params: list[str]) -> set[tuple[int, int, str]]:
    """Def d reaches use u for variable v iff some CFG path d->u has no
    intermediate node redefining v. Decided by reachability with the
    redefining nodes removed (the use node itself may redefine: the use
    happens before the kill)."""
    defs: dict[int, set[str]] = {}
    uses: dict[int, set[str]] = {}
    for n in cfg.nodes:
        if n == ENTRY:
            defs[n], uses[n] = set(params), set()
        elif n == EXIT:
            defs[n], uses[n] = set(), set()
        else:
            defs[n], uses[n] = stmt_defs_uses(cfg.stmt_of[n])

    edges: set[tuple[int, int, str]] = set()
    for d_node in cfg.nodes:
        for var in defs[d_node]:
            killers = {m for m in cfg.nodes if var in defs[m]}
            for u_node in cfg.nodes:
                if var not in uses[u_node]:
                    continue
                for s in cfg.succ.get(d_node, []):
                    if s == u_node or (s not in killers
                                       and _reaches(cfg, s, u_node, banned=killers)):
                        edges.add((d_node, u_node, var))
                        break
    return edges


# --- random program generator -------------------------------------------------


class ProgramGenerator:
    """Seeded generator of small well-formed functions in the supported subset.

    Keeps the per-function statement count at or under `max_nodes` (synthetic
    entry/exit excluded). Only declared variables are referenced,
    break/continue appear only in valid contexts, and nothing follows an
    unconditional jump, so the generated CFG has no dead nodes.
    """

    def __init__(self, seed: int, max_nodes: int = 12):
        self.rng = random.Random(seed)
        self.max_nodes = max_nodes

    def function(self, name: str = "f") -> str:
        self.budget = self.rng.randint(1, max(1, self.max_nodes - 1))
        self.vars = ["a", "b"]
        self.fresh = 0
        body = self.block(depth=0, in_loop=False)
        lines = [f"int {name}(int a, int b) {{"] + body + ["    return a;", "}"]
        return "\n".join(lines) + "\n"

    def _indent(self, depth: int) -> str:
        return "    " * (depth + 1)

    def expr(self) -> str:
        rng = self.rng
        var = rng.choice(self.vars)
        other = rng.choice(self.vars)
        roll = rng.random()
        if roll < 0.35:
            return f"{var} {rng.choice(['+', '-', '*'])} {other}"
        if roll < 0.5:
            return f"helper({var})"
        if roll < 0.8:
            return str(rng.randint(0, 9))
        return var

    def cond(self) -> str:
        rng = self.rng
        return f"{rng.choice(self.vars)} {rng.choice(['<', '>', '==', '!='])} {rng.randint(0, 5)}"

    def simple(self, depth: int) -> str:
        """One statement costing exactly one node; caller pays the budget."""
        rng = self.rng
        pad = self._indent(depth)
        roll = rng.random()
        if roll < 0.3 and len(self.vars) < 6:
            name = f"v{self.fresh}"
            self.fresh += 1
            line = f"{pad}int {name} = {self.expr()};"
            self.vars.append(name)
            return line
        if roll < 0.6:
            return f"{pad}{rng.choice(self.vars)} = {self.expr()};"
        if roll < 0.75:
            return f"{pad}{rng.choice(self.vars)}{rng.choice(['++', '--'])};"
        if roll < 0.9:
            return f"{pad}use({rng.choice(self.vars)});"
        return f"{pad}{rng.choice(self.vars)} += {rng.randint(1, 4)};"

    def block(self, depth: int, in_loop: bool) -> list[str]:
        lines: list[str] = []
        for _ in range(self.rng.randint(1, 3)):
            if self.budget <= 0:
                break
            lines.extend(self.statement(depth, in_loop))
        # a loop jump may only close a block, so nothing is ever dead code
        if in_loop and self.budget > 0 and self.rng.random() < 0.15:
            self.budget -= 1
            lines.append(f"{self._indent(depth)}{self.rng.choice(['break', 'continue'])};")
        return lines

    def statement(self, depth: int, in_loop: bool) -> list[str]:
        rng = self.rng
        pad = self._indent(depth)
        roll = rng.random()
        if depth >= 2 or self.budget <= 2 or roll < 0.42:
            self.budget -= 1
            return [self.simple(depth)]
        if roll < 0.58:  # if / if-else
            self.budget -= 1
            lines = [f"{pad}if ({self.cond()}) {{"]
            lines += self.block(depth + 1, in_loop)
            if rng.random() < 0.5 and self.budget > 0:
                lines += [f"{pad}}} else {{"]
                lines += self.block(depth + 1, in_loop)
            lines += [f"{pad}}}"]
            return lines
        if roll < 0.7:  # while
            self.budget -= 1
            lines = [f"{pad}while ({self.cond()}) {{"]
            lines += self.block(depth + 1, True)
            lines += [f"{pad}}}"]
            return lines
        if roll < 0.78:  # for
            self.budget -= 1
            var = rng.choice(self.vars)
            lines = [f"{pad}for ({var} = 0; {var} < {rng.randint(2, 6)}; {var}++) {{"]
            lines += self.block(depth + 1, True)
            lines += [f"{pad}}}"]
            return lines
        if roll < 0.84:  # do-while
            self.budget -= 1
            lines = [f"{pad}do {{"]
            lines += self.block(depth + 1, True)
            lines += [f"{pad}}} while ({self.cond()});"]
            return lines
        if roll < 0.91 and self.budget >= 6:  # switch: head + 2 cases + bodies
            self.budget -= 1
            var = rng.choice(self.vars)
            lines = [f"{pad}switch ({var}) {{", f"{pad}case 0:"]
            self.budget -= 1
            lines += [self.simple(depth + 1)]
            self.budget -= 1
            if rng.random() < 0.6:
                lines += [f"{pad}    break;"]
                self.budget -= 1
            lines += [f"{pad}default:"]
            self.budget -= 1
            lines += [self.simple(depth + 1)]
            self.budget -= 1
            lines += [f"{pad}}}"]
            return lines
        if roll < 0.96 and self.budget >= 4:  # try/catch
            self.budget -= 2  # try marker + handler clause
            lines = [f"{pad}try {{"]
            lines += [self.simple(depth + 1)]
            self.budget -= 1
            lines += [f"{pad}}} catch (int err) {{"]
            lines += [self.simple(depth + 1)]
            self.budget -= 1
            lines += [f"{pad}}}"]
            return lines
        self.budget -= 1
        return [self.simple(depth)]


def random_function_source(seed: int, max_nodes: int = 12) -> str:
    return ProgramGenerator(seed, max_nodes).function()


# --- reference decision tree ----------------------------------------------------


class SlowCart:
    """Independent reference CART: pure-Python exhaustive split search with the
    same weighted-Gini comparison and tie rules (lowest feature, then lowest
    threshold) as the production tree, but none of its code."""

    def __init__(self, max_depth=12, min_leaf=1):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.root = None

    def fit(self, x, y):
        rows = [(tuple(float(v) for v in row), int(label)) for row, label in zip(x, y)]
        self.root = self._grow(rows, 0)
        return self

    def _grow(self, rows, depth):
        n = len(rows)
        pos = sum(label for _, label in rows)
        node = {"value": pos / n}
        if pos in (0, n) or depth >= self.max_depth or n < 2 * self.min_leaf:
            return node
        n_features = len(rows[0][0])
        best = None
        for j in range(n_features):
            values = sorted({row[j] for row, _ in rows})
            for a, b in zip(values, values[1:]):
                thr = (a + b) / 2.0
                left = [(r, l) for r, l in rows if r[j] <= thr]
                right = [(r, l) for r, l in rows if r[j] > thr]
                if len(left) < self.min_leaf or len(right) < self.min_leaf:
                    continue
                pos_l = sum(l for _, l in left)
                pos_r = sum(l for _, l in right)
                quality = (pos_l * (len(left) - pos_l) * len(right)
                           + pos_r * (len(right) - pos_r) * len(left)) \
                    / (len(left) * len(right))
                if best is None or quality < best[0]:
                    best = (quality, j, thr, left, right)
        if best is None:
            return node
        _, j, thr, left, right = best
        node.update({"feature": j, "threshold": thr,
                     "left": self._grow(left, depth + 1),
                     "right": self._grow(right, depth + 1)})
        return node

    def score_one(self, row):
        node = self.root
        while "feature" in node:
            node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        return node["value"]

    def predict_scores(self, x):
        return [self.score_one(tuple(float(v) for v in row)) for row in x]
