"""The 27-feature vector computed for every commit line.

Three groups: nine features describing the line itself, five describing how
the commit's lines relate to each other, and thirteen describing how the line
sits in the surrounding code (enclosing blocks, dependence in/out degree,
post-dominance counts).

Deleted lines are measured against the pre-patch snapshot, added lines against
the post-patch snapshot. Lines carrying no code (blank, comment-only,
brace-only) receive the all-zero vector so the line<->vector mapping stays 1:1.
"""

from __future__ import annotations

import json
import weakref
from collections import Counter, defaultdict
from dataclasses import dataclass, fields

from .analysis.cfg import ENTRY
from .analysis.model import FunctionModel, SourceUnit
from .diffs import CommitLine, CommitRecord
from .errors import LinesiftError
from .lang import astnodes as ast

SCHEMA_VERSION = 1

COMMIT_LINE_FEATURES = (
    "assignment", "comparator", "arithmetic", "logical", "flagVar",
    "hasLiteral", "isLocal", "hasRet", "funcCall",
)
WITHIN_COMMIT_FEATURES = (
    "controlDepend", "depends", "repeated", "repeatedCall", "repeatedControl",
)
COMMIT_CONTEXT_FEATURES = (
    "controlBlock", "doBlock", "ifBlock", "elseBlock", "switchBlock",
    "tryBlock", "forBlock", "whileBlock", "dependedBy", "controlledBy",
    "reachableOutside", "postDominatedBy", "postDominates",
)
FEATURE_NAMES = COMMIT_LINE_FEATURES + WITHIN_COMMIT_FEATURES + COMMIT_CONTEXT_FEATURES

_COMPARATORS = {"==", "!=", "<", "<=", ">", ">="}
_ARITHMETIC = {"+", "-", "*", "/", "%"}
_LOGICAL = {"&&", "||"}


@dataclass(frozen=True)
class FeatureVector:
    assignment: int = 0
    comparator: int = 0
    arithmetic: int = 0
    logical: int = 0
    flagVar: int = 0
    hasLiteral: int = 0
    isLocal: int = 0
    hasRet: int = 0
    funcCall: int = 0
    controlDepend: int = 0
    depends: int = 0
    repeated: int = 0
    repeatedCall: int = 0
    repeatedControl: int = 0
    controlBlock: int = 0
    doBlock: int = 0
    ifBlock: int = 0
    elseBlock: int = 0
    switchBlock: int = 0
    tryBlock: int = 0
    forBlock: int = 0
    whileBlock: int = 0
    dependedBy: int = 0
    controlledBy: int = 0
    reachableOutside: int = 0
    postDominatedBy: int = 0
    postDominates: int = 0

    def to_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in FEATURE_NAMES}

    def to_row(self) -> list[int]:
        return [getattr(self, name) for name in FEATURE_NAMES]


assert tuple(f.name for f in fields(FeatureVector)) == FEATURE_NAMES


# --- per-snapshot syntactic fact index ---------------------------------------


class UnitFacts:
    """Per-line syntactic facts for one snapshot, computed in a single AST walk."""

    def __init__(self, unit: SourceUnit):
        self.unit = unit
        self.assignment_lines: set[int] = set()
        self.flagvar_lines: set[int] = set()
        self.strlit_lines: set[int] = set()
        self.islocal_lines: set[int] = set()
        self.ret_lines: set[int] = set()
        self.call_lines: set[int] = set()
        self.comparator: Counter[int] = Counter()
        self.arithmetic: Counter[int] = Counter()
        self.logical: Counter[int] = Counter()
        self.callees: dict[int, set[str]] = defaultdict(set)
        self.control_open: dict[int, set[str]] = defaultdict(set)
        self.code_lines: set[int] = set()
        for fn in unit.functions:
            for stmt in ast.iter_all_stmts(fn.body):
                self._visit_stmt(stmt, fn.locals_)
        for decl in unit.globals_:
            self._visit_stmt(decl, {})

    def _resolve_type(self, name: str, locals_: dict[str, str]) -> str | None:
        if name in locals_:
            return locals_[name]
        return self.unit.global_names.get(name)

    def _visit_stmt(self, stmt: ast.Stmt, locals_: dict[str, str]):
        self.code_lines.update(stmt.header_lines)
        if isinstance(stmt, ast.Return):
            self.ret_lines.update(stmt.header_lines)
        if isinstance(stmt, ast.VarDecl):
            if stmt.init is not None:
                self.assignment_lines.add(stmt.name_line)
                if (stmt.var_type == "bool" and isinstance(stmt.init, ast.Literal)
                        and stmt.init.kind == "bool"):
                    self.flagvar_lines.add(stmt.name_line)
            if locals_:
                self.islocal_lines.add(stmt.name_line)
        if isinstance(stmt, ast.CatchClause) and stmt.param_name and stmt.header_lines:
            self.islocal_lines.add(stmt.header_lines[0])
        opener = _control_keyword(stmt)
        if opener is not None and stmt.header_lines:
            self.control_open[stmt.header_lines[0]].add(opener)
        for expr in ast.stmt_exprs(stmt):
            self._visit_expr(expr, locals_)

    def _visit_expr(self, expr: ast.Expr, locals_: dict[str, str]):
        for node in ast.walk_expr(expr):
            if isinstance(node, ast.Binary):
                if node.op in _COMPARATORS:
                    self.comparator[node.line] += 1
                elif node.op in _ARITHMETIC:
                    self.arithmetic[node.line] += 1
                elif node.op in _LOGICAL:
                    self.logical[node.line] += 1
            elif isinstance(node, ast.Unary):
                if node.op == "!":
                    self.logical[node.line] += 1
            elif isinstance(node, ast.IncDec):
                self.arithmetic[node.line] += 1
            elif isinstance(node, ast.Assign):
                self.assignment_lines.add(node.line)
                if (node.op == "=" and isinstance(node.value, ast.Literal)
                        and node.value.kind == "bool"
                        and self._resolve_type(node.target.name, locals_) == "bool"):
                    self.flagvar_lines.add(node.line)
            elif isinstance(node, ast.Literal):
                if node.kind == "string":
                    self.strlit_lines.add(node.line)
            elif isinstance(node, ast.Identifier):
                if node.name in locals_:
                    self.islocal_lines.add(node.line)
            elif isinstance(node, ast.Call):
                self.call_lines.add(node.line)
                self.callees[node.line].add(node.callee)


def _control_keyword(stmt: ast.Stmt) -> str | None:
    if isinstance(stmt, ast.If):
        return "if"
    if isinstance(stmt, ast.For):
        return "for"
    if isinstance(stmt, ast.While):
        return "while"
    if isinstance(stmt, ast.DoWhile):
        return "do"
    if isinstance(stmt, ast.Switch):
        return "switch"
    if isinstance(stmt, ast.TryCatch):
        return "try"
    return None


_facts_cache: "weakref.WeakKeyDictionary[SourceUnit, UnitFacts]" = weakref.WeakKeyDictionary()


def unit_facts(unit: SourceUnit) -> UnitFacts:
    facts = _facts_cache.get(unit)
    if facts is None:
        facts = UnitFacts(unit)
        _facts_cache[unit] = facts
    return facts


def line_has_code(unit: SourceUnit, line_no: int) -> bool:
    return line_no in unit_facts(unit).code_lines


# --- feature group 1: the line itself ----------------------------------------


def extract_line_features(line: CommitLine, unit: SourceUnit) -> dict[str, int]:
    """The nine per-line features, all zero when the line carries no code."""
    facts = unit_facts(unit)
    ln = line.line_no
    if ln not in facts.code_lines:
        return {name: 0 for name in COMMIT_LINE_FEATURES}
    return {
        "assignment": int(ln in facts.assignment_lines),
        "comparator": facts.comparator.get(ln, 0),
        "arithmetic": facts.arithmetic.get(ln, 0),
        "logical": facts.logical.get(ln, 0),
        "flagVar": int(ln in facts.flagvar_lines),
        "hasLiteral": int(ln in facts.strlit_lines),
        "isLocal": int(ln in facts.islocal_lines),
        "hasRet": int(ln in facts.ret_lines),
        "funcCall": int(ln in facts.call_lines),
    }


# --- feature group 3: surrounding code ---------------------------------------


def _block_flags(stmt: ast.Stmt) -> set[str]:
    flags: set[str] = set()
    cur = stmt
    while cur.parent is not None:
        parent = cur.parent
        slot = cur.parent_slot
        if isinstance(parent, ast.If):
            flags.add("ifBlock" if slot == "then" else "elseBlock")
        elif isinstance(parent, ast.While):
            flags.add("whileBlock")
        elif isinstance(parent, ast.DoWhile):
            flags.add("doBlock")
        elif isinstance(parent, ast.For):
            flags.add("forBlock")
        elif isinstance(parent, (ast.Switch, ast.Case)):
            flags.add("switchBlock")
        elif isinstance(parent, (ast.TryCatch, ast.CatchClause)):
            flags.add("tryBlock")
        cur = parent
    return flags


def extract_context_features(line: CommitLine, unit: SourceUnit,
                             commit_line_nos: set[int] | None = None) -> dict[str, int]:
    """The thirteen context features; all zero outside functions.

    `commit_line_nos` is the set of commit-line numbers for this (file, side);
    it is only needed for reachableOutside and defaults to just this line.
    """
    out = {name: 0 for name in COMMIT_CONTEXT_FEATURES}
    fn = unit.function_at_line(line.line_no)
    if fn is None:
        return out
    nodes = fn.nodes_at_line(line.line_no)
    if not nodes:
        return out
    if commit_line_nos is None:
        commit_line_nos = {line.line_no}
    ln = line.line_no

    flags: set[str] = set()
    for n in nodes:
        flags |= _block_flags(fn.cfg.stmt_of[n])
    for flag in flags:
        out[flag] = 1
    if flags:
        out["controlBlock"] = 1

    depended, controllers, pdom_by, pdom_of = set(), set(), set(), set()
    reachable_outside = False
    for n in nodes:
        for (d, u, _var) in fn.ddg:
            if d == n and u != n:
                u_line = fn.node_line(u)
                if u_line is not None and u_line != ln:
                    depended.add(u_line)
                    if u_line not in commit_line_nos:
                        reachable_outside = True
            if u == n and d != n:
                d_line = fn.node_line(d)
                if d_line is not None and d_line != ln and d_line not in commit_line_nos:
                    reachable_outside = True
        for (c, y) in fn.cdg:
            if y == n and c >= 2:
                c_line = fn.node_line(c)
                if c_line is not None and c_line != ln:
                    controllers.add(c_line)
        for m in fn.postdom.pdom[n]:
            if m != n and m >= 2:
                m_line = fn.node_line(m)
                if m_line is not None and m_line != ln:
                    pdom_by.add(m_line)
        for m in fn.cfg.nodes:
            if m >= 2 and m != n and n in fn.postdom.pdom[m]:
                m_line = fn.node_line(m)
                if m_line is not None and m_line != ln:
                    pdom_of.add(m_line)

    out["dependedBy"] = len(depended)
    out["controlledBy"] = len(controllers)
    out["reachableOutside"] = int(reachable_outside)
    out["postDominatedBy"] = len(pdom_by)
    out["postDominates"] = len(pdom_of)
    return out


# --- feature group 2: within the commit ---------------------------------------


def _normalize(text: str) -> str:
    return " ".join(text.split())


def extract_intra_commit_features(
    line: CommitLine,
    all_lines: list[CommitLine],
    units: dict[tuple[str, str], SourceUnit | None],
) -> dict[str, int]:
    """The five within-the-commit features for one line.

    repeated/repeatedCall/repeatedControl compare against every other commit
    line of any file or side; the dependence-based pair is same-file same-side
    because dependence graphs are per function.
    """
    out = {name: 0 for name in WITHIN_COMMIT_FEATURES}
    unit = units.get((line.path, line.side))
    if unit is None or not line_has_code(unit, line.line_no):
        return out
    facts = unit_facts(unit)
    others = [o for o in all_lines if o is not line and not (
        o.path == line.path and o.side == line.side and o.line_no == line.line_no)]

    norm = _normalize(line.text)
    my_callees = facts.callees.get(line.line_no, set())
    my_controls = facts.control_open.get(line.line_no, set())
    repeated = repeated_call = repeated_control = 0
    for other in others:
        if norm and _normalize(other.text) == norm:
            repeated += 1
        other_unit = units.get((other.path, other.side))
        if other_unit is not None:
            other_facts = unit_facts(other_unit)
            if my_callees and my_callees & other_facts.callees.get(other.line_no, set()):
                repeated_call += 1
            if my_controls and my_controls & other_facts.control_open.get(other.line_no, set()):
                repeated_control += 1
    out["repeated"] = repeated
    out["repeatedCall"] = repeated_call
    out["repeatedControl"] = repeated_control

    fn = unit.function_at_line(line.line_no)
    nodes = fn.nodes_at_line(line.line_no) if fn is not None else set()
    if fn is not None and nodes:
        same_side_nos = {o.line_no for o in others
                         if o.path == line.path and o.side == line.side}
        for n in nodes:
            for (c, y) in fn.cdg:
                if y == n and c >= 2:
                    ctrl = fn.cfg.stmt_of[c]
                    if any(l in same_side_nos for l in ctrl.header_lines if l != line.line_no):
                        out["controlDepend"] = 1
            for (d, u, _var) in fn.ddg:
                if u == n and d != n:
                    if d == ENTRY:
                        d_lines = (fn.signature_line,)
                    elif d >= 2:
                        d_lines = fn.cfg.stmt_of[d].header_lines
                    else:
                        continue
                    if any(l in same_side_nos for l in d_lines if l != line.line_no):
                        out["depends"] = 1
    return out


# --- whole-commit featurization -----------------------------------------------


@dataclass
class FeaturizedLine:
    line: CommitLine
    vector: FeatureVector
    function: str | None  # enclosing function name, if any


@dataclass
class FeaturizeResult:
    rows: list[FeaturizedLine]
    warnings: list[dict]

    def export_jsonl(self, labels: dict[str, int] | None = None) -> str:
        chunks = []
        for row in self.rows:
            rec = {"id": row.line.id, "schema_version": SCHEMA_VERSION,
                   "features": row.vector.to_dict()}
            if labels is not None and row.line.id in labels:
                rec["label"] = labels[row.line.id]
            chunks.append(json.dumps(rec, ensure_ascii=False))
        return "".join(c + "\n" for c in chunks)

    def export_funcmap_jsonl(self) -> str:
        chunks = []
        for row in self.rows:
            chunks.append(json.dumps({
                "id": row.line.id,
                "commit_id": row.line.commit_id,
                "path": row.line.path,
                "side": row.line.side,
                "function": row.function,
            }, ensure_ascii=False))
        return "".join(c + "\n" for c in chunks)


def build_units(record: CommitRecord,
                parse_fn) -> tuple[dict[tuple[str, str], SourceUnit | None], list[dict]]:
    """Parse every snapshot of the commit; failures become warning records."""
    units: dict[tuple[str, str], SourceUnit | None] = {}
    warnings: list[dict] = []
    for pair in record.files:
        for side, text in (("pre", pair.pre_text), ("post", pair.post_text)):
            if text is None:
                continue
            try:
                units[(pair.path, side)] = parse_fn(text, pair.path)
            except LinesiftError as exc:
                units[(pair.path, side)] = None
                warnings.append({
                    "commit_id": record.commit_id,
                    "path": pair.path,
                    "side": side,
                    "error": str(exc),
                })
    return units, warnings


def featurize_commit(record: CommitRecord, commit_lines: list[CommitLine],
                     units: dict[tuple[str, str], SourceUnit | None],
                     warnings: list[dict] | None = None) -> FeaturizeResult:
    """One vector per commit line whose file parsed; deterministic order.

    Lines in unparsable files are dropped and reported via the warnings list.
    """
    rows: list[FeaturizedLine] = []
    commit_nos_by_file: dict[tuple[str, str], set[int]] = defaultdict(set)
    for cl in commit_lines:
        commit_nos_by_file[(cl.path, cl.side)].add(cl.line_no)
    for cl in commit_lines:
        unit = units.get((cl.path, cl.side))
        if unit is None:
            continue
        values: dict[str, int] = {}
        if not line_has_code(unit, cl.line_no):
            vector = FeatureVector()
            fn = unit.function_at_line(cl.line_no)
        else:
            values.update(extract_line_features(cl, unit))
            values.update(extract_intra_commit_features(cl, commit_lines, units))
            values.update(extract_context_features(
                cl, unit, commit_nos_by_file[(cl.path, cl.side)]))
            vector = FeatureVector(**values)
            fn = unit.function_at_line(cl.line_no)
        rows.append(FeaturizedLine(line=cl, vector=vector, function=fn.name if fn else None))
    return FeaturizeResult(rows=rows, warnings=list(warnings or []))


def read_features_jsonl(text: str) -> list[dict]:
    """Parse a features export; validates schema version and field order."""
    out = []
    for i, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        rec = json.loads(raw)
        if rec.get("schema_version") != SCHEMA_VERSION:
            raise LinesiftError(f"unsupported feature schema on line {i}: "
                                f"{rec.get('schema_version')!r}")
        feats = rec.get("features", {})
        if tuple(feats.keys()) != FEATURE_NAMES:
            raise LinesiftError(f"feature fields out of order on line {i}")
        out.append(rec)
    return out
