"""Synthetic commit corpus with known line labels.

Commits are assembled from edit templates over small generated C-like files:
fix templates (guard insertions, bound clamps, error returns, flag resets)
whose lines are labeled relevant, and refactor/enhancement/formatting
templates whose lines are labeled irrelevant. Tangled commits mix both kinds,
mirroring how real patches interleave fixes with cleanup.

Generation is fully seeded: the same (seed, size) reproduce byte-identical
commit directories and labels.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .diffs import make_line_id


@dataclass
class Edit:
    """Replace `deleted` (starting at 1-based pre line `pre_start`) with `added`.

    A pure insertion has deleted == [] and inserts before `pre_start`.
    Every line of the edit carries `label`.
    """
    pre_start: int
    deleted: list[str]
    added: list[str]
    label: int

    @property
    def pre_end(self) -> int:  # last deleted pre line; pre_start-1 for inserts
        return self.pre_start + len(self.deleted) - 1


def apply_edits(pre_lines: list[str], edits: list[Edit]):
    """(post_lines, labels) where labels maps (side, line_no) -> label."""
    edits = sorted(edits, key=lambda e: (e.pre_start, e.pre_end))
    for a, b in zip(edits, edits[1:]):
        if b.pre_start <= a.pre_end:
            raise ValueError("overlapping edits")
    post: list[str] = []
    labels: dict[tuple[str, int], int] = {}
    cursor = 1
    for edit in edits:
        while cursor < edit.pre_start:
            post.append(pre_lines[cursor - 1])
            cursor += 1
        for k, text in enumerate(edit.deleted):
            if pre_lines[edit.pre_start - 1 + k] != text:
                raise ValueError(f"edit text mismatch at pre line {edit.pre_start + k}")
            labels[("pre", edit.pre_start + k)] = edit.label
        cursor += len(edit.deleted)
        for text in edit.added:
            post.append(text)
            labels[("post", len(post))] = edit.label
    post.extend(pre_lines[cursor - 1:])
    return post, labels


def build_unified_diff(path: str, pre_lines: list[str], edits: list[Edit],
                       context: int = 3) -> str:
    """Unified diff for the edit script, hunks merged when context overlaps."""
    edits = sorted(edits, key=lambda e: (e.pre_start, e.pre_end))
    if not edits:
        return ""
    groups: list[list[Edit]] = [[edits[0]]]
    for edit in edits[1:]:
        if edit.pre_start - groups[-1][-1].pre_end <= 2 * context:
            groups[-1].append(edit)
        else:
            groups.append([edit])

    out = [f"--- a/{path}", f"+++ b/{path}"]
    delta = 0  # post - pre line offset before the current group
    for group in groups:
        first, last = group[0], group[-1]
        lo = max(1, first.pre_start - context)  # first pre line in hunk
        hi = min(len(pre_lines), last.pre_end + context)  # last pre line
        body: list[str] = []
        pre_count = post_count = 0
        cursor = lo
        for edit in group:
            while cursor < edit.pre_start:
                body.append(" " + pre_lines[cursor - 1])
                pre_count += 1
                post_count += 1
                cursor += 1
            for text in edit.deleted:
                body.append("-" + text)
                pre_count += 1
            cursor += len(edit.deleted)
            for text in edit.added:
                body.append("+" + text)
                post_count += 1
        while cursor <= hi:
            body.append(" " + pre_lines[cursor - 1])
            pre_count += 1
            post_count += 1
            cursor += 1
        post_lo = lo + delta
        out.append(f"@@ -{lo},{pre_count} +{post_lo},{post_count} @@")
        out.extend(body)
        delta += sum(len(e.added) - len(e.deleted) for e in group)
    return "\n".join(out) + "\n"


# --- function shapes -----------------------------------------------------------

_WORDS = ["count", "total", "value", "size", "index", "limit", "scale", "offset",
          "width", "depth", "rate", "span", "chunk", "score", "queue", "level"]
_VERBS = ["probe", "fetch", "weigh", "merge", "rank", "fold", "trim", "emit",
          "clamp", "settle", "gather", "shift"]


class _Names:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set()

    def var(self) -> str:
        while True:
            name = self.rng.choice(_WORDS) + self.rng.choice(["", "_a", "_b", "_c"])
            if name not in self.used:
                self.used.add(name)
                return name

    def fn(self) -> str:
        while True:
            name = self.rng.choice(_VERBS) + "_" + self.rng.choice(_WORDS)
            if name not in self.used:
                self.used.add(name)
                return name


@dataclass
class FunctionBlock:
    lines: list[str]
    info: dict = field(default_factory=dict)
    start: int = 0  # 1-based line of the signature within the file

    def abs_line(self, rel: int) -> int:
        return self.start + rel


def _shape_scaler(names: _Names, rng: random.Random) -> FunctionBlock:
    f, v, c, t, m = names.fn(), names.var(), names.var(), names.var(), names.var()
    k = rng.randint(2, 9)
    lines = [
        f"int {f}(int {v}, int {c}) {{",
        f"    int {t} = {v} * {k};",
        f"    int {m} = {t} / {c};",
        f"    return {m};",
        "}",
    ]
    return FunctionBlock(lines, {"shape": "scaler", "divisor": c, "value": v,
                                 "div_rel": 2, "mul_rel": 1, "ret_rel": 3,
                                 "callees": []})


def _shape_accumulator(names: _Names, rng: random.Random) -> FunctionBlock:
    f, n, acc, i = names.fn(), names.var(), names.var(), names.var()
    helper = names.fn()
    lines = [
        f"int {f}(int {n}) {{",
        f"    int {acc} = 0;",
        f"    int {i} = 0;",
        f"    while ({i} < {n}) {{",
        f"        {acc} = {acc} + {helper}({i});",
        f"        {i} = {i} + 1;",
        "    }",
        f"    return {acc};",
        "}",
    ]
    return FunctionBlock(lines, {"shape": "accumulator", "bound": n, "acc": acc,
                                 "counter": i, "loop_rel": 3, "body_rel": 4,
                                 "init_rel": 1, "helper": helper, "callees": [helper]})


def _shape_dispatch(names: _Names, rng: random.Random) -> FunctionBlock:
    f, mode, x, r = names.fn(), names.var(), names.var(), names.var()
    k1, k2 = rng.randint(1, 9), rng.randint(1, 9)
    lines = [
        f"int {f}(int {mode}, int {x}) {{",
        f"    int {r} = 0;",
        f"    if ({mode} == 1) {{",
        f"        {r} = {x} + {k1};",
        "    } else {",
        f"        {r} = {x} - {k2};",
        "    }",
        f"    return {r};",
        "}",
    ]
    return FunctionBlock(lines, {"shape": "dispatch", "mode": mode, "x": x, "r": r,
                                 "then_rel": 3, "ret_rel": 7, "callees": []})


def _shape_walker(names: _Names, rng: random.Random) -> FunctionBlock:
    f, ln, total, i = names.fn(), names.var(), names.var(), names.var()
    helper = names.fn()
    lines = [
        f"int {f}(int {ln}) {{",
        f"    int {total} = 0;",
        f"    for (int {i} = 0; {i} < {ln}; {i}++) {{",
        f"        {total} += {helper}({i});",
        "    }",
        f"    return {total};",
        "}",
    ]
    return FunctionBlock(lines, {"shape": "walker", "bound": ln, "total": total,
                                 "for_rel": 2, "body_rel": 3, "helper": helper,
                                 "callees": [helper]})


_SHAPES = [_shape_scaler, _shape_accumulator, _shape_dispatch, _shape_walker]


# --- edit templates --------------------------------------------------------------

_GUARD_CONDS = ["{v} == 0", "{v} < 0", "{v} <= 0", "{v} != 0", "{v} > {cap}",
                "{v} >= {cap}", "{v} < 0 || {v} > {cap}"]
_GUARD_ACTIONS = ["return 0;", "return -1;", "return {cap};", "{v} = {cap};", "{v} = 1;"]


def _insert_spot(fn: FunctionBlock, rng: random.Random,
                 allow_loop_body: bool = True) -> tuple[int, str]:
    """(relative line, indentation) of a random legal insertion point: function
    top, before the return, or inside a loop body. Varies the context features
    (enclosing block, dominance counts) across instances of one template."""
    spots = [(1, "    "), (len(fn.lines) - 2, "    ")]  # top / before the return
    body_rel = fn.info.get("body_rel")
    if allow_loop_body and body_rel and fn.info["shape"] in ("accumulator", "walker"):
        spots.append((body_rel + 1, "        "))
    return rng.choice(spots)


def _guard_lines(v: str, rng: random.Random, pad: str) -> list[str]:
    """A randomized guard: condition and action forms vary widely so few-shot
    models cannot memorize a single vector per template."""
    cap = rng.randint(4, 96)
    cond = rng.choice(_GUARD_CONDS).format(v=v, cap=cap)
    action = rng.choice(_GUARD_ACTIONS).format(v=v, cap=cap)
    if rng.random() < 0.7:
        return [f"{pad}if ({cond}) {action}"]
    return [f"{pad}if ({cond})", f"{pad}    {action}"]


def _fix_guard(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Zero/negative/range check inserted before a risky line; the canonical fix."""
    info = fn.info
    spots = [1]
    if info["shape"] == "scaler":
        spots = [info["div_rel"], info["mul_rel"]]
        guard_var = info["divisor"]
    elif info["shape"] in ("accumulator", "walker"):
        spots = [info.get("loop_rel") or info.get("for_rel"),
                 (info.get("body_rel") or 0) + 1]
        guard_var = info["bound"]
    else:
        spots = [info["then_rel"], 1]
        guard_var = info.get("mode") or info.get("x")
    target_rel = rng.choice([s for s in spots if s])
    depth = 2 if (info["shape"] in ("accumulator", "walker")
                  and target_rel == (info.get("body_rel") or 0) + 1) else 1
    pad = "    " * depth
    return [Edit(fn.abs_line(target_rel), [], _guard_lines(guard_var, rng, pad), label=1)]


def _fix_bound(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Clamp an input that can overrun."""
    var = fn.info.get("bound") or fn.info.get("value") or fn.info.get("x")
    cap = rng.randint(16, 64)
    rel, pad = _insert_spot(fn, rng)
    op = rng.choice([">", ">="])
    action = rng.choice([f"{var} = {cap};", f"{var} = {cap} - 1;"])
    if rng.random() < 0.65:
        added = [f"{pad}if ({var} {op} {cap}) {action}"]
    else:
        added = [f"{pad}if ({var} {op} {cap})",
                 f"{pad}    {action}"]
    return [Edit(fn.abs_line(rel), [], added, label=1)]


def _fix_log(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Error return with a message on bad input."""
    var = fn.info.get("bound") or fn.info.get("divisor") or fn.info.get("mode")
    msg = rng.choice(["bad input", "range error", "invalid state", "underflow"])
    sink = rng.choice(["fail", "report_error", "reject"])
    cond = rng.choice([f"{var} < 0", f"{var} == 0", f"{var} < 1"])
    rel, pad = _insert_spot(fn, rng)
    if rng.random() < 0.5:
        added = [f'{pad}if ({cond}) return {sink}("{msg}");']
    else:
        added = [f"{pad}if ({cond})",
                 f'{pad}    return {sink}("{msg}");']
    return [Edit(fn.abs_line(rel), [], added, label=1)]


def _fix_flag(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Reset a state flag when a limit trips; the rare, hard fix shape."""
    flag = names.var()
    limit = rng.randint(8, 32)
    watched = fn.info.get("acc") or fn.info.get("total") or fn.info.get("r")
    if watched is None:
        return _fix_guard(fn, names, rng)
    body_rel = fn.info.get("body_rel", 1)
    pad = "        " if fn.info["shape"] in ("accumulator", "walker") else "    "
    edits = [
        Edit(fn.abs_line(1), [], [f"    bool {flag} = true;"], label=1),
        Edit(fn.abs_line(body_rel) + 1, [],
             [f"{pad}if ({watched} > {limit})",
              f"{pad}    {flag} = false;"], label=1),
    ]
    return edits


def _fix_offbyone(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Loosen or tighten a loop bound: a one-line-pair fix that resembles a
    rename pair everywhere except in its dependence pattern."""
    rel = fn.info.get("loop_rel") or fn.info.get("for_rel")
    if rel is None:
        return _fix_guard(fn, names, rng)
    old = fn.lines[rel]
    if " < " not in old:
        return _fix_guard(fn, names, rng)
    new = old.replace(" < ", " <= ", 1)
    return [Edit(fn.abs_line(rel), [old], [new], label=1)]


def _refactor_rename_var(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Rename a local; touches every line mentioning it."""
    candidates = [v for v in (fn.info.get("acc"), fn.info.get("total"),
                              fn.info.get("r"), fn.info.get("value")) if v]
    if fn.info.get("counter") and rng.random() < 0.35:
        candidates.append(fn.info["counter"])
    if not candidates:
        return []
    old = rng.choice(candidates)
    new = old + "_" + rng.choice(["val", "cur", "tmp", "raw"])
    edits = []
    for rel, text in enumerate(fn.lines):
        if old in text:
            replaced = text.replace(old, new)
            edits.append(Edit(fn.abs_line(rel), [text], [replaced], label=0))
    return edits


def _refactor_rename_call(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Rename the helper a function calls (call sites only)."""
    helper = fn.info.get("helper")
    if not helper:
        return []
    new = helper + "_v2"
    edits = []
    for rel, text in enumerate(fn.lines):
        if helper + "(" in text:
            edits.append(Edit(fn.abs_line(rel), [text], [text.replace(helper, new)], label=0))
    return edits


def _refactor_format(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Whitespace-only churn: re-indent a run of body lines."""
    rels = [rel for rel, text in enumerate(fn.lines)
            if text.strip() and not text.strip().startswith("}") and rel > 0]
    if not rels:
        return []
    start = rng.choice(rels[:max(1, len(rels) - 1)])
    run = [rel for rel in range(start, min(start + rng.randint(2, 4), len(fn.lines)))
           if rel in rels]
    edits = []
    for rel in run:
        text = fn.lines[rel]
        edits.append(Edit(fn.abs_line(rel), [text], ["  " + text], label=0))
    return edits


def _refactor_enhance(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Feature work: a new accumulation, bare or behind a mode guard; hard
    negative."""
    target = fn.info.get("acc") or fn.info.get("total") or fn.info.get("r")
    source = fn.info.get("bound") or fn.info.get("value") or fn.info.get("x")
    if target is None or source is None:
        return []
    bonus = names.fn()
    rel = len(fn.lines) - 2  # before the return
    stmt = f"{target} = {target} + {bonus}({source});"
    roll = rng.random()
    if roll < 0.5:
        added = [f"    {stmt}"]
    elif roll < 0.8:
        added = [f"    if ({source} > {rng.randint(1, 8)})",
                 f"        {stmt}"]
    else:
        added = [f"    if ({source} != 0) {stmt}"]
    return [Edit(fn.abs_line(rel), [], added, label=0)]


def _refactor_toggle(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Introduce a config flag, sometimes flipped later; flag churn that is not
    a fix, so boolean assignments alone cannot separate the classes."""
    flag = names.var()
    init = rng.choice(["true", "false"])
    edits = [Edit(fn.abs_line(1), [], [f"    bool {flag} = {init};"], label=0)]
    if rng.random() < 0.5:
        rel = len(fn.lines) - 2
        flips = "false" if init == "true" else "true"
        edits.append(Edit(fn.abs_line(rel), [], [f"    {flag} = {flips};"], label=0))
    return edits


def _refactor_trace(fn: FunctionBlock, names: _Names, rng: random.Random) -> list[Edit]:
    """Diagnostics: a trace call, bare or behind a guard. Shaped like an
    error-report fix but control continues; the hardest negative."""
    var = (fn.info.get("bound") or fn.info.get("divisor") or fn.info.get("mode")
           or fn.info.get("value"))
    if var is None:
        return []
    word = rng.choice(["enter", "tick", "step", "loop", "state"])
    sink = rng.choice(["emit_trace", "note_event", "mark_path"])
    rel, pad = _insert_spot(fn, rng, allow_loop_body=False)
    roll = rng.random()
    if roll < 0.4:
        added = [f'{pad}{sink}("{word}");']
    elif roll < 0.75:
        added = [f'{pad}if ({var} > 0) {sink}("{word}");']
    else:
        added = [f"{pad}if ({var} > 0)",
                 f'{pad}    {sink}("{word}");']
    return [Edit(fn.abs_line(rel), [], added, label=0)]


def _refactor_extract(fn: FunctionBlock, names: _Names, rng: random.Random,
                      file_end: int) -> list[Edit]:
    """Move a scaler's computation into a new helper appended to the file."""
    if fn.info["shape"] != "scaler":
        return []
    g = names.fn()
    v, c = fn.info["value"], fn.info["divisor"]
    body = fn.lines[1:4]
    edits = [Edit(fn.abs_line(1), list(body), [f"    return {g}({v}, {c});"], label=0)]
    new_fn = ["", f"int {g}(int {v}, int {c}) {{"] + body + ["}"]
    edits.append(Edit(file_end + 1, [], new_fn, label=0))
    return edits


FIX_TEMPLATES = [("fix-guard", _fix_guard, 0.22), ("fix-bound", _fix_bound, 0.22),
                 ("fix-log", _fix_log, 0.18), ("fix-flag", _fix_flag, 0.14),
                 ("fix-offbyone", _fix_offbyone, 0.24)]
REFACTOR_TEMPLATES = [("ren-var", _refactor_rename_var, 0.23),
                      ("ren-call", _refactor_rename_call, 0.12),
                      ("format", _refactor_format, 0.22),
                      ("enhance", _refactor_enhance, 0.15),
                      ("trace", _refactor_trace, 0.19),
                      ("extract", None, 0.09)]


def _pick(rng: random.Random, weighted):
    total = sum(w for _, _, w in weighted)
    roll = rng.random() * total
    for name, builder, w in weighted:
        roll -= w
        if roll <= 0:
            return name, builder
    return weighted[-1][0], weighted[-1][1]


def _build_file(names: _Names, rng: random.Random, n_functions: int):
    blocks: list[FunctionBlock] = []
    lines: list[str] = []
    for k in range(n_functions):
        shape = rng.choice(_SHAPES)
        block = shape(names, rng)
        block.start = len(lines) + 1
        blocks.append(block)
        lines.extend(block.lines)
        if k != n_functions - 1:
            lines.append("")
    return blocks, lines


def _apply_refactor(name, block, names, rng, file_end):
    if name == "extract":
        return _refactor_extract(block, names, rng, file_end=file_end)
    builder = dict((n, b) for n, b, _ in REFACTOR_TEMPLATES)[name]
    new = builder(block, names, rng)
    if not new:  # shape cannot host this template; churn formatting instead
        new = _refactor_format(block, names, rng)
    return new


def generate_commit(rng: random.Random, commit_id: str):
    """One synthetic commit: (files {path: pre_lines}, edits {path: [Edit]}, meta)."""
    names = _Names(rng)
    files: dict[str, list[str]] = {}
    edits_by_path: dict[str, list[Edit]] = {}
    tags = []

    blocks, lines = _build_file(names, rng, rng.randint(2, 3))
    path = "src.c"
    files[path] = lines
    edits: list[Edit] = []
    used: list[FunctionBlock] = []

    tangled_roll = rng.random()
    want_fix = tangled_roll < 0.30
    want_refactors = rng.choice([1, 1, 2, 2, 3]) if want_fix else rng.choice([1, 2, 2, 3])

    if want_fix:
        name, builder = _pick(rng, FIX_TEMPLATES)
        block = rng.choice(blocks)
        used.append(block)
        new = builder(block, names, rng)
        if new:
            edits.extend(new)
            tags.append(name)
    for _ in range(want_refactors):
        candidates = [b for b in blocks if b not in used]
        if not candidates:
            break
        name, _ = _pick(rng, REFACTOR_TEMPLATES)
        block = rng.choice(candidates)
        used.append(block)
        new = _apply_refactor(name, block, names, rng, file_end=len(lines))
        if new:
            edits.extend(new)
            tags.append(name)
    if not edits:  # always produce at least one change
        edits = _fix_guard(blocks[0], names, rng)
        tags = ["fix-guard"]
    edits.sort(key=lambda e: (e.pre_start, e.pre_end))
    edits_by_path[path] = edits

    # a quarter of the commits also touch a second file
    if rng.random() < 0.25:
        blocks2, lines2 = _build_file(names, rng, rng.randint(1, 2))
        path2 = "util.c"
        files[path2] = lines2
        name, _ = _pick(rng, REFACTOR_TEMPLATES)
        extra = _apply_refactor(name, rng.choice(blocks2), names, rng, file_end=len(lines2))
        if extra:
            edits_by_path[path2] = sorted(extra, key=lambda e: (e.pre_start, e.pre_end))
            tags.append(name)

    meta = {"commit_id": commit_id, "message": "synthetic: " + "+".join(tags)}
    return files, edits_by_path, meta


def write_commit_dir(root: Path, commit_id: str, files, edits_by_path, meta):
    """Write one commit directory; returns {line id: label}."""
    commit_dir = root / commit_id
    (commit_dir / "pre").mkdir(parents=True, exist_ok=True)
    (commit_dir / "post").mkdir(parents=True, exist_ok=True)
    labels: dict[str, int] = {}
    diff_parts = []
    for path in sorted(files):
        pre_lines = files[path]
        edits = edits_by_path.get(path, [])
        post_lines, line_labels = apply_edits(pre_lines, edits)
        pre_text = "".join(l + "\n" for l in pre_lines)
        post_text = "".join(l + "\n" for l in post_lines)
        (commit_dir / "pre" / path).parent.mkdir(parents=True, exist_ok=True)
        (commit_dir / "pre" / path).write_text(pre_text)
        (commit_dir / "post" / path).parent.mkdir(parents=True, exist_ok=True)
        (commit_dir / "post" / path).write_text(post_text)
        if edits:
            diff_parts.append(build_unified_diff(path, pre_lines, edits))
        for (side, line_no), label in line_labels.items():
            labels[make_line_id(commit_id, path, side, line_no)] = label
    (commit_dir / "diff.patch").write_text("".join(diff_parts))
    (commit_dir / "meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return labels


def generate_corpus(out_dir: str | Path, size: int, seed: int) -> dict[str, int]:
    """Write `size` commits under out_dir plus labels.jsonl; returns the labels."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_labels: dict[str, int] = {}
    for k in range(size):
        commit_id = f"synth-{k:05d}"
        rng = random.Random((seed << 20) ^ k)
        files, edits, meta = generate_commit(rng, commit_id)
        all_labels.update(write_commit_dir(out_dir, commit_id, files, edits, meta))
    with open(out_dir / "labels.jsonl", "w") as fh:
        for line_id in sorted(all_labels):
            fh.write(json.dumps({"id": line_id, "label": all_labels[line_id]}) + "\n")
    return all_labels
