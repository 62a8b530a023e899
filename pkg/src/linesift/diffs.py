"""Commit ingestion: unified diffs plus pre/post snapshots, enumerated into commit lines.

A commit is stored on disk as::

    <commit_id>/meta.json       {"commit_id": ..., "message": ...}
    <commit_id>/pre/<path>      pre-patch snapshot (absent for added files)
    <commit_id>/post/<path>     post-patch snapshot (absent for deleted files)
    <commit_id>/diff.patch      unified diff, context width 3

Applying the parsed hunks to the pre snapshot must reproduce the post snapshot
byte-for-byte; `load_commit_dir` verifies this.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DiffParseError, IntegrityError

CONTEXT = "context"
ADD = "add"
DEL = "del"

SIDE_PRE = "pre"
SIDE_POST = "post"

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


@dataclass
class Hunk:
    pre_start: int
    pre_len: int
    post_start: int
    post_len: int
    lines: list[tuple[str, str]] = field(default_factory=list)
    # indices into `lines` whose text lacks a trailing newline in the file
    no_newline: set[int] = field(default_factory=set)

    def validate(self, offset=None):
        n_pre = sum(1 for tag, _ in self.lines if tag in (CONTEXT, DEL))
        n_post = sum(1 for tag, _ in self.lines if tag in (CONTEXT, ADD))
        if n_pre != self.pre_len or n_post != self.post_len:
            raise DiffParseError(
                f"hunk counts mismatch: header says -{self.pre_len}/+{self.post_len}, "
                f"body has {n_pre}/{n_post}",
                offset,
            )


@dataclass
class FilePair:
    path: str
    pre_text: str | None
    post_text: str | None
    hunks: list[Hunk] = field(default_factory=list)


@dataclass
class CommitRecord:
    commit_id: str
    files: list[FilePair] = field(default_factory=list)
    message: str | None = None


@dataclass(frozen=True)
class CommitLine:
    commit_id: str
    path: str
    side: str  # pre | post
    kind: str  # deleted | added
    line_no: int  # 1-based in the side's snapshot
    text: str

    @property
    def id(self) -> str:
        return make_line_id(self.commit_id, self.path, self.side, self.line_no)


def make_line_id(commit_id: str, path: str, side: str, line_no: int) -> str:
    return f"{commit_id}:{path}:{side}:{line_no}"


def parse_line_id(line_id: str) -> tuple[str, str, str, int]:
    commit_id, path, side, line_no = line_id.rsplit(":", 3)
    return commit_id, path, side, int(line_no)


def _strip_prefix(path: str) -> str:
    # tolerate git-style a/ b/ prefixes and our own pre/ post/ prefixes
    for prefix in ("a/", "b/", "pre/", "post/"):
        if path.startswith(prefix):
            return path[len(prefix):]
    return path


def parse_unified_diff(diff_text: str) -> list[tuple[str, list[Hunk]]]:
    """Parse unified-diff text into (path, hunks) entries, order preserved.

    The path is taken from the +++ header (--- header for deletions).
    Raises DiffParseError naming the offending 1-based text line.
    """
    out: list[tuple[str, list[Hunk]]] = []
    lines = diff_text.splitlines()
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        if line.startswith("--- "):
            pre_name = line[4:].split("\t")[0].strip()
            if i + 1 >= n or not lines[i + 1].startswith("+++ "):
                raise DiffParseError("missing +++ header after ---", i + 1)
            post_name = lines[i + 1][4:].split("\t")[0].strip()
            if post_name != "/dev/null":
                path = _strip_prefix(post_name)
            elif pre_name != "/dev/null":
                path = _strip_prefix(pre_name)
            else:
                raise DiffParseError("both sides are /dev/null", i + 1)
            i += 2
            hunks: list[Hunk] = []
            while i < n and lines[i].startswith("@@"):
                m = _HUNK_RE.match(lines[i])
                if not m:
                    raise DiffParseError(f"malformed hunk header {lines[i]!r}", i + 1)
                hunk = Hunk(
                    pre_start=int(m.group(1)),
                    pre_len=int(m.group(2)) if m.group(2) is not None else 1,
                    post_start=int(m.group(3)),
                    post_len=int(m.group(4)) if m.group(4) is not None else 1,
                )
                header_offset = i + 1
                i += 1
                # the header counts bound the body; "-"/"+" lines beyond them
                # belong to the next file entry
                remaining_pre, remaining_post = hunk.pre_len, hunk.post_len
                while i < n and (remaining_pre > 0 or remaining_post > 0):
                    body = lines[i]
                    if body.startswith("\\"):
                        # "\ No newline at end of file" applies to the previous line
                        if not hunk.lines:
                            raise DiffParseError("no-newline marker without a line", i + 1)
                        hunk.no_newline.add(len(hunk.lines) - 1)
                        i += 1
                        continue
                    if body.startswith(" ") or body == "":
                        hunk.lines.append((CONTEXT, body[1:]))
                        remaining_pre -= 1
                        remaining_post -= 1
                    elif body.startswith("+"):
                        hunk.lines.append((ADD, body[1:]))
                        remaining_post -= 1
                    elif body.startswith("-"):
                        hunk.lines.append((DEL, body[1:]))
                        remaining_pre -= 1
                    else:
                        break
                    i += 1
                if i < n and lines[i].startswith("\\"):
                    hunk.no_newline.add(len(hunk.lines) - 1)
                    i += 1
                hunk.validate(header_offset)
                hunks.append(hunk)
            out.append((path, hunks))
        elif line.startswith(("diff ", "index ", "new file", "deleted file", "similarity", "rename ")) or not line.strip():
            i += 1
        else:
            raise DiffParseError(f"unexpected line {line!r}", i + 1)
    return out


def _split_keepends(text: str) -> list[str]:
    return text.splitlines(keepends=True)


def apply_hunks(pre_text: str | None, hunks: list[Hunk]) -> str:
    """Apply hunks to the pre snapshot, producing the post snapshot text."""
    pre_lines = _split_keepends(pre_text) if pre_text is not None else []
    out: list[str] = []
    cursor = 0  # 0-based index into pre_lines
    for hunk in hunks:
        # hunk.pre_start is 1-based; a zero pre_len uses start as "insert after"
        start = hunk.pre_start - 1 if hunk.pre_len > 0 else hunk.pre_start
        if start < cursor or start > len(pre_lines):
            raise IntegrityError(f"hunk out of order or beyond file end at -{hunk.pre_start}")
        out.extend(pre_lines[cursor:start])
        cursor = start
        for idx, (tag, text) in enumerate(hunk.lines):
            newline = "" if idx in hunk.no_newline else "\n"
            if tag == CONTEXT:
                if cursor >= len(pre_lines):
                    raise IntegrityError("context line beyond pre snapshot end")
                out.append(pre_lines[cursor])
                cursor += 1
            elif tag == DEL:
                if cursor >= len(pre_lines):
                    raise IntegrityError("deletion beyond pre snapshot end")
                cursor += 1
            else:  # ADD
                out.append(text + newline)
    out.extend(pre_lines[cursor:])
    return "".join(out)


def enumerate_commit_lines(record: CommitRecord) -> list[CommitLine]:
    """One CommitLine per add/del hunk line, ordered by (path, side, line_no).

    Deleted lines sort before added lines within a file, mirroring diff order.
    """
    out: list[CommitLine] = []
    for pair in record.files:
        for hunk in pair.hunks:
            pre_no = hunk.pre_start
            post_no = hunk.post_start
            for tag, text in hunk.lines:
                if tag == CONTEXT:
                    pre_no += 1
                    post_no += 1
                elif tag == DEL:
                    out.append(CommitLine(record.commit_id, pair.path, SIDE_PRE, "deleted", pre_no, text))
                    pre_no += 1
                else:
                    out.append(CommitLine(record.commit_id, pair.path, SIDE_POST, "added", post_no, text))
                    post_no += 1
    side_rank = {SIDE_PRE: 0, SIDE_POST: 1}
    out.sort(key=lambda cl: (cl.path, side_rank[cl.side], cl.line_no))
    return out


def _looks_binary(data: bytes) -> bool:
    return b"\x00" in data[:8192]


def _read_snapshot(path: Path) -> str:
    data = path.read_bytes()
    if _looks_binary(data):
        raise IntegrityError(f"binary file rejected: {path}")
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IntegrityError(f"snapshot is not valid UTF-8: {path}") from exc


def load_commit_dir(commit_dir: str | Path) -> CommitRecord:
    """Load a commit directory, verifying that hunks reproduce the post snapshot."""
    commit_dir = Path(commit_dir)
    meta_path = commit_dir / "meta.json"
    if not meta_path.is_file():
        raise IntegrityError(f"missing meta.json in {commit_dir}")
    meta = json.loads(meta_path.read_text())
    commit_id = meta.get("commit_id") or commit_dir.name
    if not commit_id:
        raise IntegrityError(f"empty commit_id in {meta_path}")

    diff_path = commit_dir / "diff.patch"
    if not diff_path.is_file():
        raise IntegrityError(f"missing diff.patch in {commit_dir}")
    parsed = parse_unified_diff(diff_path.read_text())

    record = CommitRecord(commit_id=commit_id, message=meta.get("message"))
    seen = set()
    for path, hunks in parsed:
        if ":" in path:
            raise IntegrityError(f"path may not contain ':': {path}")
        if path in seen:
            raise IntegrityError(f"duplicate diff entry for {path}")
        seen.add(path)
        pre_file = commit_dir / "pre" / path
        post_file = commit_dir / "post" / path
        pre_text = _read_snapshot(pre_file) if pre_file.is_file() else None
        post_text = _read_snapshot(post_file) if post_file.is_file() else None
        if pre_text is None and post_text is None:
            raise IntegrityError(f"no snapshot on either side for {path} in {commit_id}")
        applied = apply_hunks(pre_text, hunks)
        expected = post_text if post_text is not None else ""
        if applied != expected:
            raise IntegrityError(
                f"applying diff to pre snapshot does not reproduce post snapshot for {path} in {commit_id}"
            )
        record.files.append(FilePair(path=path, pre_text=pre_text, post_text=post_text, hunks=hunks))
    return record


def load_commits_root(root: str | Path) -> list[CommitRecord]:
    """Load every commit directory under `root`, sorted by commit id."""
    root = Path(root)
    records = []
    for child in sorted(root.iterdir()):
        if child.is_dir() and (child / "meta.json").is_file():
            records.append(load_commit_dir(child))
    return records


def export_commit_lines(lines: list[CommitLine]) -> str:
    """Line-delimited JSON export, one record per commit line."""
    rows = []
    for cl in lines:
        rows.append(json.dumps({
            "id": cl.id,
            "commit_id": cl.commit_id,
            "path": cl.path,
            "side": cl.side,
            "kind": cl.kind,
            "line_no": cl.line_no,
            "text": cl.text,
        }, ensure_ascii=False))
    return "".join(row + "\n" for row in rows)


def import_commit_lines(text: str) -> list[CommitLine]:
    out = []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        rec = json.loads(raw)
        out.append(CommitLine(
            commit_id=rec["commit_id"],
            path=rec["path"],
            side=rec["side"],
            kind=rec["kind"],
            line_no=rec["line_no"],
            text=rec["text"],
        ))
    return out
