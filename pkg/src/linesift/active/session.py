"""The active-learning session: labeled set, unlabeled pool, committee,
batch selection, label incorporation, and crash-safe persistence.

A session directory holds the initial state plus an append-only answer log;
every derived structure (current labeled set, pool, committee, history) is
reconstructed deterministically from those, so a crash between requests never
loses an accepted label.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DegenerateModelError, LinesiftError, SessionError
from ..learners import Dataset
from ..learners.metrics import Metrics
from ..learners.serialize import dumps_model, loads_model
from .committee import DEFAULT_MEMBERS, Committee

SESSION_FORMAT = 1


@dataclass
class SessionConfig:
    base_fraction: float = 0.20
    batch_size: int = 10
    max_iterations: int = 200
    seed: int = 0
    discard_skips: bool = False
    eval_fraction: float = 0.2
    members: tuple = DEFAULT_MEMBERS
    commits_dir: str | None = None

    def to_dict(self) -> dict:
        return {
            "format": SESSION_FORMAT,
            "base_fraction": self.base_fraction,
            "batch_size": self.batch_size,
            "max_iterations": self.max_iterations,
            "seed": self.seed,
            "discard_skips": self.discard_skips,
            "eval_fraction": self.eval_fraction,
            "members": [dict(m) for m in self.members],
            "commits_dir": self.commits_dir,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionConfig":
        return cls(
            base_fraction=doc.get("base_fraction", 0.20),
            batch_size=doc.get("batch_size", 10),
            max_iterations=doc.get("max_iterations", 200),
            seed=doc.get("seed", 0),
            discard_skips=doc.get("discard_skips", False),
            eval_fraction=doc.get("eval_fraction", 0.2),
            members=tuple(doc.get("members", [dict(m) for m in DEFAULT_MEMBERS])),
            commits_dir=doc.get("commits_dir"),
        )


@dataclass
class QueryBatch:
    iteration: int
    items: list[dict]  # {"id", "entropy", "votes": {kind: label}}

    def ids(self) -> list[str]:
        return [item["id"] for item in self.items]


@dataclass
class HistoryEntry:
    iteration: int
    labels_added: int
    labels_used: int
    metrics: dict

    def to_dict(self) -> dict:
        return {"iteration": self.iteration, "labels_added": self.labels_added,
                "labels_used": self.labels_used, "metrics": self.metrics}


class LearningSession:
    """Single-writer state machine over (labeled, pool, committee)."""

    def __init__(self, config: SessionConfig, labeled: Dataset, pool: Dataset,
                 eval_data: Dataset, directory: Path | None = None):
        self.config = config
        self.labeled = labeled
        self.pool_ids: list[str] = list(pool.ids)
        self.pool_vectors = pool.vectors
        self.eval_data = eval_data
        self.committee = Committee.from_spec(config.members)
        self.iteration = 0
        self.history: list[HistoryEntry] = []
        self.reservation: QueryBatch | None = None
        self.queried_labels = 0
        self.provenance: dict[str, str] = {i: "human" for i in labeled.ids}
        self.directory = Path(directory) if directory is not None else None
        self.base_metrics: dict | None = None

    # --- invariants ---

    def check_invariants(self):
        labeled_ids = set(self.labeled.ids)
        pool_ids = set(self.pool_ids)
        if labeled_ids & pool_ids:
            raise LinesiftError("labeled and pool sets overlap")
        if len(pool_ids) != len(self.pool_ids):
            raise LinesiftError("duplicate ids in pool")
        if len(self.history) != self.iteration:
            raise LinesiftError("history length disagrees with iteration count")

    # --- training / metrics ---

    def _train_committee(self):
        if len(np.unique(self.labeled.labels)) < 2:
            raise DegenerateModelError("labeled set must contain both classes")
        self.committee.train(self.labeled, self.config.seed, self.iteration)

    def _eval_metrics(self) -> dict:
        if self.eval_data is None or len(self.eval_data) == 0:
            return {}
        return self.committee.evaluate(self.eval_data).to_dict()

    # --- persistence helpers ---

    def _write_atomic(self, name: str, text: str):
        if self.directory is None:
            return
        tmp = self.directory / (name + ".tmp")
        tmp.write_text(text)
        tmp.replace(self.directory / name)

    def _append(self, name: str, text: str):
        if self.directory is None:
            return
        with open(self.directory / name, "a") as fh:
            fh.write(text)

    def _save_committee(self):
        if self.directory is None:
            return
        cdir = self.directory / "committee"
        cdir.mkdir(exist_ok=True)
        for idx, member in enumerate(self.committee.members):
            tmp = cdir / f"member_{idx}.model.tmp"
            tmp.write_text(dumps_model(member["model"]))
            tmp.replace(cdir / f"member_{idx}.model")

    def _load_committee(self) -> bool:
        if self.directory is None:
            return False
        cdir = self.directory / "committee"
        models = []
        for idx in range(len(self.committee.members)):
            path = cdir / f"member_{idx}.model"
            if not path.is_file():
                return False
            models.append(loads_model(path.read_text()))
        for member, model in zip(self.committee.members, models):
            member["model"] = model
        self.committee.trained_on_revision = self.iteration
        return True

    # --- querying ---

    def pool_dataset(self) -> Dataset:
        return Dataset(self.pool_vectors, np.zeros(len(self.pool_ids), dtype=int),
                       list(self.pool_ids))

    def select_batch(self) -> QueryBatch:
        """Top batch_size pool rows by vote entropy, ties by ascending id.

        Idempotent while a reservation is pending; an empty batch signals an
        exhausted pool.
        """
        if self.reservation is not None:
            return self.reservation
        if not self.pool_ids:
            return QueryBatch(iteration=self.iteration, items=[])
        votes = self.committee.member_votes(self.pool_vectors)
        entropies = self.committee.vote_entropies(self.pool_vectors)
        order = sorted(range(len(self.pool_ids)),
                       key=lambda i: (-entropies[i], self.pool_ids[i]))
        chosen = order[:self.config.batch_size]
        items = [{
            "id": self.pool_ids[i],
            "entropy": float(entropies[i]),
            "votes": {f"{idx}:{member['kind']}": int(votes[i][idx])
                      for idx, member in enumerate(self.committee.members)},
        } for i in chosen]
        batch = QueryBatch(iteration=self.iteration, items=items)
        self._reserve(batch)
        return batch

    def random_baseline_select(self) -> QueryBatch:
        """Uniform sample without replacement; the baseline acquisition."""
        if self.reservation is not None:
            return self.reservation
        if not self.pool_ids:
            return QueryBatch(iteration=self.iteration, items=[])
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([self.config.seed, self.iteration, 0xA11])))
        k = min(self.config.batch_size, len(self.pool_ids))
        chosen = sorted(rng.choice(len(self.pool_ids), size=k, replace=False).tolist())
        votes = self.committee.member_votes(self.pool_vectors[chosen])
        entropies = self.committee.vote_entropies(self.pool_vectors[chosen])
        items = [{
            "id": self.pool_ids[i],
            "entropy": float(entropies[row]),
            "votes": {f"{idx}:{member['kind']}": int(votes[row][idx])
                      for idx, member in enumerate(self.committee.members)},
        } for row, i in enumerate(chosen)]
        batch = QueryBatch(iteration=self.iteration, items=items)
        self._reserve(batch)
        return batch

    def _reserve(self, batch: QueryBatch):
        self.reservation = batch
        self._write_atomic("reservation.json", json.dumps(
            {"iteration": batch.iteration, "items": batch.items}) + "\n")

    def release_reservation(self):
        self.reservation = None
        if self.directory is not None:
            try:
                (self.directory / "reservation.json").unlink()
            except FileNotFoundError:
                pass

    # --- labeling ---

    def incorporate_labels(self, answers: list[tuple[str, int | None]]):
        """Move answered rows into the labeled set, return skips to the pool,
        retrain, and append a history entry.

        `answers` holds (id, label) with label None meaning skip. Every id must
        belong to the current reservation; reserved ids missing from `answers`
        are released back to the pool like skips.
        """
        if self.reservation is None:
            raise SessionError("no batch reserved")
        reserved = set(self.reservation.ids())
        seen = set()
        for line_id, _ in answers:
            if line_id in seen:
                raise SessionError(f"duplicate answer for id {line_id}", line_id)
            seen.add(line_id)
            if line_id not in reserved:
                raise SessionError(f"id {line_id} is not part of the reserved batch",
                                   line_id)

        accepted = [(i, label) for i, label in answers if label is not None]
        skipped = [i for i, label in answers if label is None]
        # persist the accepted answers before mutating anything
        log_lines = "".join(
            json.dumps({"iteration": self.iteration, "id": i, "label": int(label)}) + "\n"
            for i, label in accepted)
        if skipped and self.config.discard_skips:
            log_lines += "".join(
                json.dumps({"iteration": self.iteration, "id": i, "skip": True}) + "\n"
                for i in skipped)
        self._append("labels.log.jsonl", log_lines)
        self._apply_answers(accepted, skipped)
        self.iteration += 1
        self._train_committee()
        self._save_committee()
        entry = HistoryEntry(
            iteration=self.iteration,
            labels_added=len(accepted),
            labels_used=self.queried_labels,
            metrics=self._eval_metrics(),
        )
        self.history.append(entry)
        self._append("history.jsonl", json.dumps(entry.to_dict()) + "\n")
        self.release_reservation()
        self.check_invariants()
        return entry

    def _apply_answers(self, accepted, skipped):
        index_of = {line_id: i for i, line_id in enumerate(self.pool_ids)}
        take_rows = []
        for line_id, label in accepted:
            if line_id not in index_of:
                raise SessionError(f"id {line_id} is not in the pool", line_id)
            take_rows.append((index_of[line_id], line_id, label))
        drop = {row for row, _, _ in take_rows}
        if self.config.discard_skips:
            for line_id in skipped:
                if line_id in index_of:
                    drop.add(index_of[line_id])
        if take_rows:
            new_vectors = np.vstack([self.labeled.vectors,
                                     self.pool_vectors[[r for r, _, _ in take_rows]]])
            new_labels = np.concatenate([self.labeled.labels,
                                         [lb for _, _, lb in take_rows]])
            new_ids = self.labeled.ids + [i for _, i, _ in take_rows]
            self.labeled = Dataset(new_vectors, new_labels, new_ids)
            for _, line_id, _ in take_rows:
                self.provenance[line_id] = "human"
        keep = [i for i in range(len(self.pool_ids)) if i not in drop]
        self.pool_vectors = self.pool_vectors[keep]
        self.pool_ids = [self.pool_ids[i] for i in keep]
        self.queried_labels += len(take_rows)


@dataclass
class Budget:
    iterations: int | None = None
    max_labels: int | None = None
    time_limit: float | None = None  # seconds

    def exhausted(self, session: LearningSession, started: float) -> bool:
        if self.iterations is not None and session.iteration >= self.iterations:
            return True
        if self.max_labels is not None and session.queried_labels >= self.max_labels:
            return True
        if self.time_limit is not None and time.monotonic() - started >= self.time_limit:
            return True
        return False


def init_session(labeled: Dataset, pool: Dataset, config: SessionConfig,
                 eval_data: Dataset | None = None,
                 directory: str | Path | None = None) -> LearningSession:
    """Train the base committee and persist the initial session state.

    Without an explicit eval set, `eval_fraction` of the labeled base is held
    out (seeded split) for learning-curve metrics and never trained on.
    """
    if eval_data is None and config.eval_fraction > 0 and len(labeled) >= 10:
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([config.seed, 0xE7A1])))
        n_eval = max(1, int(round(len(labeled) * config.eval_fraction)))
        order = rng.permutation(len(labeled))
        eval_data = labeled.subset(order[:n_eval])
        labeled = labeled.subset(order[n_eval:])
    if eval_data is None:
        eval_data = Dataset(np.zeros((0, labeled.n_features)), np.zeros(0, dtype=int), [])

    directory = Path(directory) if directory is not None else None
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)

    session = LearningSession(config, labeled, pool, eval_data, directory)
    session._train_committee()
    if directory is not None:
        session._write_atomic("config.json", json.dumps(config.to_dict(), indent=2) + "\n")
        session._write_atomic("base.jsonl", _rows_jsonl(labeled, with_labels=True))
        session._write_atomic("pool.jsonl", _rows_jsonl(session.pool_dataset(), with_labels=False))
        session._write_atomic("eval.jsonl", _rows_jsonl(eval_data, with_labels=True))
        (directory / "labels.log.jsonl").touch()
        (directory / "history.jsonl").touch()
        session._save_committee()
    session.base_metrics = session._eval_metrics()
    if directory is not None:
        session._write_atomic("base_metrics.json", json.dumps(session.base_metrics) + "\n")
    session.check_invariants()
    return session


def _rows_jsonl(data: Dataset, with_labels: bool) -> str:
    out = []
    for i, line_id in enumerate(data.ids):
        rec = {"id": line_id, "vector": data.vectors[i].tolist()}
        if with_labels:
            rec["label"] = int(data.labels[i])
        out.append(json.dumps(rec))
    return "".join(line + "\n" for line in out)


def _read_rows_jsonl(path: Path) -> Dataset:
    ids, vectors, labels = [], [], []
    width = 0
    for raw in path.read_text().splitlines():
        if not raw.strip():
            continue
        rec = json.loads(raw)
        ids.append(rec["id"])
        vectors.append(rec["vector"])
        width = len(rec["vector"])
        labels.append(int(rec.get("label", 0)))
    if not ids:
        return Dataset(np.zeros((0, width or 27)), np.zeros(0, dtype=int), [])
    return Dataset(np.array(vectors, dtype=float), np.array(labels, dtype=np.int64), ids)


def load_session(directory: str | Path) -> LearningSession:
    """Rebuild a session from its directory, replaying the answer log."""
    directory = Path(directory)
    config_path = directory / "config.json"
    if not config_path.is_file():
        raise SessionError(f"no session at {directory}")
    config = SessionConfig.from_dict(json.loads(config_path.read_text()))
    labeled = _read_rows_jsonl(directory / "base.jsonl")
    pool = _read_rows_jsonl(directory / "pool.jsonl")
    eval_data = _read_rows_jsonl(directory / "eval.jsonl")

    session = LearningSession(config, labeled, pool, eval_data, directory)

    # replay accepted answers grouped by iteration
    by_iteration: dict[int, list[dict]] = {}
    log_path = directory / "labels.log.jsonl"
    if log_path.is_file():
        for raw in log_path.read_text().splitlines():
            if raw.strip():
                rec = json.loads(raw)
                by_iteration.setdefault(rec["iteration"], []).append(rec)
    for iteration in sorted(by_iteration):
        answers = [(rec["id"], None if rec.get("skip") else rec["label"])
                   for rec in by_iteration[iteration]]
        accepted = [(i, l) for i, l in answers if l is not None]
        skipped = [i for i, l in answers if l is None]
        session._apply_answers(accepted, skipped)
        session.iteration += 1

    if not session._load_committee():
        session._train_committee()
        session._save_committee()

    # history is derived; recompute anything lost to a crash
    history_path = directory / "history.jsonl"
    entries = []
    if history_path.is_file():
        for raw in history_path.read_text().splitlines():
            if raw.strip():
                doc = json.loads(raw)
                entries.append(HistoryEntry(doc["iteration"], doc["labels_added"],
                                            doc["labels_used"], doc["metrics"]))
    session.history = entries[:session.iteration]
    while len(session.history) < session.iteration:
        # only the final entry can be missing (log appends precede history appends)
        entry = HistoryEntry(
            iteration=session.iteration,
            labels_added=len(by_iteration.get(session.iteration - 1, [])),
            labels_used=session.queried_labels,
            metrics=session._eval_metrics(),
        )
        session.history.append(entry)
        session._append("history.jsonl", json.dumps(entry.to_dict()) + "\n")

    base_metrics_path = directory / "base_metrics.json"
    if base_metrics_path.is_file():
        session.base_metrics = json.loads(base_metrics_path.read_text())

    reservation_path = directory / "reservation.json"
    if reservation_path.is_file():
        doc = json.loads(reservation_path.read_text())
        pool_ids = set(session.pool_ids)
        items = [item for item in doc["items"] if item["id"] in pool_ids]
        if items:
            session.reservation = QueryBatch(iteration=doc["iteration"], items=items)
    session.check_invariants()
    return session


def run_session(session: LearningSession, oracle, budget: Budget | None = None,
                strategy: str = "committee") -> LearningSession:
    """Loop select -> oracle -> incorporate until the budget or the pool ends.

    `oracle` maps a QueryBatch to a list of (id, label-or-None) answers.
    """
    budget = budget or Budget()
    started = time.monotonic()
    select = (session.select_batch if strategy == "committee"
              else session.random_baseline_select)
    while session.iteration < session.config.max_iterations:
        if budget.exhausted(session, started):
            break
        batch = select()
        if not batch.items:
            break
        session.incorporate_labels(oracle(batch))
    return session


def learning_curve(session: LearningSession) -> list[tuple[int, float]]:
    """(labels_used, f1) per completed iteration on the fixed held-out set."""
    return [(entry.labels_used, entry.metrics.get("f1", 0.0))
            for entry in session.history]


def select_batch(session: LearningSession) -> QueryBatch:
    return session.select_batch()


def incorporate_labels(session: LearningSession, answers) -> HistoryEntry:
    return session.incorporate_labels(answers)


def random_baseline_select(session: LearningSession) -> QueryBatch:
    return session.random_baseline_select()
