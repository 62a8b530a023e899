"""The committee: a small ensemble of classifiers whose hard-vote disagreement
drives query selection."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..errors import LinesiftError
from ..learners import Dataset, train_model
from ..learners.metrics import Metrics, metrics_from_predictions

DEFAULT_MEMBERS = ({"kind": "random_forest", "params": {}},
                   {"kind": "linear_svm", "params": {}})


def vote_entropy(votes) -> float:
    """Entropy of the committee's hard-vote distribution, in bits.

    Base 2 makes a binary 50/50 split score exactly 1; the base only rescales
    and never changes the ranking of candidates.
    """
    votes = list(votes)
    if not votes:
        raise LinesiftError("vote_entropy requires at least one vote")
    c = len(votes)
    out = 0.0
    for count in Counter(votes).values():
        p = count / c
        out -= p * math.log2(p)
    return out


def _member_seed(session_seed: int, iteration: int, member_index: int) -> int:
    return int(np.random.SeedSequence([session_seed, iteration, member_index])
               .generate_state(1)[0])


@dataclass
class Committee:
    members: list[dict]  # {"kind", "params", "model"}
    trained_on_revision: int = -1

    @classmethod
    def from_spec(cls, specs=DEFAULT_MEMBERS) -> "Committee":
        if len(specs) < 2:
            raise LinesiftError("a committee needs at least two members")
        return cls(members=[{"kind": s["kind"], "params": dict(s.get("params", {})),
                             "model": None} for s in specs])

    @property
    def kinds(self) -> list[str]:
        return [m["kind"] for m in self.members]

    def train(self, data: Dataset, session_seed: int, iteration: int):
        """Full retrain of every member; revision tracks the labeled-set state."""
        for idx, member in enumerate(self.members):
            seed = _member_seed(session_seed, iteration, idx)
            member["model"] = train_model(member["kind"], data, member["params"], seed)
        self.trained_on_revision = iteration

    def member_votes(self, vectors: np.ndarray) -> np.ndarray:
        """(n_rows, n_members) matrix of hard votes."""
        votes = [
            (member["model"].predict_scores(vectors) >= 0.5).astype(int)
            for member in self.members
        ]
        return np.stack(votes, axis=1)

    def vote_entropies(self, vectors: np.ndarray) -> np.ndarray:
        votes = self.member_votes(vectors)
        c = votes.shape[1]
        pos = votes.sum(axis=1)
        out = np.zeros(len(votes))
        for count in range(c + 1):
            mask = pos == count
            if not mask.any():
                continue
            ent = 0.0
            for part in (count, c - count):
                if part > 0:
                    p = part / c
                    ent -= p * math.log2(p)
            out[mask] = ent
        return out

    def predict_scores(self, vectors: np.ndarray) -> np.ndarray:
        """Committee score: mean of member scores."""
        total = np.zeros(len(vectors))
        for member in self.members:
            total += member["model"].predict_scores(vectors)
        return total / len(self.members)

    def predict_labels(self, vectors: np.ndarray) -> np.ndarray:
        return (self.predict_scores(vectors) >= 0.5).astype(int)

    def evaluate(self, data: Dataset) -> Metrics:
        return metrics_from_predictions(data.labels, self.predict_labels(data.vectors))
