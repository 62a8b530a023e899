"""Row-aligned feature matrix, binary labels, and commit-line ids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import LinesiftError
from ..features import FEATURE_NAMES


@dataclass
class Dataset:
    vectors: np.ndarray  # N x len(FEATURE_NAMES), float64
    labels: np.ndarray  # N, int values in {0, 1}
    ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.vectors.ndim != 2:
            raise LinesiftError("vectors must be a 2-d matrix")
        if len(self.labels) != len(self.vectors):
            raise LinesiftError("labels and vectors row counts disagree")
        if self.ids and len(self.ids) != len(self.vectors):
            raise LinesiftError("ids and vectors row counts disagree")
        bad = set(np.unique(self.labels)) - {0, 1}
        if bad:
            raise LinesiftError(f"labels must be binary, found {sorted(bad)}")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.vectors.shape[1]

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=int)
        ids = [self.ids[i] for i in indices] if self.ids else []
        return Dataset(self.vectors[indices], self.labels[indices], ids)

    @classmethod
    def from_records(cls, records: list[dict], labels: dict[str, int] | None = None) -> "Dataset":
        """Build from feature-export records; `labels` overrides inline labels."""
        vecs, ys, ids = [], [], []
        for rec in records:
            rid = rec["id"]
            label = labels.get(rid) if labels is not None else rec.get("label")
            if label is None:
                continue
            vecs.append([rec["features"][name] for name in FEATURE_NAMES])
            ys.append(int(label))
            ids.append(rid)
        if not vecs:
            return cls(np.zeros((0, len(FEATURE_NAMES))), np.zeros(0, dtype=np.int64), [])
        return cls(np.array(vecs, dtype=float), np.array(ys, dtype=np.int64), ids)
