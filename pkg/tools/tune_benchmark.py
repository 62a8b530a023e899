#!/usr/bin/env python3
"""Tuning harness for the synthetic benchmark: measures the full-data ceiling,
base-20% floor, and QBC-vs-random label efficiency on the generated corpus.

Not part of the package or test suite; run by hand while calibrating the
generator templates.
"""
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from linesift.active import Budget, SessionConfig, init_session, run_session
from linesift.analysis import parse_source
from linesift.diffs import enumerate_commit_lines, load_commits_root
from linesift.features import build_units, featurize_commit
from linesift.learners import Dataset
from linesift.learners.metrics import metrics_from_predictions
from linesift.synth import generate_corpus


def build_rows(tmp, size=300, seed=42):
    labels = generate_corpus(tmp, size=size, seed=seed)
    rows = []
    for rec in load_commits_root(tmp):
        lines = enumerate_commit_lines(rec)
        units, warnings = build_units(rec, parse_source)
        assert not warnings
        res = featurize_commit(rec, lines, units)
        for r in res.rows:
            rows.append((r.line.commit_id, r.line.id, r.vector.to_row(), labels[r.line.id]))
    return rows


def split_rows(rows, seed=0, train_frac=0.6):
    commits = sorted({r[0] for r in rows})
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(commits))
    train_commits = {commits[i] for i in order[:int(train_frac * len(commits))]}
    tr = [r for r in rows if r[0] in train_commits]
    te = [r for r in rows if r[0] not in train_commits]
    return tr, te


def datasets(tr, te, base_fraction=0.2, seed=0):
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(tr))
    n_base = int(round(base_fraction * len(tr)))
    base_rows = [tr[i] for i in order[:n_base]]
    pool_rows = [tr[i] for i in order[n_base:]]
    base = Dataset(np.array([r[2] for r in base_rows], float),
                   np.array([r[3] for r in base_rows]), [r[1] for r in base_rows])
    pool = Dataset(np.array([r[2] for r in pool_rows], float),
                   np.zeros(len(pool_rows), dtype=int), [r[1] for r in pool_rows])
    test = Dataset(np.array([r[2] for r in te], float),
                   np.array([r[3] for r in te]), [r[1] for r in te])
    truth = {r[1]: r[3] for r in tr + te}
    return base, pool, test, truth


LIGHT_MEMBERS = ({"kind": "random_forest", "params": {"n_trees": 40}},
                 {"kind": "linear_svm", "params": {}})


def run_strategy(base, pool, test, truth, seed, strategy, iterations=40):
    config = SessionConfig(batch_size=10, max_iterations=iterations, seed=seed,
                           eval_fraction=0.0, members=LIGHT_MEMBERS)
    session = init_session(base, pool, config, eval_data=test)
    oracle = lambda batch: [(i, truth[i]) for i in batch.ids()]
    run_session(session, oracle, Budget(iterations=iterations), strategy=strategy)
    curve = [e.metrics["f1"] for e in session.history]
    return session.base_metrics["f1"], curve


def labels_to_target(base_f1, curve, target=0.80, batch=10):
    if base_f1 >= target:
        return 0
    for i, f1 in enumerate(curve):
        if f1 >= target:
            return (i + 1) * batch
    return None


def main():
    t0 = time.time()
    tmp = Path(tempfile.mkdtemp())
    rows = build_rows(tmp)
    pos = sum(r[3] for r in rows)
    print(f"rows={len(rows)} pos={pos} ({100 * pos / len(rows):.1f}%) "
          f"lines/commit={len(rows) / 300:.1f} [{time.time() - t0:.1f}s]")
    tr, te = split_rows(rows)

    # ceiling with all training labels
    Xtr = np.array([r[2] for r in tr], float)
    ytr = np.array([r[3] for r in tr])
    Xte = np.array([r[2] for r in te], float)
    yte = np.array([r[3] for r in te])
    from linesift.learners import train_linear_svm, train_random_forest
    rf = train_random_forest(Dataset(Xtr, ytr), seed=1)
    svm = train_linear_svm(Dataset(Xtr, ytr), seed=1)
    comb = (rf.predict_scores(Xte) + svm.predict_scores(Xte)) / 2
    print("ceiling committee F1:",
          round(metrics_from_predictions(yte, (comb >= 0.5).astype(int)).f1, 3))

    ratios = []
    dom_counts = []
    for seed in range(10):
        base, pool, test, truth = datasets(tr, te, seed=seed)
        t1 = time.time()
        f0, qbc = run_strategy(base, pool, test, truth, seed, "committee")
        f0r, rnd = run_strategy(base, pool, test, truth, seed, "random")
        lq = labels_to_target(f0, qbc)
        lr = labels_to_target(f0r, rnd)
        dom = sum(1 for a, b in zip(qbc, rnd) if a > b)
        ties = sum(1 for a, b in zip(qbc, rnd) if a == b)
        dom_counts.append((dom, ties, len(qbc)))
        ratios.append((lq, lr))
        print(f"seed={seed} baseF1={f0:.3f} qbc_labels={lq} rnd_labels={lr} "
              f"dom={dom}/{len(qbc)} ties={ties} qbc_end={qbc[-1]:.3f} rnd_end={rnd[-1]:.3f} "
              f"[{time.time() - t1:.1f}s]")
    print("total", round(time.time() - t0, 1), "s")


if __name__ == "__main__":
    main()
