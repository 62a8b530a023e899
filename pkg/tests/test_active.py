import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linesift.active import (
    Budget,
    SessionConfig,
    init_session,
    learning_curve,
    load_session,
    run_session,
    vote_entropy,
)
from linesift.errors import DegenerateModelError, LinesiftError, SessionError
from linesift.learners import Dataset


def test_vote_entropy_values():
    assert vote_entropy([0, 0]) == 0.0
    assert vote_entropy([1, 0]) == 1.0
    assert vote_entropy([1, 1, 0]) == pytest.approx(0.9183, abs=1e-4)


def test_vote_entropy_empty_rejected():
    with pytest.raises(LinesiftError):
        vote_entropy([])


@given(st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=8),
       st.randoms())
def test_vote_entropy_permutation_and_swap_invariant(votes, rnd):
    shuffled = list(votes)
    rnd.shuffle(shuffled)
    assert vote_entropy(shuffled) == pytest.approx(vote_entropy(votes))
    swapped = [1 - v for v in votes]
    assert vote_entropy(swapped) == pytest.approx(vote_entropy(votes))


def test_vote_entropy_matches_direct_formula_exhaustive():
    for c in range(2, 6):
        for packed in range(2 ** c):
            votes = [(packed >> i) & 1 for i in range(c)]
            expected = 0.0
            for count in (sum(votes), c - sum(votes)):
                if count:
                    p = count / c
                    expected -= p * math.log2(p)
            assert vote_entropy(votes) == pytest.approx(expected, abs=1e-12)


def _toy_data(seed=0, n_base=24, n_pool=40, width=27):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n_base + n_pool, width))
    y = (x[:, 0] + 0.5 * x[:, 1] > 0).astype(int)
    ids = [f"c{i:03d}:f.c:post:{i + 1}" for i in range(len(x))]
    base = Dataset(x[:n_base], y[:n_base], ids[:n_base])
    pool = Dataset(x[n_base:], np.zeros(n_pool, dtype=int), ids[n_base:])
    truth = {ids[n_base + i]: int(y[n_base + i]) for i in range(n_pool)}
    return base, pool, truth


def _config(**kw):
    defaults = dict(batch_size=5, max_iterations=50, seed=7, eval_fraction=0.25)
    defaults.update(kw)
    return SessionConfig(**defaults)


def test_init_session_trains_and_holds_out():
    base, pool, _ = _toy_data()
    session = init_session(base, pool, _config())
    assert session.committee.members[0]["model"] is not None
    assert len(session.eval_data) == 6  # 25% of 24
    assert len(session.labeled) == 18
    assert session.history == []


def test_init_session_single_class_rejected():
    base, pool, _ = _toy_data()
    bad = Dataset(base.vectors, np.zeros(len(base), dtype=int), base.ids)
    with pytest.raises(DegenerateModelError):
        init_session(bad, pool, _config())


class _StubCommittee:
    """Fixed entropies for testing the selection order."""

    def __init__(self, entropies):
        self.entropies = np.asarray(entropies, dtype=float)
        self.members = [{"kind": "stub", "params": {}, "model": None}] * 2

    def member_votes(self, vectors):
        return np.zeros((len(vectors), 2), dtype=int)

    def vote_entropies(self, vectors):
        return self.entropies[:len(vectors)]


def test_select_batch_orders_by_entropy_then_id():
    base, pool, _ = _toy_data(n_pool=4)
    session = init_session(base, pool, _config(batch_size=2))
    session.committee = _StubCommittee([0.0, 1.0, 0.918, 0.5])
    batch = session.select_batch()
    assert batch.ids() == [session.pool_ids[1], session.pool_ids[2]]
    assert [round(i["entropy"], 3) for i in batch.items] == [1.0, 0.918]


def test_select_batch_tie_breaks_ascending_id():
    base, pool, _ = _toy_data(n_pool=6)
    session = init_session(base, pool, _config(batch_size=3))
    session.committee = _StubCommittee([0.0] * 6)
    batch = session.select_batch()
    assert batch.ids() == sorted(session.pool_ids)[:3]


def test_select_batch_smaller_pool_returns_whole_pool():
    base, pool, _ = _toy_data(n_pool=3)
    session = init_session(base, pool, _config(batch_size=10))
    batch = session.select_batch()
    assert len(batch.items) == 3


def test_select_batch_idempotent_until_labeled():
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config())
    first = session.select_batch()
    second = session.select_batch()
    assert first.ids() == second.ids()


def test_incorporate_moves_rows_and_returns_skips():
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=4))
    n_labeled = len(session.labeled)
    n_pool = len(session.pool_ids)
    batch = session.select_batch()
    ids = batch.ids()
    answers = [(ids[0], truth[ids[0]]), (ids[1], truth[ids[1]]), (ids[2], None)]
    entry = session.incorporate_labels(answers)
    assert entry.labels_added == 2
    assert len(session.labeled) == n_labeled + 2
    assert len(session.pool_ids) == n_pool - 2
    assert ids[2] in session.pool_ids  # skipped returns to pool
    assert ids[3] in session.pool_ids  # unanswered released
    assert len(session.labeled) + len(session.pool_ids) == n_labeled + n_pool


def test_incorporate_discard_skips():
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=3, discard_skips=True))
    batch = session.select_batch()
    ids = batch.ids()
    session.incorporate_labels([(ids[0], None), (ids[1], truth[ids[1]])])
    assert ids[0] not in session.pool_ids
    assert ids[0] not in session.labeled.ids


def test_incorporate_unknown_id_rejected():
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config())
    session.select_batch()
    with pytest.raises(SessionError) as exc:
        session.incorporate_labels([("bogus:id:post:1", 1)])
    assert "bogus:id" in str(exc.value)


def test_incorporate_unreserved_id_rejected():
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=2))
    batch = session.select_batch()
    outside = next(i for i in session.pool_ids if i not in batch.ids())
    with pytest.raises(SessionError):
        session.incorporate_labels([(outside, 1)])


def _oracle(truth):
    def answer(batch):
        return [(i, truth[i]) for i in batch.ids()]
    return answer


def test_run_session_respects_budgets():
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=5))
    run_session(session, _oracle(truth), Budget(iterations=3))
    assert session.iteration == 3
    assert session.queried_labels == 15

    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=5))
    run_session(session, _oracle(truth), Budget(max_labels=12))
    assert session.queried_labels in (12, 15)  # stops after the batch crossing 12

    base, pool, truth = _toy_data(n_pool=8)
    session = init_session(base, pool, _config(batch_size=5))
    run_session(session, _oracle(truth))
    assert not session.pool_ids  # pool exhausted


def test_history_and_curve_lengths():
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=5))
    run_session(session, _oracle(truth), Budget(iterations=4))
    assert len(session.history) == 4
    curve = learning_curve(session)
    assert [labels for labels, _ in curve] == [5, 10, 15, 20]
    assert all(0.0 <= f1 <= 1.0 for _, f1 in curve)


def test_replay_determinism():
    def run_once():
        base, pool, truth = _toy_data()
        session = init_session(base, pool, _config(batch_size=5))
        run_session(session, _oracle(truth), Budget(iterations=5))
        return [e.to_dict() for e in session.history]

    assert run_once() == run_once()


def test_random_baseline_is_seeded_and_without_replacement():
    base, pool, truth = _toy_data()
    s1 = init_session(base, pool, _config(seed=13))
    s2 = init_session(base, pool, _config(seed=13))
    b1 = s1.random_baseline_select()
    b2 = s2.random_baseline_select()
    assert b1.ids() == b2.ids()
    assert len(set(b1.ids())) == len(b1.ids())
    s3 = init_session(base, pool, _config(seed=14))
    assert s3.random_baseline_select().ids() != b1.ids()


def test_session_persistence_roundtrip(tmp_path):
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=5), directory=tmp_path / "s")
    run_session(session, _oracle(truth), Budget(iterations=3))

    loaded = load_session(tmp_path / "s")
    assert loaded.iteration == 3
    assert loaded.queried_labels == session.queried_labels
    assert sorted(loaded.labeled.ids) == sorted(session.labeled.ids)
    assert sorted(loaded.pool_ids) == sorted(session.pool_ids)
    assert [e.to_dict() for e in loaded.history] == [e.to_dict() for e in session.history]


def test_crash_recovery_replays_lost_history(tmp_path):
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=5), directory=tmp_path / "s")
    run_session(session, _oracle(truth), Budget(iterations=3))
    expected = [e.to_dict() for e in session.history]

    # simulate a crash after the label log append but before the history append
    history_path = tmp_path / "s" / "history.jsonl"
    lines = history_path.read_text().splitlines()
    history_path.write_text("".join(line + "\n" for line in lines[:-1]))

    loaded = load_session(tmp_path / "s")
    assert [e.to_dict() for e in loaded.history] == expected


def test_reservation_survives_restart(tmp_path):
    base, pool, truth = _toy_data()
    session = init_session(base, pool, _config(batch_size=4), directory=tmp_path / "s")
    batch = session.select_batch()
    loaded = load_session(tmp_path / "s")
    assert loaded.reservation is not None
    assert loaded.reservation.ids() == batch.ids()
    # labels for the restored reservation are accepted
    answers = [(i, truth[i]) for i in loaded.reservation.ids()]
    loaded.incorporate_labels(answers)
    assert loaded.iteration == 1
