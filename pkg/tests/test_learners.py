import numpy as np
import pytest

from helpers import SlowCart
from linesift.errors import DegenerateModelError
from linesift.learners import (
    Dataset,
    evaluate,
    load_model,
    predict,
    save_model,
    train_linear_svm,
    train_logistic_regression,
    train_random_forest,
)
from linesift.learners.linear import logistic_loss_and_grad
from linesift.learners.metrics import Metrics, metrics_from_predictions
from linesift.learners.serialize import dumps_model


def _pad(x, width=27):
    x = np.asarray(x, dtype=float)
    out = np.zeros((len(x), width))
    out[:, :x.shape[1]] = x
    return out


def _xor_dataset():
    x = _pad([[0, 0], [0, 1], [1, 0], [1, 1]])
    y = np.array([0, 1, 1, 0])
    return Dataset(x, y)


def test_forest_fits_xor_exactly():
    data = _xor_dataset()
    model = train_random_forest(data, n_trees=1, max_depth=3, mtry=27,
                                bootstrap=False, seed=5)
    preds = (model.predict_scores(data.vectors) >= 0.5).astype(int)
    assert (preds == data.labels).all()


def test_identical_rows_leaf_is_class_prior():
    x = _pad([[1, 2]] * 4)
    data = Dataset(x, np.array([1, 0, 0, 0]))
    model = train_random_forest(data, n_trees=1, mtry=27, bootstrap=False, seed=0)
    assert model.predict_scores(x[:1])[0] == pytest.approx(0.25)


def test_separable_blobs_perfect_f1():
    rng = np.random.default_rng(3)
    a = rng.normal(loc=-3.0, scale=0.3, size=(20, 2))
    b = rng.normal(loc=3.0, scale=0.3, size=(20, 2))
    data = Dataset(_pad(np.vstack([a, b])), np.array([0] * 20 + [1] * 20))
    model = train_random_forest(data, n_trees=10, mtry=27, seed=1)
    assert evaluate(model, data).f1 == 1.0


def test_single_class_rejected():
    data = Dataset(_pad([[0, 0], [1, 1]]), np.array([1, 1]))
    for trainer in (train_random_forest, train_linear_svm, train_logistic_regression):
        with pytest.raises(DegenerateModelError):
            trainer(data)


@pytest.mark.parametrize("seed", range(50))
def test_single_tree_forest_equals_reference_cart(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 30))
    f = int(rng.integers(2, 5))
    x = rng.integers(0, 4, size=(n, f)).astype(float)
    y = rng.integers(0, 2, size=n)
    if len(np.unique(y)) < 2:
        y[0], y[1] = 0, 1
    data = Dataset(x, y)
    fast = train_random_forest(data, n_trees=1, max_depth=6, min_leaf=1, mtry=f,
                               bootstrap=False, seed=seed)
    slow = SlowCart(max_depth=6, min_leaf=1).fit(x, y)
    probes = np.vstack([x, rng.uniform(-1, 5, size=(40, f))])
    fast_scores = fast.predict_scores(probes)
    slow_scores = slow.predict_scores(probes)
    assert fast_scores.tolist() == slow_scores


def test_svm_separable_pair():
    data = Dataset(_pad([[-1.0], [1.0]]), np.array([0, 1]))
    model = train_linear_svm(data, epochs=50, seed=0)
    scores = model.predict_scores(data.vectors)
    assert scores[0] < 0.5 <= scores[1]


def test_svm_score_monotone_along_weights():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 27))
    y = (x[:, 0] > 0).astype(int)
    model = train_linear_svm(Dataset(x, y), seed=0)
    base = rng.normal(size=27)
    direction = model.weights / model.scaler.std
    lo = model.predict_scores(np.asarray([base]))[0]
    hi = model.predict_scores(np.asarray([base + 2.0 * direction]))[0]
    assert model.link_a > 0
    assert hi > lo


def test_constant_feature_weight_stays_zero():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(40, 27))
    x[:, 5] = 7.0  # constant column
    y = (x[:, 0] > 0).astype(int)
    svm = train_linear_svm(Dataset(x, y), seed=2)
    assert svm.scaler.constant[5]
    assert svm.weights[5] == 0.0
    lr = train_logistic_regression(Dataset(x, y))
    assert lr.weights[5] == 0.0


def test_logreg_orders_separable_pair():
    data = Dataset(_pad([[-1.0], [1.0]]), np.array([0, 1]))
    model = train_logistic_regression(data, epochs=100)
    scores = model.predict_scores(data.vectors)
    assert scores[0] < 0.5 < scores[1]


def test_logreg_zero_epochs_gives_half():
    data = Dataset(_pad([[-1.0], [1.0]]), np.array([0, 1]))
    model = train_logistic_regression(data, epochs=0)
    assert model.predict_scores(data.vectors).tolist() == [0.5, 0.5]


def test_logreg_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(12, 5))
    y = rng.integers(0, 2, size=12).astype(float)
    w = rng.normal(size=5) * 0.5
    b = 0.3
    l2 = 1e-3
    _, grad_w, grad_b = logistic_loss_and_grad(w, b, x, y, l2)
    eps = 1e-6
    for j in range(5):
        w_hi, w_lo = w.copy(), w.copy()
        w_hi[j] += eps
        w_lo[j] -= eps
        hi, _, _ = logistic_loss_and_grad(w_hi, b, x, y, l2)
        lo, _, _ = logistic_loss_and_grad(w_lo, b, x, y, l2)
        numeric = (hi - lo) / (2 * eps)
        assert abs(numeric - grad_w[j]) <= 1e-5 * max(1.0, abs(numeric))
    hi, _, _ = logistic_loss_and_grad(w, b + eps, x, y, l2)
    lo, _, _ = logistic_loss_and_grad(w, b - eps, x, y, l2)
    assert abs((hi - lo) / (2 * eps) - grad_b) <= 1e-5


def test_evaluate_formula_cases():
    m = metrics_from_predictions(
        [1, 1, 1, 0, 0, 0, 0, 0, 0, 1],
        [1, 1, 0, 1, 0, 0, 0, 0, 0, 0])
    assert m.tp == 2 and m.fp == 1 and m.fn == 2 and m.tn == 5
    m2 = Metrics(precision=2 / 3, recall=2 / 3, f1=2 / 3, tp=2, fp=1, fn=1, tn=6)
    got = metrics_from_predictions([1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
                                   [1, 1, 0, 1, 0, 0, 0, 0, 0, 0])
    assert got.precision == pytest.approx(m2.precision)
    assert got.recall == pytest.approx(m2.recall)
    assert got.f1 == pytest.approx(2 / 3)


def test_evaluate_perfect_and_allpositive():
    perfect = metrics_from_predictions([0, 1, 0, 1], [0, 1, 0, 1])
    assert perfect.f1 == 1.0
    allpos = metrics_from_predictions([0, 0, 1, 1], [1, 1, 1, 1])
    assert allpos.precision == 0.5 and allpos.recall == 1.0
    assert allpos.f1 == pytest.approx(2 / 3)


def _train_all(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(40, 27))
    y = (x[:, 0] + x[:, 3] > 0).astype(int)
    data = Dataset(x, y)
    return data, [
        train_random_forest(data, n_trees=5, seed=seed),
        train_linear_svm(data, seed=seed),
        train_logistic_regression(data, seed=seed),
    ]


def test_save_load_roundtrip_preserves_predictions(tmp_path):
    data, models = _train_all()
    probes = np.random.default_rng(9).normal(size=(25, 27))
    for model in models:
        path = tmp_path / f"{model.kind}.model"
        save_model(model, path)
        again = load_model(path)
        assert again.predict_scores(probes).tolist() == model.predict_scores(probes).tolist()
        assert again.predict_scores(data.vectors).tolist() == model.predict_scores(data.vectors).tolist()


def test_seeded_determinism_identical_bytes():
    _, models_a = _train_all(seed=11)
    _, models_b = _train_all(seed=11)
    for a, b in zip(models_a, models_b):
        assert dumps_model(a) == dumps_model(b)


def test_scaler_ignores_rows_outside_training():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(30, 27))
    y = (x[:, 1] > 0).astype(int)
    train_rows = np.arange(20)
    data = Dataset(x[train_rows], y[train_rows])
    before = train_linear_svm(data, seed=3)
    x_poisoned = x.copy()
    x_poisoned[25] += 1000.0  # held-out row changes, training rows do not
    data_again = Dataset(x_poisoned[train_rows], y[train_rows])
    after = train_linear_svm(data_again, seed=3)
    assert dumps_model(before) == dumps_model(after)


def test_predict_tie_is_label_one():
    class Half:
        def predict_scores(self, x):
            return np.full(len(x), 0.5)

    label, score = predict(Half(), np.zeros(27))
    assert label == 1 and score == 0.5
