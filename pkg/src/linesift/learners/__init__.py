from .dataset import Dataset  # noqa: F401
from .linear import (  # noqa: F401
    LinearSvmModel,
    LogisticRegressionModel,
    Scaler,
    train_linear_svm,
    train_logistic_regression,
)
from .metrics import Metrics, evaluate  # noqa: F401
from .serialize import load_model, save_model  # noqa: F401
from .tree import CartTree, RandomForestModel, train_cart, train_random_forest  # noqa: F401

DEFAULT_HYPERPARAMS = {
    "random_forest": {"n_trees": 100, "max_depth": 12, "min_leaf": 1,
                      "mtry": 6, "bootstrap": True},
    "linear_svm": {"lambda_": 1e-3, "epochs": 50, "batch_size": 64},
    "logistic_regression": {"lr": 0.1, "epochs": 200, "l2": 1e-4},
}


def train_model(kind: str, data, params: dict | None = None, seed: int = 0):
    """Uniform training dispatch used by the committee."""
    merged = dict(DEFAULT_HYPERPARAMS[kind])
    merged.update(params or {})
    if kind == "random_forest":
        return train_random_forest(data, seed=seed, **merged)
    if kind == "linear_svm":
        return train_linear_svm(data, seed=seed, **merged)
    if kind == "logistic_regression":
        return train_logistic_regression(data, seed=seed, **merged)
    raise ValueError(f"unknown model kind {kind!r}")


def predict(model, vector):
    """(label, score) for one feature vector; label = score >= 0.5."""
    import numpy as np

    score = float(model.predict_scores(np.asarray([vector], dtype=float))[0])
    return (1 if score >= 0.5 else 0), score
