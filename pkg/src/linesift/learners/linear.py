"""Linear models: hinge-loss SVM via stochastic subgradient descent, and
logistic regression via batch gradient descent.

Both standardize features with a scaler fit on the training rows only.
Constant features are flagged and scale to zero, so their weights never move.
The SVM calibrates its margin through a logistic link fit on the training
margins, giving every committee member a uniform [0, 1] score space.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateModelError
from .dataset import Dataset


class Scaler:
    def __init__(self, mean, std, constant):
        self.mean = np.asarray(mean, dtype=float)
        self.std = np.asarray(std, dtype=float)
        self.constant = np.asarray(constant, dtype=bool)

    @classmethod
    def fit(cls, x: np.ndarray) -> "Scaler":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        constant = std == 0.0
        std = np.where(constant, 1.0, std)
        return cls(mean, std, constant)

    def transform(self, x: np.ndarray) -> np.ndarray:
        scaled = (np.asarray(x, dtype=float) - self.mean) / self.std
        if self.constant.any():
            scaled[:, self.constant] = 0.0
        return scaled

    def to_payload(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(),
                "constant": self.constant.astype(int).tolist()}

    @classmethod
    def from_payload(cls, payload: dict) -> "Scaler":
        return cls(payload["mean"], payload["std"],
                   np.asarray(payload["constant"], dtype=bool))


def _check_two_classes(data: Dataset):
    if len(np.unique(data.labels)) < 2:
        raise DegenerateModelError("training data has a single class")


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _fit_logistic_link(margins: np.ndarray, labels: np.ndarray,
                       iters=100, l2=1e-4) -> tuple[float, float]:
    """Fit p = sigmoid(a*m + c) on training margins by damped Newton steps.

    The small L2 term keeps the slope finite when the margins separate the
    classes perfectly.
    """
    y = labels.astype(float)
    scale = max(1.0, float(np.abs(margins).max())) if len(margins) else 1.0
    m = margins / scale
    n = len(m)
    a, c = 1.0, 0.0
    for _ in range(iters):
        p = _sigmoid(a * m + c)
        err = p - y
        grad_a = float(err @ m) / n + l2 * a
        grad_c = float(err.mean())
        s = p * (1.0 - p)
        h_aa = float(s @ (m * m)) / n + l2
        h_ac = float(s @ m) / n
        h_cc = float(s.mean()) + 1e-12
        det = h_aa * h_cc - h_ac * h_ac
        if det <= 1e-12:
            break
        step_a = (h_cc * grad_a - h_ac * grad_c) / det
        step_c = (h_aa * grad_c - h_ac * grad_a) / det
        a -= step_a
        c -= step_c
        if abs(step_a) < 1e-10 and abs(step_c) < 1e-10:
            break
    return a / scale, c


class LinearSvmModel:
    kind = "linear_svm"

    def __init__(self, weights, bias, lambda_, epochs, batch_size, seed, scaler,
                 link_a, link_c):
        self.weights = np.asarray(weights, dtype=float)
        self.bias = float(bias)
        self.lambda_ = lambda_
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.scaler = scaler
        self.link_a = link_a
        self.link_c = link_c

    def margins(self, x: np.ndarray) -> np.ndarray:
        return self.scaler.transform(x) @ self.weights + self.bias

    def predict_scores(self, x: np.ndarray) -> np.ndarray:
        return _sigmoid(self.link_a * self.margins(x) + self.link_c)

    def to_payload(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias,
                "lambda_": self.lambda_, "epochs": self.epochs,
                "batch_size": self.batch_size, "seed": self.seed,
                "scaler": self.scaler.to_payload(),
                "link_a": self.link_a, "link_c": self.link_c}

    @classmethod
    def from_payload(cls, payload: dict) -> "LinearSvmModel":
        return cls(payload["weights"], payload["bias"], payload["lambda_"],
                   payload["epochs"], payload["batch_size"], payload["seed"],
                   Scaler.from_payload(payload["scaler"]),
                   payload["link_a"], payload["link_c"])


def _class_weights(labels: np.ndarray, balanced: bool) -> np.ndarray:
    """Per-example weights; inverse class frequency when balanced."""
    if not balanced:
        return np.ones(len(labels))
    n = len(labels)
    n_pos = int(labels.sum())
    n_neg = n - n_pos
    w_pos = n / (2.0 * n_pos)
    w_neg = n / (2.0 * n_neg)
    return np.where(labels == 1, w_pos, w_neg)


def train_linear_svm(data: Dataset, lambda_=1e-3, epochs=50, batch_size=64,
                     seed=0, balanced=False) -> LinearSvmModel:
    """Mini-batch stochastic subgradient descent on the L2-regularized hinge
    loss, with the 1/(lambda*t) step schedule and the projection onto the
    1/sqrt(lambda) ball that keeps the early huge steps bounded.

    The bias rides along as a weight on a constant input. `balanced` applies
    inverse-frequency example weights so the minority class is not sacrificed
    on skewed line data.
    """
    _check_two_classes(data)
    scaler = Scaler.fit(data.vectors)
    x = np.hstack([scaler.transform(data.vectors),
                   np.ones((len(data), 1))])  # constant column carries the bias
    y = np.where(data.labels == 1, 1.0, -1.0)
    sample_w = _class_weights(data.labels, balanced)
    n, f = x.shape
    w = np.zeros(f)
    radius = 1.0 / np.sqrt(lambda_)
    rng = np.random.Generator(np.random.PCG64(seed))
    n_batches = (n + batch_size - 1) // batch_size
    total_steps = epochs * n_batches
    tail_start = max(1, total_steps - total_steps // 4)  # average the last quarter
    w_tail = np.zeros(f)
    tail_count = 0
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            t += 1
            eta = 1.0 / (lambda_ * t)
            batch = order[start:start + batch_size]
            xb, yb, wb = x[batch], y[batch], sample_w[batch]
            violating = yb * (xb @ w) < 1.0
            w *= (1.0 - eta * lambda_)
            if violating.any():
                wy = wb[violating] * yb[violating]
                w += (eta / len(batch)) * (wy @ xb[violating])
            norm = float(np.linalg.norm(w))
            if norm > radius:
                w *= radius / norm
            if t >= tail_start:
                w_tail += w
                tail_count += 1
    if tail_count:
        w = w_tail / tail_count
    weights, bias = w[:-1], float(w[-1])
    margins = x[:, :-1] @ weights + bias
    link_a, link_c = _fit_logistic_link(margins, data.labels)
    return LinearSvmModel(weights, bias, lambda_, epochs, batch_size, seed, scaler,
                          link_a, link_c)


def logistic_loss_and_grad(w, b, x, y, l2, sample_w=None):
    """Mean log-loss with L2 penalty on weights, plus analytic gradients."""
    if sample_w is None:
        sample_w = np.ones(len(y))
    z = x @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    per_row = -(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    loss = float(np.mean(sample_w * per_row) + 0.5 * l2 * float(w @ w))
    err = sample_w * (p - y)
    grad_w = x.T @ err / len(y) + l2 * w
    grad_b = float(err.mean())
    return loss, grad_w, grad_b


class LogisticRegressionModel:
    kind = "logistic_regression"

    def __init__(self, weights, bias, lr, epochs, l2, seed, scaler):
        self.weights = np.asarray(weights, dtype=float)
        self.bias = float(bias)
        self.lr = lr
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed
        self.scaler = scaler

    def predict_scores(self, x: np.ndarray) -> np.ndarray:
        return _sigmoid(self.scaler.transform(x) @ self.weights + self.bias)

    def to_payload(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias, "lr": self.lr,
                "epochs": self.epochs, "l2": self.l2, "seed": self.seed,
                "scaler": self.scaler.to_payload()}

    @classmethod
    def from_payload(cls, payload: dict) -> "LogisticRegressionModel":
        return cls(payload["weights"], payload["bias"], payload["lr"],
                   payload["epochs"], payload["l2"], payload["seed"],
                   Scaler.from_payload(payload["scaler"]))


def train_logistic_regression(data: Dataset, lr=0.1, epochs=200, l2=1e-4,
                              seed=0, balanced=False) -> LogisticRegressionModel:
    """Full-batch gradient descent on the log loss; deterministic."""
    _check_two_classes(data)
    scaler = Scaler.fit(data.vectors)
    x = scaler.transform(data.vectors)
    y = data.labels.astype(float)
    sample_w = _class_weights(data.labels, balanced)
    w = np.zeros(x.shape[1])
    b = 0.0
    for _ in range(epochs):
        _, grad_w, grad_b = logistic_loss_and_grad(w, b, x, y, l2, sample_w)
        w -= lr * grad_w
        b -= lr * grad_b
    return LogisticRegressionModel(w, b, lr, epochs, l2, seed, scaler)
