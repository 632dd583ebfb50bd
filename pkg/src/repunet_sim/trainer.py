"""Desk-scale learning task: Gaussian class blobs, Dirichlet non-IID shards and
multinomial logistic regression trained with mini-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import ConfigError


@dataclass(frozen=True)
class SyntheticDataset:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    seed: int

    def __len__(self):
        return self.labels.shape[0]

    def subset(self, idx) -> "SyntheticDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return SyntheticDataset(self.features[idx], self.labels[idx], self.n_classes, self.seed)


def generate_dataset(n_samples: int, dim_in: int, n_classes: int, seed: int,
                     class_sep: float = 1.0, means: np.ndarray | None = None) -> SyntheticDataset:
    """Unit-variance Gaussian blobs around seeded class means.

    Labels cycle through the classes before shuffling, so every class gets
    at least one sample whenever ``n_samples >= n_classes``.
    """
    if n_samples < n_classes:
        raise ConfigError("trainer.n_samples", f"need at least one sample per class ({n_samples} < {n_classes})")
    rng = np.random.default_rng(seed)
    if means is None:
        means = rng.normal(0.0, class_sep, size=(n_classes, dim_in))
    labels = np.arange(n_samples, dtype=np.int64) % n_classes
    rng.shuffle(labels)
    features = means[labels] + rng.normal(size=(n_samples, dim_in))
    return SyntheticDataset(features, labels, n_classes, seed)


def dirichlet_partition(labels, alpha: float, n_nodes: int, seed: int, max_tries: int = 1000) -> list:
    """Split sample indices across nodes with Dirichlet(alpha) class proportions.

    The partition is disjoint and exhaustive, and redrawn until every node
    holds at least one sample.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    labels = np.asarray(labels)
    if n_nodes == 1:
        return [np.arange(labels.size, dtype=np.int64)]
    if labels.size < n_nodes:
        raise ValueError("fewer samples than nodes")
    rng = np.random.default_rng(seed)
    classes = np.unique(labels)
    for _ in range(max_tries):
        shards = [[] for _ in range(n_nodes)]
        for c in classes:
            idx = np.flatnonzero(labels == c)
            rng.shuffle(idx)
            props = rng.dirichlet(np.full(n_nodes, alpha))
            cuts = (np.cumsum(props)[:-1] * idx.size).astype(np.int64)
            for node, part in enumerate(np.split(idx, cuts)):
                shards[node].extend(part.tolist())
        if all(shards):
            return [np.sort(np.asarray(s, dtype=np.int64)) for s in shards]
    raise RuntimeError(f"could not give every node a sample after {max_tries} draws")


def model_dim(dim_in: int, n_classes: int) -> int:
    return n_classes * (dim_in + 1)


def init_model(dim_in: int, n_classes: int) -> np.ndarray:
    return np.zeros(model_dim(dim_in, n_classes))


def _as_matrix(model, n_classes: int) -> np.ndarray:
    return np.asarray(model, dtype=np.float64).reshape(n_classes, -1)


def predict_proba(model, X, n_classes: int) -> np.ndarray:
    W = _as_matrix(model, n_classes)
    d = W.shape[1] - 1
    logits = X @ W[:, :d].T + W[:, d]
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    return p / p.sum(axis=1, keepdims=True)


def predict(model, X, n_classes: int) -> np.ndarray:
    return predict_proba(model, X, n_classes).argmax(axis=1)


def logistic_loss(model, X, y, n_classes: int) -> float:
    p = predict_proba(model, X, n_classes)
    return float(-np.mean(np.log(np.clip(p[np.arange(len(y)), y], 1e-300, None))))


def logistic_gradient(model, X, y, n_classes: int) -> np.ndarray:
    """Analytic gradient of the mean cross-entropy, flattened like the model."""
    p = predict_proba(model, X, n_classes)
    p[np.arange(len(y)), y] -= 1.0
    p /= len(y)
    grad_w = p.T @ X
    grad_b = p.sum(axis=0)
    return np.hstack([grad_w, grad_b[:, None]]).reshape(-1)


def local_train(model, X, y, epochs: int, lr: float, n_classes: int, batch_size: int = 32) -> np.ndarray:
    """Mini-batch gradient descent in fixed row order; returns a new vector."""
    W = np.ascontiguousarray(_as_matrix(model, n_classes).copy())
    if epochs <= 0 or lr == 0 or len(y) == 0:
        return W.reshape(-1)
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    for _ in range(epochs):
        kernels.sgd_epoch(W, X, y, float(lr), int(batch_size))
    return W.reshape(-1)


def macro_f1(y_true, y_pred, n_classes: int) -> float:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValueError("empty evaluation set")
    scores = []
    for c in range(n_classes):
        tp = np.count_nonzero((y_pred == c) & (y_true == c))
        fp = np.count_nonzero((y_pred == c) & (y_true != c))
        fn = np.count_nonzero((y_pred != c) & (y_true == c))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def evaluate_f1(model, test_set: SyntheticDataset) -> float:
    return macro_f1(test_set.labels, predict(model, test_set.features, test_set.n_classes), test_set.n_classes)
