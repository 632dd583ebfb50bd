"""Pure numpy versions of the hot kernels. Same signatures as the compiled ``_kernels``."""

import numpy as np


def similarity_stats(a, b):
    """Return (dot, |a|^2, |b|^2, cov, var_a, var_b, euclidean, manhattan).

    cov/var are unnormalized sums over centered coordinates, enough for Pearson.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = a - b
    ac = a - a.mean()
    bc = b - b.mean()
    return (
        float(a @ b),
        float(a @ a),
        float(b @ b),
        float(ac @ bc),
        float(ac @ ac),
        float(bc @ bc),
        float(np.sqrt(diff @ diff)),
        float(np.abs(diff).sum()),
    )


def fraction_above(values, threshold):
    """Fraction of entries whose absolute value strictly exceeds ``threshold``."""
    values = np.asarray(values, dtype=np.float64)
    return float(np.count_nonzero(np.abs(values) > threshold)) / values.size


def sgd_epoch(W, X, y, lr, batch_size):
    """One pass of mini-batch gradient descent on multinomial logistic loss, in place.

    W is (C, d+1) with the bias in the last column; batches run in row order.
    """
    n = X.shape[0]
    d = X.shape[1]
    for start in range(0, n, batch_size):
        xb = X[start:start + batch_size]
        yb = y[start:start + batch_size]
        m = xb.shape[0]
        logits = xb @ W[:, :d].T + W[:, d]
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        p[np.arange(m), yb] -= 1.0
        p /= m
        W[:, :d] -= lr * (p.T @ xb)
        W[:, d] -= lr * p.sum(axis=0)
    return W
