"""Reputation-gated, reputation-weighted model averaging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, as_model_vector


@dataclass(frozen=True)
class AggregationPolicy:
    exclusion_threshold: float = 0.6
    include_self: bool = True
    self_weight: float = 1.0
    weight_exponent: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.exclusion_threshold <= 1.0):
            raise ValueError("exclusion_threshold must be in [0, 1]")

    def admits(self, reputation: float) -> bool:
        return reputation >= self.exclusion_threshold

    def weight(self, reputation: float) -> float:
        return reputation ** self.weight_exponent


def filter_models(messages, reputations, policy: AggregationPolicy = AggregationPolicy()):
    """Keep messages whose sender reputation clears the threshold.

    Returns a list of ``(message, weight)`` in the input order. A sender missing
    from ``reputations`` is an error: callers seed new senders with the initial
    reputation first.
    """
    kept = []
    for msg in messages:
        rep = reputations[msg.sender]
        if policy.admits(rep):
            kept.append((msg, policy.weight(rep)))
    return kept


def reputation_weighted_aggregate(local, accepted, policy: AggregationPolicy = AggregationPolicy()) -> np.ndarray:
    local = as_model_vector(local)
    vectors = []
    weights = []
    if policy.include_self:
        vectors.append(local)
        weights.append(policy.self_weight)
    for vec, w in accepted:
        vec = as_model_vector(vec)
        if vec.shape != local.shape:
            raise DimensionError(f"dimension mismatch: {vec.shape[0]} vs {local.shape[0]}")
        if w <= 0:
            raise ValueError("aggregation weights must be > 0")
        vectors.append(vec)
        weights.append(float(w))
    if not accepted or not vectors:
        return local.copy()
    w = np.asarray(weights)
    stacked = np.stack(vectors)
    out = (w @ stacked) / w.sum()
    # keep the result inside each coordinate's hull despite rounding
    return np.clip(out, stacked.min(axis=0), stacked.max(axis=0))
