"""Reputation computation: dynamic metric weights, history-weighted update and
feedback fusion, plus the per-neighbor state a node keeps between rounds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MetricVector
from .metrics import FractionHistory, LatencyHistory

DEFAULT_INITIAL_REPUTATION = 0.6


def initial_reputation(default: float = DEFAULT_INITIAL_REPUTATION) -> float:
    return float(default)


def apply_weight_floor(weights, floor: float) -> np.ndarray:
    """Lift every weight below ``floor`` to exactly ``floor`` and rescale the
    rest so the total stays 1. Repeats until no weight sits below the floor."""
    w = np.asarray(weights, dtype=np.float64)
    w = w / w.sum()
    n = w.size
    if floor <= 0:
        return w
    if floor * n > 1.0 + 1e-12:
        raise ValueError(f"weight floor {floor} too large for {n} weights")
    pinned = np.zeros(n, dtype=bool)
    while True:
        low = (~pinned) & (w < floor)
        if not low.any():
            break
        pinned |= low
        free = ~pinned
        budget = 1.0 - floor * pinned.sum()
        w[pinned] = floor
        mass = w[free].sum()
        if mass > 0:
            w[free] *= budget / mass
        else:
            w[free] = budget / max(free.sum(), 1)
    return w


def dynamic_weights(current: MetricVector, reference_means: MetricVector, floor: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Weights proportional to each metric's absolute deviation from its reference.

    When nothing deviates the weights are drawn at random from ``rng`` so the
    score does not lock onto one metric.
    """
    d = np.abs(current.as_array() - reference_means.as_array())
    total = d.sum()
    if total > 0.0:
        w = d / total
    else:
        w = rng.random(4)
        w /= w.sum()
    return apply_weight_floor(w, floor)


def intermediate_score(metrics: MetricVector, weights) -> float:
    score = float(np.dot(metrics.as_array(), np.asarray(weights, dtype=np.float64)))
    return min(1.0, max(0.0, score))


@dataclass(frozen=True)
class HistoryWeights:
    omega_current: float = 0.4
    decay: float = 0.5
    window: int = 5

    def __post_init__(self):
        if not (0.0 < self.omega_current <= 1.0):
            raise ValueError("omega_current must be in (0, 1]")
        if not (0.0 < self.decay < 1.0):
            raise ValueError("decay must be in (0, 1)")
        if self.window < 1:
            raise ValueError("window must be >= 1")

    def past_weights(self, n_past: int) -> np.ndarray:
        """Weights for the last ``n_past`` values, oldest first, summing to 1 - omega_current."""
        n = min(n_past, self.window)
        if n == 0:
            return np.zeros(0)
        ages = np.arange(n, 0, -1)
        raw = self.decay ** (ages - 1)
        return raw * ((1.0 - self.omega_current) / raw.sum())


def weighted_history_update(past, score: float, hw: HistoryWeights = HistoryWeights()) -> float:
    past = list(past)
    if not past:
        return float(score)
    window = np.asarray(past[-hw.window:], dtype=np.float64)
    w = hw.past_weights(len(window))
    r = float(w @ window) + hw.omega_current * score
    lo = min(float(window.min()), score)
    hi = max(float(window.max()), score)
    return min(hi, max(lo, r))


def fuse_feedback(local: float, values, eta: float) -> float:
    values = list(values)
    if not values:
        return float(local)
    fused = eta * local + (1.0 - eta) * float(np.mean(values))
    lo, hi = sorted((local, float(np.mean(values))))
    return min(hi, max(lo, fused))


@dataclass
class NeighborRecord:
    """Everything a node remembers about one neighbor, one entry per round."""

    rounds: list = field(default_factory=list)
    metrics: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    reputations: list = field(default_factory=list)
    feedback: list = field(default_factory=list)
    message_counts: list = field(default_factory=list)
    trusted: list = field(default_factory=list)
    fraction: FractionHistory = field(default_factory=FractionHistory)
    latency: LatencyHistory = field(default_factory=LatencyHistory)
    last_similarity: float = 1.0

    def reference_means(self, round: int, current: MetricVector) -> MetricVector:
        """Baseline the current metrics are compared against.

        Before round 2 only the round-0 observation is used; afterwards the mean
        over completed rounds in which the neighbor was trusted (all completed
        rounds if it never was), so a sustained attack does not become the norm.
        """
        prior = [(m, ok) for r, m, ok in zip(self.rounds, self.metrics, self._trusted_flags()) if r < round]
        if not prior:
            return current
        if round < 2:
            return prior[0][0]
        chosen = [m for m, ok in prior if ok] or [m for m, _ in prior]
        return MetricVector.from_array(np.mean([m.as_array() for m in chosen], axis=0))

    def _trusted_flags(self) -> list:
        if len(self.trusted) == len(self.rounds):
            return self.trusted
        return [True] * len(self.rounds)

    @property
    def reputation(self) -> float | None:
        return self.reputations[-1] if self.reputations else None


class ReputationState:
    """Per-neighbor histories owned by a single node."""

    def __init__(self, fraction_lambda: float = 0.7, mu_smooth: float = 0.7,
                 tau: float | None = None, delta: float = 0.05, bootstrap_window: int = 2):
        self._records: dict = {}
        self._fraction_lambda = fraction_lambda
        self._latency_kw = dict(mu_smooth=mu_smooth, tau=tau, delta=delta,
                                bootstrap_window=bootstrap_window)

    def record(self, neighbor) -> NeighborRecord:
        rec = self._records.get(neighbor)
        if rec is None:
            rec = NeighborRecord(
                fraction=FractionHistory(lam=self._fraction_lambda),
                latency=LatencyHistory(**self._latency_kw),
            )
            self._records[neighbor] = rec
        return rec

    def __contains__(self, neighbor) -> bool:
        return neighbor in self._records

    def neighbors(self):
        return list(self._records)

    def reputation_history(self, neighbor) -> list:
        rec = self._records.get(neighbor)
        return list(rec.reputations) if rec else []

    def reputation(self, neighbor, default: float = DEFAULT_INITIAL_REPUTATION) -> float:
        rec = self._records.get(neighbor)
        if rec is None or not rec.reputations:
            return default
        return rec.reputations[-1]


def update_reputation(history: ReputationState, neighbor, score: float,
                      hw: HistoryWeights = HistoryWeights()) -> float:
    return weighted_history_update(history.reputation_history(neighbor), score, hw)
