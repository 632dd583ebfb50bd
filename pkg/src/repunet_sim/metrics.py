"""Per-neighbor behaviour metrics: model similarity, fraction of parameters
changed, arrival latency and incoming message flow.

All scores live in [0, 1] with 1 meaning expected behaviour. Functions here are
pure: they read a history object and return a score; the caller appends the
new observation to the history afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import as_model_vector, check_same_dim

DIVISION_GUARD = 1e-6


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


def _upper_sigmoid_tail(x: float) -> float:
    """1 - 1/(1 + e^-x), written as 1/(1 + e^x) without overflow."""
    if x > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(x))


# -- model similarity ---------------------------------------------------------

@dataclass(frozen=True)
class SimilarityWeights:
    cosine: float = 0.25
    euclidean: float = 0.25
    manhattan: float = 0.25
    pearson: float = 0.25

    def __post_init__(self):
        vals = self.as_tuple()
        if any(v < 0 for v in vals):
            raise ValueError("similarity weights must be >= 0")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ValueError(f"similarity weights must sum to 1, got {sum(vals)!r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cosine, self.euclidean, self.manhattan, self.pearson)


def _correlation_similarity(cross: float, sa: float, sb: float) -> float:
    # both vectors degenerate -> identical, exactly one -> unrelated
    if sa == 0.0 and sb == 0.0:
        return 1.0
    if sa == 0.0 or sb == 0.0:
        return 0.0
    c = cross / (math.sqrt(sa) * math.sqrt(sb))
    c = min(1.0, max(-1.0, c))
    return (1.0 + c) / 2.0


def similarity_components(local, remote) -> tuple[float, float, float, float]:
    """Per-measure similarities (cosine, euclidean, manhattan, pearson), each in [0, 1]."""
    a = as_model_vector(local)
    b = as_model_vector(remote)
    check_same_dim(a, b)
    dot, na, nb, cov, va, vb, euclid, manhattan = kernels.similarity_stats(a, b)
    dim = a.shape[0]
    return (
        _correlation_similarity(dot, na, nb),
        1.0 / (1.0 + euclid / math.sqrt(dim)),
        1.0 / (1.0 + manhattan / dim),
        _correlation_similarity(cov, va, vb),
    )


def model_similarity(local, remote, gamma: SimilarityWeights = SimilarityWeights()) -> float:
    comps = similarity_components(local, remote)
    return _clip01(sum(g * s for g, s in zip(gamma.as_tuple(), comps)))


# -- fraction of parameters changed -------------------------------------------

@dataclass
class FractionHistory:
    f_values: list = field(default_factory=list)
    t_values: list = field(default_factory=list)
    prev_final: float = 1.0
    lam: float = 0.7

    def record(self, f: float, t: float, final: float) -> None:
        self.f_values.append(float(f))
        self.t_values.append(float(t))
        self.prev_final = float(final)


FRACTION_REFERENCES = ("own", "threshold", "literal")


def change_observation(remote, round_start, local_update, quantile: float = 75.0,
                       mode: str = "own") -> tuple[float, float]:
    """Return ``(f, t)`` for one received model.

    The neighbor's change is measured against ``round_start``, the evaluator's
    model at the start of the round. ``mode`` picks the threshold:

    * ``own``: ``f`` counts the neighbor's parameters that moved further than the
      75th percentile of the evaluator's own local update; ``t`` is the 75th
      percentile of the neighbor's absolute change.
    * ``threshold``: same ``f``; ``t`` is the evaluator's own percentile, the
      threshold actually used for counting.
    * ``literal``: both come from the neighbor's change alone, so ``f`` is close
      to 0.25 by construction and only ``t`` carries signal.
    """
    remote = as_model_vector(remote)
    start = as_model_vector(round_start)
    own = as_model_vector(local_update)
    check_same_dim(remote, start)
    check_same_dim(own, start)
    delta = remote - start
    t_remote = float(np.percentile(np.abs(delta), quantile))
    if mode == "literal":
        return kernels.fraction_above(delta, t_remote), t_remote
    reference = float(np.percentile(np.abs(own), quantile))
    f = kernels.fraction_above(delta, reference)
    if mode == "own":
        return f, t_remote
    if mode == "threshold":
        return f, reference
    raise ValueError(f"unknown fraction reference {mode!r}")


def _anomaly_score(current: float, mean: float, limit: float) -> float:
    if current <= limit:
        return 1.0
    penalty = abs(current - mean) / max(mean, DIVISION_GUARD)
    return _upper_sigmoid_tail(penalty)


def _fraction_limits(hist: FractionHistory) -> tuple[float, float, float, float]:
    f = np.asarray(hist.f_values, dtype=np.float64)
    t = np.asarray(hist.t_values, dtype=np.float64)
    mu_f, mu_t = float(f.mean()), float(t.mean())
    return mu_f, (mu_f + float(f.std())) * 1.05, mu_t, (mu_t + float(t.std())) * 1.10


def fraction_within_limits(hist: FractionHistory, f_current: float, t_current: float) -> bool:
    """True when neither ``f`` nor ``t`` exceeds its anomaly limit (always true on an empty history)."""
    if not hist.f_values:
        return True
    _, limit_f, _, limit_t = _fraction_limits(hist)
    return f_current <= limit_f and t_current <= limit_t


def fraction_changed_score(hist: FractionHistory, f_current: float, t_current: float) -> float:
    if hist.f_values:
        mu_f, limit_f, mu_t, limit_t = _fraction_limits(hist)
        s_f = _anomaly_score(f_current, mu_f, limit_f)
        s_t = _anomaly_score(t_current, mu_t, limit_t)
        current = 0.5 * s_f + 0.5 * s_t
    else:
        # nothing to compare against yet
        current = 1.0
    return _clip01(hist.lam * current + (1.0 - hist.lam) * hist.prev_final)


def missing_model_penalty(prev_score: float) -> float:
    return prev_score * 0.5


# -- arrival latency ----------------------------------------------------------

@dataclass
class LatencyHistory:
    samples: list = field(default_factory=list)
    prev_smoothed: float = 1.0
    mu_smooth: float = 0.7
    tau: float | None = None
    delta: float = 0.05
    bootstrap_window: int = 2

    def record(self, latency: float, smoothed: float) -> None:
        self.samples.append(float(latency))
        self.prev_smoothed = float(smoothed)


def measure_latency(arrival_time: float, model_round: int, current_round: int, round_starts) -> float:
    """Latency of a received model, measured from the start of the round it belongs to."""
    origin = round_starts[current_round] if model_round >= current_round else round_starts[model_round]
    return max(0.0, arrival_time - origin)


def latency_score(hist: LatencyHistory, latency_now: float, round: int,
                  attack_from_round_one: bool = False) -> float:
    if latency_now < 0:
        raise ValueError("latency must be >= 0")
    if hist.samples:
        # round-0 baseline for attacks that start immediately
        reference = hist.samples[:1] if attack_from_round_one else hist.samples
        mean = float(np.mean(reference))
        if latency_now <= 1.5 * mean:
            raw = 1.0
        else:
            tau = hist.tau if hist.tau is not None else max(1.0, mean)
            raw = _upper_sigmoid_tail(abs(latency_now - mean) / tau)
    else:
        raw = 1.0
    if min(round, len(hist.samples)) < hist.bootstrap_window:
        return _clip01(raw * (1.0 - hist.delta))
    return _clip01(hist.mu_smooth * raw + (1.0 - hist.mu_smooth) * hist.prev_smoothed)


# -- incoming message flow ----------------------------------------------------

@dataclass(frozen=True)
class FlowParams:
    epsilon: float = 1e-6
    extra_penalty: float = 0.5
    recurrence_window: int = 3
    recurrence_threshold: float = 0.5
    recurrence_penalty: float = 0.8
    floor_base: float = 0.05
    floor_rounds: int = 10
    smoothing: tuple = (0.6, 0.3, 0.1)


@dataclass
class FlowHistory:
    """Message counts seen by one evaluator.

    ``current`` maps (sender, receiver) to this round's count, ``previous`` holds
    every pair's count from the round before, ``scores`` the smoothed score
    history per pair (oldest first).
    """

    current: dict = field(default_factory=dict)
    previous: list = field(default_factory=list)
    scores: dict = field(default_factory=dict)
    params: FlowParams = field(default_factory=FlowParams)

    def record(self, pair, score: float) -> None:
        self.scores.setdefault(pair, []).append(float(score))


def _trailing_low(history, threshold: float) -> int:
    n = 0
    for s in reversed(history):
        if s >= threshold:
            break
        n += 1
    return n


def message_flow_score(flow: FlowHistory, pair, round: int) -> float:
    p = flow.params
    history = flow.scores.get(pair, [])
    if round < 1 or not flow.previous:
        return 1.0
    prev = np.asarray(flow.previous, dtype=np.float64)
    p25 = float(np.percentile(prev, 25))
    sigma = float(prev.std())
    mu = float(prev.mean())
    m = float(flow.current.get(pair, 0))

    rel_incr = max((m - p25) / max(p25, 1.0), 0.0)
    margin = (sigma + 1.0) / (math.log(1.0 + p25) + 1.0)
    s = 1.0
    if rel_incr > margin:
        ratio = math.log(1.0 + rel_incr - margin) / (math.log(1.0 + margin) + p.epsilon)
        s *= math.exp(-ratio * ratio)
        if m > mu:
            amplification = 1.0 + (m - mu) / (mu + p.epsilon)
            s *= math.exp(-(p.extra_penalty * amplification) ** 2)

    w = p.recurrence_window
    if len(history) >= w and all(h < p.recurrence_threshold for h in history[-w:]):
        s *= p.recurrence_penalty

    low = _trailing_low(history, p.recurrence_threshold)
    f_min = p.floor_base * (1.0 - min(1.0, low / p.floor_rounds))
    s = max(s, f_min)

    values = [s] + list(reversed(history[-(len(p.smoothing) - 1):])) if len(p.smoothing) > 1 else [s]
    weights = p.smoothing[:len(values)]
    s = sum(wi * vi for wi, vi in zip(weights, values)) / sum(weights)
    return _clip01(s)
