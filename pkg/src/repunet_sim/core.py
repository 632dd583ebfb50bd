"""Shared domain types: model vectors, messages, metric vectors, clock and RNG."""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    """Raised when two model vectors that must share a shape do not."""


class ConfigError(ValueError):
    """Invalid configuration value. ``key`` holds the dotted path of the offending field."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def as_model_vector(values) -> np.ndarray:
    """Coerce ``values`` to a flat float64 parameter vector, rejecting empty or non-finite input."""
    vec = np.ascontiguousarray(values, dtype=np.float64).reshape(-1)
    if vec.size < 1:
        raise DimensionError("model vector must have dim >= 1")
    if not np.all(np.isfinite(vec)):
        raise ValueError("model vector contains NaN or Inf")
    return vec


def check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


def node_label(node: int) -> str:
    """Render an integer node id as the host:port label used in exports."""
    return f"192.168.51.{node + 1}:{45000 + node}"


@dataclass(frozen=True)
class ModelMessage:
    sender: int
    model_round: int
    params: np.ndarray
    send_time: float
    arrival_time: float

    def __post_init__(self):
        if self.model_round < 0:
            raise ValueError("model_round must be >= 0")
        if self.arrival_time < self.send_time:
            raise ValueError("arrival_time precedes send_time")


@dataclass(frozen=True)
class MetricVector:
    """Normalized behaviour scores for one neighbor in one round; 1 is optimal."""

    similarity: float
    fraction: float
    latency: float
    messages: float

    FIELDS = ("similarity", "fraction", "latency", "messages")

    def __post_init__(self):
        for name in self.FIELDS:
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"metric {name}={v!r} outside [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.array([self.similarity, self.fraction, self.latency, self.messages])

    @classmethod
    def from_array(cls, arr) -> "MetricVector":
        return cls(*(float(x) for x in arr))


class SimClock:
    """Virtual clock in simulated seconds. Only moves forward."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise ValueError("cannot advance clock by a negative amount")
        self._now += seconds
        return self._now

    def advance_to(self, t: float) -> float:
        if t > self._now:
            self._now = float(t)
        return self._now


def clock_now(clock: SimClock) -> float:
    return clock.now()


def _name_key(name) -> int:
    if isinstance(name, (int, np.integer)):
        return int(name)
    return zlib.crc32(str(name).encode("utf-8"))


class RngStream:
    """Seeded source of independent named substreams.

    ``stream("attack")`` or ``stream("node", 3, "weights")`` always yields a
    generator with the same state for the same seed and names, no matter how
    many other streams were drawn before it.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    def stream(self, *names) -> np.random.Generator:
        key = tuple(_name_key(n) for n in names)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        return np.random.Generator(np.random.PCG64(ss))
