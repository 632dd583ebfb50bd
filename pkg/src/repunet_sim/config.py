"""Scenario configuration: nested dataclasses, YAML parsing with strict key and
range checks, and serialization back to YAML."""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .core import ConfigError
from .metrics import FRACTION_REFERENCES, FlowParams, SimilarityWeights
from .reputation import HistoryWeights

SCHEMA_VERSION = 1

TOPOLOGY_KINDS = ("fully", "ring", "random")
ATTACK_KINDS = ("none", "poisoning", "delayer", "flooding")

# poisoning: noise std as a multiple of the attacker's honest update norm
# delayer: seconds added to dispatch time; flooding: message multiplier
DEFAULT_INTENSITY = {"none": 0.0, "poisoning": 5.0, "delayer": 20.0, "flooding": 10.0}


@dataclass
class TopologyConfig:
    kind: str = "fully"
    edge_prob: float = 0.3


@dataclass
class AttackConfig:
    kind: str = "none"
    attacker_fraction: float = 0.3
    start_round: int = 7
    interval: int = 1
    end_round: Optional[int] = None
    intensity: Optional[float] = None

    def effective_intensity(self) -> float:
        return DEFAULT_INTENSITY[self.kind] if self.intensity is None else self.intensity

    def is_active(self, round: int) -> bool:
        if self.kind == "none" or round < self.start_round:
            return False
        if self.end_round is not None and round > self.end_round:
            return False
        return (round - self.start_round) % self.interval == 0


@dataclass
class FlowConfig:
    epsilon: float = 1e-6
    extra_penalty: float = 0.5
    recurrence_window: int = 3
    recurrence_threshold: float = 0.5
    recurrence_penalty: float = 0.8
    floor_base: float = 0.05
    floor_rounds: int = 10
    smoothing: list = field(default_factory=lambda: [0.6, 0.3, 0.1])

    def params(self) -> FlowParams:
        values = dataclasses.asdict(self)
        values["smoothing"] = tuple(self.smoothing)
        return FlowParams(**values)


@dataclass
class ReputationConfig:
    enabled: bool = True
    threshold: float = 0.6
    initial: float = 0.6
    eta: float = 0.5
    feedback: bool = True
    gate_baselines: bool = True
    fraction_reference: str = "own"
    fraction_lambda: float = 0.7
    mu_smooth: float = 0.7
    tau: Optional[float] = None
    delta: float = 0.05
    bootstrap_window: int = 2
    gamma: list = field(default_factory=lambda: [0.25, 0.25, 0.25, 0.25])
    weight_floor: float = 0.05
    history_window: int = 5
    history_decay: float = 0.5
    omega_current: float = 0.4
    flow: FlowConfig = field(default_factory=FlowConfig)

    def similarity_weights(self) -> SimilarityWeights:
        return SimilarityWeights(*self.gamma)

    def history_weights(self) -> HistoryWeights:
        return HistoryWeights(self.omega_current, self.history_decay, self.history_window)


@dataclass
class TrainerConfig:
    dim_in: int = 16
    n_classes: int = 10
    samples_per_node: int = 200
    lr: float = 0.1
    epochs: int = 1
    batch_size: int = 32
    class_sep: float = 1.0
    test_fraction: float = 0.2


@dataclass
class NetworkConfig:
    base_latency: float = 1.0
    jitter: float = 0.5
    base_messages: int = 3


@dataclass
class ScenarioConfig:
    name: str
    seed: int
    schema_version: int = SCHEMA_VERSION
    n_nodes: int = 10
    rounds: int = 20
    timeout_s: float = 30.0
    dirichlet_alpha: float = 0.5
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    reputation: ReputationConfig = field(default_factory=ReputationConfig)
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    export_dir: str = "runs"

    def validate(self) -> "ScenarioConfig":
        _validate(self)
        return self

    def replace(self, **overrides) -> "ScenarioConfig":
        """Copy with dotted-path overrides, e.g. ``replace(**{"attack.kind": "delayer"})``."""
        data = to_dict(self)
        for key, value in overrides.items():
            set_path(data, key, value)
        return from_dict(data)


# -- generic dict <-> dataclass ------------------------------------------------

def _coerce(value, tp, path: str):
    origin = typing.get_origin(tp)
    if origin is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _coerce(value, args[0], path)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(path, f"expected a mapping, got {type(value).__name__}")
        return _build(tp, value, path)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if tp is list or origin is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(path, f"expected a list, got {value!r}")
        out = []
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}[{i}]", f"expected a number, got {v!r}")
            out.append(float(v))
        return out
    raise TypeError(f"unsupported config type {tp!r}")


def _build(cls, data: dict, path: str = ""):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(_join(path, str(key)), "unknown key")
    kwargs = {}
    for f in dataclasses.fields(cls):
        sub = _join(path, f.name)
        if f.name in data:
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], sub)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigError(sub, "missing required field")
    return cls(**kwargs)


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def to_dict(cfg: ScenarioConfig) -> dict:
    return dataclasses.asdict(cfg)


def from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping")
    return _build(ScenarioConfig, data).validate()


def set_path(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise ConfigError(dotted, "unknown key")
        node = node[k]
    if keys[-1] not in node:
        raise ConfigError(dotted, "unknown key")
    node[keys[-1]] = value


def parse_config(text: str) -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<root>", f"malformed YAML: {exc}") from exc
    return from_dict(data if data is not None else {})


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False)


# -- range checks --------------------------------------------------------------

def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(key, message)


def _unit(value: float, key: str) -> None:
    _require(0.0 <= value <= 1.0, key, f"must be in [0, 1], got {value!r}")


def _validate(cfg: ScenarioConfig) -> None:
    _require(cfg.schema_version == SCHEMA_VERSION, "schema_version",
             f"unsupported schema version {cfg.schema_version} (expected {SCHEMA_VERSION})")
    _require(bool(cfg.name), "name", "must be non-empty")
    _require(0 <= cfg.seed < 2**64, "seed", "must be a 64-bit unsigned integer")
    _require(cfg.n_nodes >= 2, "n_nodes", f"need at least 2 nodes, got {cfg.n_nodes}")
    _require(cfg.rounds >= 0, "rounds", "must be >= 0")
    _require(cfg.timeout_s > 0, "timeout_s", "must be > 0")
    _require(cfg.dirichlet_alpha > 0, "dirichlet_alpha", "must be > 0")

    t = cfg.topology
    _require(t.kind in TOPOLOGY_KINDS, "topology.kind", f"must be one of {TOPOLOGY_KINDS}")
    _require(0.0 < t.edge_prob <= 1.0, "topology.edge_prob", "must be in (0, 1]")
    if t.kind == "ring":
        _require(cfg.n_nodes >= 3, "n_nodes", "a ring needs at least 3 nodes")

    a = cfg.attack
    _require(a.kind in ATTACK_KINDS, "attack.kind", f"must be one of {ATTACK_KINDS}")
    _unit(a.attacker_fraction, "attack.attacker_fraction")
    _require(a.start_round >= 1, "attack.start_round", "must be >= 1 (round 0 is the observation round)")
    _require(a.interval >= 1, "attack.interval", "must be >= 1")
    if a.end_round is not None:
        _require(a.end_round >= a.start_round, "attack.end_round", "must be >= attack.start_round")
    if a.intensity is not None:
        _require(a.intensity >= 0, "attack.intensity", "must be >= 0")
        if a.kind == "flooding":
            _require(a.intensity >= 1 and float(a.intensity).is_integer(), "attack.intensity",
                     "flooding multiplier must be an integer >= 1")

    r = cfg.reputation
    for key in ("threshold", "initial", "eta", "fraction_lambda", "mu_smooth", "delta"):
        _unit(getattr(r, key), f"reputation.{key}")
    if r.tau is not None:
        _require(r.tau > 0, "reputation.tau", "must be > 0")
    _require(r.fraction_reference in FRACTION_REFERENCES, "reputation.fraction_reference",
             f"must be one of {FRACTION_REFERENCES}")
    _require(r.bootstrap_window >= 0, "reputation.bootstrap_window", "must be >= 0")
    _require(len(r.gamma) == 4, "reputation.gamma", "needs 4 weights (cosine, euclidean, manhattan, pearson)")
    _require(all(g >= 0 for g in r.gamma) and abs(sum(r.gamma) - 1.0) <= 1e-9,
             "reputation.gamma", "weights must be >= 0 and sum to 1")
    _require(0.0 <= r.weight_floor <= 0.25, "reputation.weight_floor", "must be in [0, 0.25]")
    _require(r.history_window >= 1, "reputation.history_window", "must be >= 1")
    _require(0.0 < r.history_decay < 1.0, "reputation.history_decay", "must be in (0, 1)")
    _require(0.0 < r.omega_current <= 1.0, "reputation.omega_current", "must be in (0, 1]")

    fl = r.flow
    _require(fl.epsilon > 0, "reputation.flow.epsilon", "must be > 0")
    _require(fl.extra_penalty >= 0, "reputation.flow.extra_penalty", "must be >= 0")
    _require(fl.recurrence_window >= 1, "reputation.flow.recurrence_window", "must be >= 1")
    _unit(fl.recurrence_threshold, "reputation.flow.recurrence_threshold")
    _unit(fl.recurrence_penalty, "reputation.flow.recurrence_penalty")
    _unit(fl.floor_base, "reputation.flow.floor_base")
    _require(fl.floor_rounds >= 1, "reputation.flow.floor_rounds", "must be >= 1")
    _require(len(fl.smoothing) >= 1 and all(w >= 0 for w in fl.smoothing) and sum(fl.smoothing) > 0,
             "reputation.flow.smoothing", "needs non-negative weights with a positive sum")

    tr = cfg.trainer
    _require(tr.dim_in >= 1, "trainer.dim_in", "must be >= 1")
    _require(tr.n_classes >= 2, "trainer.n_classes", "must be >= 2")
    _require(tr.samples_per_node >= 1, "trainer.samples_per_node", "must be >= 1")
    _require(tr.samples_per_node * cfg.n_nodes >= tr.n_classes, "trainer.samples_per_node",
             "total samples must cover every class")
    _require(tr.lr >= 0, "trainer.lr", "must be >= 0")
    _require(tr.epochs >= 0, "trainer.epochs", "must be >= 0")
    _require(tr.batch_size >= 1, "trainer.batch_size", "must be >= 1")
    _require(tr.class_sep > 0, "trainer.class_sep", "must be > 0")
    _require(0.0 < tr.test_fraction < 1.0, "trainer.test_fraction", "must be in (0, 1)")

    nw = cfg.network
    _require(nw.base_latency >= 0, "network.base_latency", "must be >= 0")
    _require(nw.jitter >= 0, "network.jitter", "must be >= 0")
    _require(nw.base_messages >= 1, "network.base_messages", "must be >= 1")
