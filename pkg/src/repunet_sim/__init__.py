"""Deterministic decentralized federated learning simulator with a
reputation-guided aggregation defense against poisoning, delayer and flooding
attacks."""

__version__ = "0.1.0"

from .config import ScenarioConfig, load_config, parse_config, serialize_config  # noqa: E402
from .core import ConfigError, DimensionError, MetricVector, ModelMessage, RngStream  # noqa: E402
from .simnet import Simulation, run_scenario  # noqa: E402

__all__ = [
    "ConfigError",
    "DimensionError",
    "MetricVector",
    "ModelMessage",
    "RngStream",
    "ScenarioConfig",
    "Simulation",
    "load_config",
    "parse_config",
    "run_scenario",
    "serialize_config",
]
