"""Command line entry point: ``repunet-sim {run,sweep,validate}``."""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import sys
from pathlib import Path

import yaml

from . import analysis
from .config import ScenarioConfig, load_config, serialize_config
from .core import ConfigError
from .export import write_run
from .simnet import run_scenario

log = logging.getLogger("repunet_sim")

COMPARISON_FILE = "comparison.csv"
COMPARISON_HEADER = ["scenario", "final_benign_f1", "final_attacker_reputation", "mean_accepted_models"]


def apply_overrides(cfg: ScenarioConfig, seed=None, reputation=None, out=None) -> ScenarioConfig:
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if reputation is not None:
        overrides["reputation.enabled"] = reputation == "on"
    if out is not None:
        overrides["export_dir"] = str(out)
    return cfg.replace(**overrides) if overrides else cfg


def run(cfg: ScenarioConfig, out_dir=None):
    """Run one scenario and write its artifacts. Returns (result, manifest)."""
    out = Path(out_dir if out_dir is not None else Path(cfg.export_dir) / cfg.name)
    result = run_scenario(cfg)
    manifest = write_run(result, out)
    log.info("wrote %s", out)
    return result, manifest


def parse_axis(text: str):
    """``attack.attacker_fraction=0.3,0.4`` -> ("attack.attacker_fraction", [0.3, 0.4])."""
    if "=" not in text:
        raise ConfigError(text, "axis must look like key=v1,v2,...")
    key, values = text.split("=", 1)
    return key.strip(), [yaml.safe_load(v) for v in values.split(",") if v.strip()]


def _fmt(x: float) -> str:
    return "" if x != x else repr(float(x))


def sweep(template: ScenarioConfig, axes, out_dir) -> list:
    """One run per point of the cartesian product of ``axes``; writes a comparison CSV.

    A failing point is logged and skipped so earlier results survive.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keys = [k for k, _ in axes]
    points = list(itertools.product(*[vals for _, vals in axes])) if axes else [()]
    rows = []
    errors = []
    for point in points:
        overrides = dict(zip(keys, point))
        label = "_".join(f"{k.split('.')[-1]}={v}" for k, v in overrides.items()) or template.name
        try:
            cfg = template.replace(**overrides)
            result, _ = run(cfg, out / label)
        except Exception as exc:
            log.error("sweep point %s failed: %s", label, exc)
            errors.append((label, exc))
            continue
        rows.append([
            label,
            _fmt(analysis.mean_f1(result, -1)) if result.logs else "",
            _fmt(analysis.mean_reputation(result, -1)) if result.logs else "",
            _fmt(analysis.mean_accepted(result, -1)) if result.logs else "",
        ])
    with open(out / COMPARISON_FILE, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COMPARISON_HEADER)
        writer.writerows(rows)
    if errors:
        label, exc = errors[0]
        raise RuntimeError(f"{len(errors)} sweep point(s) failed, first {label}: {exc}") from exc
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repunet-sim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario YAML file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--reputation", choices=("on", "off"), help="force the reputation defense on or off")

    p_run = sub.add_parser("run", help="run one scenario")
    common(p_run)
    p_run.add_argument("-o", "--out", help="output directory (default: <export_dir>/<name>)")

    p_sweep = sub.add_parser("sweep", help="run a scenario over a grid of overrides")
    common(p_sweep)
    p_sweep.add_argument("-o", "--out", required=True, help="output directory for the batch")
    p_sweep.add_argument("--axis", action="append", default=[],
                         help="key=v1,v2,... (repeatable; points form a cartesian product)")

    p_val = sub.add_parser("validate", help="parse and check a config, print it with defaults filled")
    p_val.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            sys.stdout.write(serialize_config(cfg))
            return 0
        cfg = apply_overrides(cfg, seed=args.seed, reputation=args.reputation)
        if args.command == "run":
            run(cfg, args.out)
        else:
            sweep(cfg, [parse_axis(a) for a in args.axis], args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
