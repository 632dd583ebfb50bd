"""CSV and manifest exports for a finished run."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from . import __version__, kernels
from .config import to_dict
from .core import node_label

DETAIL_HEADER = ["round", "node", "neighbor", "sim", "frac", "lat", "msg",
                 "w_sim", "w_frac", "w_lat", "w_msg", "score", "reputation", "accepted"]
SUMMARY_HEADER = ["round", "node", "is_attacker", "f1", "loss", "accepted_models", "cost_units"]

DETAIL_FILE = "detail.csv"
SUMMARY_FILE = "summary.csv"
MANIFEST_FILE = "manifest.json"


def _num(x: float) -> str:
    return repr(float(x))


def detail_rows(result):
    for entry in result.logs:
        for link in entry.links:
            m = link.metrics
            yield [
                link.round, node_label(link.node), node_label(link.neighbor),
                _num(m.similarity), _num(m.fraction), _num(m.latency), _num(m.messages),
                *(_num(w) for w in link.weights),
                _num(link.score), _num(link.reputation), int(link.accepted),
            ]


def summary_rows(result):
    for entry in result.logs:
        for rec in entry.nodes:
            yield [rec.round, node_label(rec.node), int(rec.is_attacker), _num(rec.f1),
                   _num(rec.loss), rec.accepted_models, rec.cost_units]


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_run(result, out_dir) -> dict:
    """Write detail/summary CSVs and the manifest; return the manifest dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / DETAIL_FILE, DETAIL_HEADER, detail_rows(result))
    _write_csv(out / SUMMARY_FILE, SUMMARY_HEADER, summary_rows(result))
    manifest = {
        "tool": "repunet-sim",
        "tool_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "seed": result.config.seed,
        "config": to_dict(result.config),
        "attackers": [node_label(a) for a in sorted(result.attackers)],
        "artifacts": {
            DETAIL_FILE: sha256_file(out / DETAIL_FILE),
            SUMMARY_FILE: sha256_file(out / SUMMARY_FILE),
        },
    }
    with open(out / MANIFEST_FILE, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
