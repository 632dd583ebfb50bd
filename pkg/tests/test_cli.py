import csv
import json

import pytest

from repunet_sim.cli import COMPARISON_FILE, COMPARISON_HEADER, main, parse_axis
from repunet_sim.core import ConfigError
from repunet_sim.export import DETAIL_FILE, MANIFEST_FILE, SUMMARY_FILE

SMALL = """schema_version: 1
name: cli-small
seed: 4
n_nodes: 5
rounds: 3
attack:
  kind: poisoning
  start_round: 1
trainer:
  samples_per_node: 40
"""


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text(SMALL)
    return p


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_artifacts(cfg_path, tmp_path):
    out = tmp_path / "run"
    assert main(["run", str(cfg_path), "-o", str(out)]) == 0
    detail = read_rows(out / DETAIL_FILE)
    summary = read_rows(out / SUMMARY_FILE)
    assert len(detail) - 1 == 5 * 4 * 3
    assert len(summary) - 1 == 5 * 3
    manifest = json.loads((out / MANIFEST_FILE).read_text())
    assert manifest["seed"] == 4
    assert manifest["config"]["name"] == "cli-small"
    assert len(manifest["attackers"]) == 2


def test_reputation_off_is_constant(cfg_path, tmp_path):
    out = tmp_path / "off"
    assert main(["run", str(cfg_path), "--reputation", "off", "-o", str(out)]) == 0
    rows = read_rows(out / DETAIL_FILE)
    col = rows[0].index("reputation")
    assert {r[col] for r in rows[1:]} == {"1.0"}


def test_seed_override(cfg_path, tmp_path):
    assert main(["run", str(cfg_path), "--seed", "9", "-o", str(tmp_path / "s")]) == 0
    assert json.loads((tmp_path / "s" / MANIFEST_FILE).read_text())["seed"] == 9


def test_repeat_runs_identical(cfg_path, tmp_path):
    for name in ("a", "b"):
        assert main(["run", str(cfg_path), "-o", str(tmp_path / name)]) == 0
    ma = json.loads((tmp_path / "a" / MANIFEST_FILE).read_text())
    mb = json.loads((tmp_path / "b" / MANIFEST_FILE).read_text())
    assert ma["artifacts"] == mb["artifacts"]
    assert (tmp_path / "a" / DETAIL_FILE).read_bytes() == (tmp_path / "b" / DETAIL_FILE).read_bytes()


def test_sweep(cfg_path, tmp_path):
    out = tmp_path / "sweep"
    axis = "attack.attacker_fraction=0.2,0.4,0.6,0.8"
    assert main(["sweep", str(cfg_path), "-o", str(out), "--axis", axis]) == 0
    dirs = sorted(p.name for p in out.iterdir() if p.is_dir())
    assert len(dirs) == 4
    rows = read_rows(out / COMPARISON_FILE)
    assert rows[0] == COMPARISON_HEADER
    assert len(rows) == 5


def test_sweep_without_axes_runs_template(cfg_path, tmp_path):
    out = tmp_path / "one"
    assert main(["sweep", str(cfg_path), "-o", str(out)]) == 0
    assert [p.name for p in out.iterdir() if p.is_dir()] == ["cli-small"]


def test_sweep_bad_point_reports_failure(cfg_path, tmp_path):
    out = tmp_path / "bad"
    assert main(["sweep", str(cfg_path), "-o", str(out), "--axis", "attack.attacker_fraction=0.2,1.5"]) == 1
    # the good point is kept
    assert len(read_rows(out / COMPARISON_FILE)) == 2


def test_validate_prints_defaults(cfg_path, capsys):
    assert main(["validate", str(cfg_path)]) == 0
    text = capsys.readouterr().out
    assert "threshold: 0.6" in text and "name: cli-small" in text


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("schema_version: 1\nname: x\nseed: 1\nattack:\n  attacker_fraction: 1.5\n")
    assert main(["run", str(bad), "-o", str(tmp_path / "o")]) == 2
    assert "attack.attacker_fraction" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert main(["validate", str(tmp_path / "nope.yaml")]) == 1


def test_zero_rounds_gives_empty_export(tmp_path):
    p = tmp_path / "zero.yaml"
    p.write_text("schema_version: 1\nname: zero\nseed: 0\nrounds: 0\n")
    out = tmp_path / "z"
    assert main(["run", str(p), "-o", str(out)]) == 0
    assert len(read_rows(out / DETAIL_FILE)) == 1
    assert len(read_rows(out / SUMMARY_FILE)) == 1


def test_parse_axis():
    assert parse_axis("attack.interval=1,2, 3") == ("attack.interval", [1, 2, 3])
    with pytest.raises(ConfigError):
        parse_axis("attack.interval")
