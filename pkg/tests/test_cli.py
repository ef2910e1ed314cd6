import json
import subprocess
import sys
from pathlib import Path

import pytest

from gktwist import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = {
    "chart": {"names": ["u", "v"], "bounds": [[-1, 1], [-1, 1]]},
    "connection": {"flat": True},
    "checks": ["theorem"],
    "seed": 7,
}


def cfg(**changes):
    out = json.loads(json.dumps(BASE))
    for k, v in changes.items():
        if v is None:
            out.pop(k)
        else:
            out[k] = v
    return json.dumps(out)


def write(tmp_path, text, name="run.json"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_minimal_config_is_valid():
    c = cli.parse_config(cfg())
    assert c.seed == 7 and c.checks == ["theorem"] and c.tolerances["flat_nijenhuis"] == 1e-7


@pytest.mark.parametrize("text, fragment", [
    (cfg(connection={"gamma": [[["u**2", 0], [0, 0]], [[0, 0], [0, 0]]]}), "$.connection.gamma[0][0][0]"),
    (cfg(connection={"flat": True, "metric": {"E": "1", "F": "0", "G": "1"}}), "exactly one connection source"),
    (cfg(connection={}), "exactly one connection source"),
    (cfg(checks=[]), "$.checks"),
    (cfg(checks=["nope"]), "$.checks[0]"),
    (cfg(seed=None), "missing required key 'seed'"),
    (cfg(seed=-1), "$.seed"),
    (cfg(chart={"names": ["u"], "bounds": [[0, 1]]}), "$.chart.names"),
    (cfg(chart={"names": ["u", "v"], "bounds": [[1, 0], [0, 1]]}), "$.chart.bounds[0]"),
    (cfg(chart={"names": ["u", "a2"], "bounds": [[0, 1], [0, 1]]}), "reserved"),
    (cfg(tolerances={"bogus": 1}), "$.tolerances.bogus"),
    (cfg(twistor={"sheet": 0}), "$.twistor.sheet"),
    (cfg(connection={"metric": {"E": "1", "F": "0"}}), "$.connection.metric"),
    (cfg(extra=1), "unknown keys"),
    ("{not json", "invalid JSON"),
    (cfg(recoordinatize={"map": ["u + v^2", "v"], "bounds": [[-1, 1], [-1, 1]]}), "$.recoordinatize"),
])
def test_config_errors_are_path_qualified(text, fragment):
    with pytest.raises(cli.ConfigError) as info:
        cli.parse_config(text)
    assert fragment in str(info.value)


def test_syntax_error_carries_position():
    with pytest.raises(cli.ConfigError) as info:
        cli.parse_config(cfg(connection={"gamma": [[["u**2", 0], [0, 0]], [[0, 0], [0, 0]]]}))
    assert "position 2" in str(info.value)


def test_overrides():
    c = cli.parse_config(cfg(), seed=3, overrides={"bracket": 1e-5})
    assert c.seed == 3 and c.tolerances["bracket"] == 1e-5
    with pytest.raises(cli.ConfigError):
        cli.parse_config(cfg(), overrides={"bracket": -1})


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["theorem", "--config", write(tmp_path, cfg())]) == 0
    assert cli.main(["theorem", "--config", write(tmp_path, "{")]) == 2
    assert cli.main(["theorem", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["bogus", "--config", write(tmp_path, cfg())]) == 2
    assert cli.main(["theorem", "--config", write(tmp_path, cfg()), "--tol-override", "x"]) == 2
    # a failing check: a nonflat floor no curvature signal can clear
    sphere = cfg(chart={"names": ["u", "v"], "bounds": [[0.6, 2.5], [-1, 1]]},
                 connection={"metric": {"E": "1", "F": "0", "G": "sin(u)^2"}})
    assert cli.main(["theorem", "--config", write(tmp_path, sphere), "--tol-override", "nonflat_floor=1e6"]) == 1
    capsys.readouterr()


def test_suite_errors_are_captured(tmp_path, capsys):
    text = cfg(checks=["bihermitian", "theorem"], witness={"base": [5.0, 0.0]})
    assert cli.main(["all", "--config", write(tmp_path, text)]) == 1
    report = json.loads(capsys.readouterr().out)
    bh, th = report["checks"]
    assert bh["status"] == "error" and "DomainError" in bh["error"]
    assert th["status"] == "pass"
    assert report["status"] == "fail"


def test_report_shape(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["all", "--config", str(CONFIGS / "sphere.json"), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert set(report) == {"version", "seed", "prng", "config_sha256", "tolerances", "checks", "status"}
    names = [c["name"] for c in report["checks"]]
    assert names == ["connection", "theorem"]
    th = report["checks"][1]
    assert th["verdict"] == "not flat"
    assert "HV" in th["details"]["nonzero_blocks"]["J"]
    assert th["details"]["nonzero_blocks"]["I"] == []
    assert "wall_time_s" not in th


def test_timings_flag(tmp_path, capsys):
    cli.main(["connection", "--config", write(tmp_path, cfg(checks=["connection"])), "--timings"])
    report = json.loads(capsys.readouterr().out)
    assert report["checks"][0]["wall_time_s"] >= 0


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "gktwist.cli", "connection", "--config",
                           write(tmp_path, cfg()), "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["checks"][0]["name"] == "connection"


@pytest.mark.parametrize("name", ["flat", "pullback", "sphere", "traceful"])
def test_shipped_configs_pass(name, tmp_path):
    assert cli.main(["all", "--config", str(CONFIGS / f"{name}.json"), "--out", str(tmp_path / "r.json")]) == 0
