import copy
import json
import math
from pathlib import Path

import numpy as np
import pytest

from ris_secrecy.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, run_command
from ris_secrecy.config import ConfigError, load_config, parse_config, parse_level

ROOT = Path(__file__).resolve().parents[1]
MINIMAL = json.loads((ROOT / "configs" / "minimal.json").read_text())

SMALL = dict(MINIMAL, bs_array={"n_vertical": 2, "n_horizontal": 1},
             ris_array={"n_vertical": 2, "n_horizontal": 3},
             correlation_grid=[8, 8], heatmap_grid=[4, 3], fading_draws=2,
             power_grid_dbm=[25, 35], monte_carlo={"n_trials": 2, "base_seed": 1})


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_defaults_fill_minimal_config():
    cfg = parse_config(MINIMAL)
    sc = cfg.scenario
    assert sc.noise_power == pytest.approx(10 ** -13.5, rel=1e-12)
    assert sc.noise_power == pytest.approx(3.1623e-14, rel=1e-4)
    assert sc.pathloss.pl0 == pytest.approx(1e-3)
    assert sc.rician.k_factor == 13.2
    assert sc.n_antennas == 16 and sc.n_elements == 150
    assert sc.area_rx.z == 1.5
    assert cfg.transmit_power_dbm == 35.0
    assert cfg.monte_carlo.n_trials == 100
    assert cfg.ao.epsilon == 1e-5 and cfg.ao.max_outer == 200


def test_reference_config_matches_minimal():
    a = load_config(ROOT / "configs" / "reference.json").to_dict()
    b = parse_config(MINIMAL).to_dict()
    assert a == b


def test_round_trip():
    cfg = parse_config(SMALL)
    again = parse_config(json.loads(json.dumps(cfg.to_dict())))
    assert again.to_dict() == cfg.to_dict()
    assert again.scenario == cfg.scenario


@pytest.mark.parametrize("value,unit,expected", [
    (-105, "dBm", -105.0), ("-105 dBm", "dBm", -105.0), ("−105dBm", "dBm", -105.0),
    ("1 W", "dBm", 30.0), ("10 mW", "dBm", 10.0), ("-30 dB", "dB", -30.0)])
def test_parse_level(value, unit, expected):
    assert parse_level(value, "k", unit) == pytest.approx(expected)


@pytest.mark.parametrize("value,unit", [("5 W", "dB"), ("abc", "dBm"), (True, "dB"),
                                        ("0 W", "dBm"), (math.inf, "dB"), ([1], "dB")])
def test_parse_level_rejects(value, unit):
    with pytest.raises(ConfigError):
        parse_level(value, "k", unit)


def _mutate(**changes):
    cfg = copy.deepcopy(MINIMAL)
    for k, v in changes.items():
        if v is None:
            cfg.pop(k)
        else:
            cfg[k] = v
    return cfg


@pytest.mark.parametrize("cfg,fragment", [
    (_mutate(eve_area={"center": [-10.0, 30.0], "width": 24.0, "length": 15.0}), "disjoint"),
    (_mutate(bs_position=None), "bs_position"),
    (_mutate(noise_figure=3), "noise_figure"),
    (_mutate(ao={"epsilonn": 1}), "ao.epsilonn"),
    (_mutate(rx_area={"center": [0, 0], "width": -1, "length": 2}), "rx_area.width"),
    (_mutate(ris_array={"n_vertical": 0}), "ris_array"),
    (_mutate(schemes=["best"]), "schemes"),
    (_mutate(max_mode="median"), "max_mode"),
    (_mutate(rician_k=-1), "rician_k"),
    (_mutate(monte_carlo={"n_trials": 0}), "monte_carlo"),
])
def test_config_errors_name_the_key(cfg, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(cfg)


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = _write(tmp_path, _mutate(bs_position=None))
    assert run_command(["optimize", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "bs_position" in capsys.readouterr().err
    assert run_command(["optimize", "--config", str(tmp_path / "missing.json"),
                        "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert run_command(["frobnicate"]) == EXIT_CONFIG
    good = _write(tmp_path, SMALL, "good.json")
    assert run_command(["heatmap", "--config", str(good), "--out", str(tmp_path / "o"),
                        "--scheme", "random", "--gain"]) == EXIT_CONFIG


def test_cli_io_error_exit_code(tmp_path):
    good = _write(tmp_path, SMALL)
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run_command(["optimize", "--config", str(good), "--out", str(blocker / "sub")]) == EXIT_NUMERIC


def _outputs(out: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


@pytest.mark.parametrize("args", [
    ["optimize", "--scheme", "proposed"],
    ["optimize", "--scheme", "random"],
    ["sweep-power"],
    ["heatmap", "--scheme", "rx_only"],
    ["heatmap", "--scheme", "proposed", "--gain"],
])
def test_cli_commands_are_deterministic(tmp_path, args):
    cfg = _write(tmp_path, SMALL)
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert run_command([args[0], "--config", str(cfg), "--out", str(out), "--seed", "7",
                            *args[1:]]) == EXIT_OK
        report = json.loads((out / "run_report.json").read_text())
        assert report["seed"] == 7 and report["command"] == args[0]
        runs.append(_outputs(out))
    assert runs[0] and runs[0] == runs[1]


def test_cli_optimize_outputs(tmp_path):
    cfg = _write(tmp_path, SMALL)
    out = tmp_path / "o"
    assert run_command(["optimize", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    trace = np.loadtxt(out / "trace_proposed.csv", delimiter=",", skiprows=1, ndmin=2)
    assert np.all(np.diff(trace[:, 1]) >= -1e-9)
    phases = np.loadtxt(out / "phases_proposed.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(np.hypot(phases[:, 1], phases[:, 2]), 1.0, atol=1e-8)
    report = json.loads((out / "run_report.json").read_text())
    assert report["convergence"]["monotone"] is True
    # resolved config in the report loads back unchanged
    assert parse_config(report["config"]).to_dict() == report["config"]


def test_cli_trials_override(tmp_path):
    cfg = _write(tmp_path, SMALL)
    out = tmp_path / "o"
    assert run_command(["sweep-power", "--config", str(cfg), "--out", str(out),
                        "--trials", "1", "--scheme", "random"]) == EXIT_OK
    report = json.loads((out / "run_report.json").read_text())
    assert report["n_trials"] == 1
    assert run_command(["sweep-power", "--config", str(cfg), "--out", str(out),
                        "--trials", "0"]) == EXIT_CONFIG


def test_selftest_command():
    assert run_command(["selftest"]) == EXIT_OK
