"""Experiment runner: config schema, determinism, CSV/metadata contracts."""
import csv
import json

import pytest
import yaml

from zakotfs.cli import ConfigError, DEFAULTS, THREADS_ENV, load_config, main

# small odd-coprime grid keeps the end-to-end runs fast
SMALL_GRID = {"grid": {"M": 5, "N": 7}, "pilot": {"root": 2}, "pilot_b": {"root": 3}}


def _write_cfg(tmp_path, extra):
    cfg = dict(SMALL_GRID)
    cfg.update(extra)
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def test_defaults_load_without_config():
    cfg = load_config()
    assert cfg == DEFAULTS


def test_overrides_apply():
    cfg = load_config(seed=9, trials=5, out="x.csv")
    assert cfg["seed"] == 9 and cfg["trials"] == 5 and cfg["out"] == "x.csv"


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("gird: {M: 5}\n")
    with pytest.raises(ConfigError, match="gird"):
        load_config(str(path))
    path.write_text("grid: {M: 5, J: 2}\n")
    with pytest.raises(ConfigError, match="grid.J"):
        load_config(str(path))


def test_non_mapping_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("grid: 5\n")
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text("- a\n- b\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_unsupported_channel_model(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("channel: {model: awgn}\n")
    with pytest.raises(ConfigError, match="awgn"):
        load_config(str(path))


def test_cli_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("nope: 1\n")
    rc = main(["papr", "--config", str(path)])
    assert rc == 2
    assert "nope" in capsys.readouterr().err


def test_cli_missing_config_file(tmp_path):
    assert main(["papr", "--config", str(tmp_path / "absent.yaml")]) == 2


def test_papr_csv_and_metadata(tmp_path):
    cfg = _write_cfg(tmp_path, {"papr": {"zc_root": 2, "chirp_slope": 3}})
    out = str(tmp_path / "papr.csv")
    assert main(["papr", "--config", cfg, "--out", out]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["pilot", "papr_db"]
    assert [r[0] for r in rows[1:]] == ["point", "zc", "chirp"]
    meta = json.loads(open(out + ".meta.json").read())
    assert meta["command"] == "papr"
    assert meta["config"]["grid"]["M"] == 5
    assert "version" in meta


def test_ambiguity_self_nonzero_rows(tmp_path):
    cfg = _write_cfg(tmp_path, {})
    out = str(tmp_path / "amb.csv")
    assert main(["ambiguity", "--config", cfg, "--out", out]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))[1:]
    # the self-ambiguity of a ZC pilot lives on a single line: MN points
    assert len(rows) == 35
    for k, l, mag in rows:
        assert (int(l) + 2 * int(k)) % 35 == 0
        assert abs(float(mag) - 1.0) < 1e-9


def test_ambiguity_cross_mode(tmp_path):
    cfg = _write_cfg(tmp_path, {"ambiguity": {"mode": "cross", "nonzero_only": False}})
    out = str(tmp_path / "amb.csv")
    assert main(["ambiguity", "--config", cfg, "--out", out]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))[1:]
    assert len(rows) == 35 * 35


def test_nmse_subcommand_runs_and_is_deterministic(tmp_path):
    cfg = _write_cfg(tmp_path, {"nmse": {"pdr_grid": [20], "kinds": ["zc"]},
                                "channel": {"nu_max": 200.0}})
    out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["nmse", "--config", cfg, "--out", out1, "--trials", "2",
                 "--seed", "4"]) == 0
    assert main(["nmse", "--config", cfg, "--out", out2, "--trials", "2",
                 "--seed", "4"]) == 0
    assert open(out1).read() == open(out2).read()
    rows = list(csv.DictReader(open(out1)))
    assert rows[0]["pilot"] == "zc" and rows[0]["trials"] == "2"


def test_ber_subcommand(tmp_path):
    cfg = _write_cfg(tmp_path, {"ber": {"pdr_grid": [30], "iterations": [1, 2],
                                        "root": 2},
                                "channel": {"nu_max": 200.0}})
    out = str(tmp_path / "ber.csv")
    assert main(["ber", "--config", cfg, "--out", out, "--trials", "2"]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [r["iterations"] for r in rows] == ["1", "2"]
    assert all(0.0 <= float(r["ber"]) <= 1.0 for r in rows)


def test_rach_subcommand_records_roots(tmp_path):
    cfg = _write_cfg(tmp_path, {"rach": {"K": 1, "num_preambles": 2,
                                         "snr_grid": [0],
                                         "modes": ["blind-grouped"]},
                                "channel": {"nu_max": 0.0, "tau_max": 0.0}})
    out = str(tmp_path / "rach.csv")
    assert main(["rach", "--config", cfg, "--out", out, "--trials", "2"]) == 0
    rows = list(csv.DictReader(open(out)))
    assert rows[0]["detector"] == "blind-grouped"
    meta = json.loads(open(out + ".meta.json").read())
    assert len(meta["roots"]) == 2
    assert all(r % 5 != 0 and r % 7 != 0 for r in meta["roots"])


def test_thread_env_validation(tmp_path, monkeypatch):
    cfg = _write_cfg(tmp_path, {"nmse": {"pdr_grid": [20], "kinds": ["zc"]}})
    monkeypatch.setenv(THREADS_ENV, "zero")
    assert main(["nmse", "--config", cfg, "--out", str(tmp_path / "n.csv"),
                 "--trials", "1"]) == 2
    monkeypatch.setenv(THREADS_ENV, "0")
    assert main(["nmse", "--config", cfg, "--out", str(tmp_path / "n.csv"),
                 "--trials", "1"]) == 2
