import json
import math
from pathlib import Path

import pytest

from pathpol.cli import main
from pathpol.config import (ConfigError, RunConfig, default_config,
                            ideal_override, load_config, parse_config,
                            serialize_config)


def run_cli(*argv) -> int:
    return main(list(argv))


# ------------------------------------------------------------- config ----

def test_roundtrip_is_identity():
    for command in ("hom", "hescan", "pathscan", "tomo", "witness", "grover"):
        cfg = default_config(command)
        text = serialize_config(cfg)
        again = parse_config(text)
        assert again == cfg
        assert serialize_config(again) == text


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("banana = 1\n")
    with pytest.raises(ConfigError, match=r"source\.wavepacket"):
        parse_config("[source.wavepacket]\nwidth = 2.0\n")


def test_type_errors_rejected():
    with pytest.raises(ConfigError, match="seed"):
        parse_config('seed = "abc"\n')
    with pytest.raises(ConfigError, match="p_pol"):
        parse_config("[source]\np_pol = 3.0\n")


def test_toml_syntax_error_carries_location():
    with pytest.raises(ConfigError, match="line"):
        parse_config("seed = = 3\n", filename="bad.toml")


def test_ideal_override_zeroes_noise():
    cfg = ideal_override(default_config("tomo"))
    assert cfg.source.p_pol == 0.0
    assert cfg.source.v_path == 1.0
    assert cfg.source.pol_phase_error_ra_lb == 0.0
    assert cfg.source.wavepacket.overlap_at_zero == 1.0
    assert cfg.hescan.v_path_dip == 1.0


# ---------------------------------------------------------------- CLI ----

def _read(path: Path) -> bytes:
    return path.read_bytes()


def test_show_config_prints_schema(capsys):
    assert run_cli("show-config", "grover") == 0
    out = capsys.readouterr().out
    assert "[grover]" in out and "[source.wavepacket]" in out


def test_witness_table1(tmp_path, capsys):
    assert run_cli("witness", "--table1", "--out", str(tmp_path)) == 0
    payload = json.loads((tmp_path / "witness.json").read_text())
    assert payload["W"] == pytest.approx(-0.634, abs=0.001)
    assert payload["fidelity_bound"] == pytest.approx(0.817, abs=0.001)
    assert "W = -0.63" in capsys.readouterr().out


def test_witness_user_expectations(tmp_path):
    positives = ("Z_A Z_B", "Z_A x_A x_B", "Z_B x_A x_B", "X_A X_B z_B")
    exps = {name: [1.0 if name in positives else -1.0, 0.0]
            for name in ("Z_A Z_B", "Z_A x_A x_B", "X_A X_B z_A",
                         "z_A z_B", "Z_B x_A x_B", "X_A X_B z_B")}
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(exps))
    assert run_cli("witness", "--expectations", str(path), "--out", str(tmp_path)) == 0
    payload = json.loads((tmp_path / "witness.json").read_text())
    assert payload["W"] == pytest.approx(-1.0)


def test_grover_ideal_success_one(tmp_path):
    assert run_cli("grover", "--ideal", "--exact", "--shots", "2000",
                   "--out", str(tmp_path)) == 0
    payload = json.loads((tmp_path / "grover.json").read_text())
    for mode in ("postselect", "feedforward"):
        for tag in ("00", "01", "10", "11"):
            entry = payload["modes"][mode][tag]
            assert entry["success_rate"] == pytest.approx(1.0)
        assert payload["modes"][mode]["average_success"] == pytest.approx(1.0)
    ps = payload["modes"]["postselect"]["00"]["protocol_rate_hz"]
    ff = payload["modes"]["feedforward"]["00"]["protocol_rate_hz"]
    assert ff / ps == pytest.approx(4.0, rel=1e-6)


def test_tomo_ideal_high_fidelity(tmp_path):
    assert run_cli("tomo", "--ideal", "--shots", "100000",
                   "--out", str(tmp_path)) == 0  # sampled on purpose
    payload = json.loads((tmp_path / "tomo.json").read_text())
    for branch in ("ra_lb", "la_rb"):
        assert payload["branches"][branch]["fidelity"] >= 0.999
        assert payload["branches"][branch]["converged"]


def test_hescan_ideal_classification(tmp_path):
    # Small grid to keep runtime down; expectation classification must hold.
    cfg_text = serialize_config(default_config("hescan"))
    cfg_text = cfg_text.replace("delay_count = 41", "delay_count = 21")
    cfg_path = tmp_path / "cfg.toml"
    cfg_path.write_text(cfg_text)
    assert run_cli("hescan", "--ideal", "--exact", "--config", str(cfg_path),
                   "--shots", "50000", "--out", str(tmp_path)) == 0
    payload = json.loads((tmp_path / "hescan.json").read_text())
    kinds = {k: v["kind"] for k, v in payload["scans"].items()}
    assert kinds == {"phi0pi_theta0pi": "dip", "phi1pi_theta1pi": "dip",
                     "phi0pi_theta1pi": "peak", "phi1pi_theta0pi": "peak"}
    for entry in payload["scans"].values():
        assert entry["visibility"] == pytest.approx(1.0, abs=1e-6)


def test_same_seed_byte_identical_any_workers(tmp_path):
    out1, out2, out3 = (tmp_path / n for n in ("a", "b", "c"))
    for out, workers in ((out1, "1"), (out2, "1"), (out3, "4")):
        code = run_cli("hom", "--seed", "99", "--shots", "20000",
                       "--out", str(out), "--workers", workers)
        assert code == 0
    for name in ("hom_bs_a.csv", "hom_bs_b.csv", "hom.json"):
        assert _read(out1 / name) == _read(out2 / name)
        assert _read(out1 / name) == _read(out3 / name)


def test_different_seed_changes_output(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_cli("hom", "--seed", "1", "--shots", "20000", "--out", str(out1))
    run_cli("hom", "--seed", "2", "--shots", "20000", "--out", str(out2))
    assert _read(out1 / "hom_bs_a.csv") != _read(out2 / "hom_bs_a.csv")


def test_invalid_config_exit_code(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[source]\np_pol = 2.0\n")
    assert run_cli("hom", "--config", str(bad), "--out", str(tmp_path)) == 2
    missing_key = tmp_path / "unknown.toml"
    missing_key.write_text("[hom]\nfoo = 1\n")
    assert run_cli("hom", "--config", str(missing_key), "--out", str(tmp_path)) == 2


def test_scan_csv_schema(tmp_path):
    run_cli("pathscan", "--shots", "5000", "--out", str(tmp_path))
    header = (tmp_path / "pathscan_dip.csv").read_text().splitlines()[0]
    assert header == "delta_x_um,phi,theta,counts,accidentals,normalized"
