"""Command-line front end: config parsing, file outputs, exit codes."""

import json
import math
import shutil
from pathlib import Path

import numpy as np
import pytest

from pqbalance.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, load_config, main

BENCH = Path(__file__).resolve().parent.parent / "benchmarks"

ROOT2 = math.sqrt(2.0)


@pytest.fixture
def bench_dir(tmp_path):
    """Benchmark config and netlist copied somewhere writable."""
    for name in ("flicker_config.json", "flicker_netlist.json"):
        shutil.copy(BENCH / name, tmp_path / name)
    return tmp_path


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def simple_setup(tmp_path, source=None, extra=None):
    """Single 2-ohm resistor behind a one-line source; returns config path."""
    write_json(
        tmp_path / "net.json",
        {
            "branches": [
                {"id": "r1", "kind": "resistor", "value": 2.0, "nodes": ["p", "0"]}
            ],
            "port": {"plus": "p", "ground": "0"},
        },
    )
    cfg = {
        "netlist": "net.json",
        "source": source or {"lines": [{"amplitude_peak": ROOT2, "omega": 1.0}]},
    }
    cfg.update(extra or {})
    path = tmp_path / "config.json"
    write_json(path, cfg)
    return path


# ----------------------------------------------------------------------
# config handling


def test_load_config_benchmark(bench_dir):
    cfg = load_config(bench_dir / "flicker_config.json")
    assert set(cfg.netlist.by_kind("resistor")[0].nodes) == {"port", "gnd"}
    assert sorted(cfg.source.omegas.tolist()) == [0.8, 1.0, 1.2]
    assert cfg.out_dir == "flicker_out"
    assert cfg.formats == ("csv", "json")


def test_missing_config_file(tmp_path, capsys):
    assert main(["analyze", "--config", str(tmp_path / "nope.json")]) == EXIT_INPUT
    assert "cannot read config" in capsys.readouterr().err


def test_invalid_json_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["analyze", "--config", str(path)]) == EXIT_INPUT
    assert "invalid JSON" in capsys.readouterr().err


def test_malformed_netlist_names_json_path(tmp_path, capsys):
    write_json(
        tmp_path / "net.json",
        {
            "branches": [
                {"id": "r1", "kind": "resistor", "value": True, "nodes": ["p", "0"]}
            ],
            "port": {"plus": "p", "ground": "0"},
        },
    )
    write_json(
        tmp_path / "config.json",
        {"netlist": "net.json", "source": {"lines": [{"amplitude_peak": 1.0, "omega": 1.0}]}},
    )
    assert main(["analyze", "--config", str(tmp_path / "config.json")]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "branches[0].value" in err and "net.json" in err


def test_source_validation_messages(tmp_path, capsys):
    path = simple_setup(tmp_path, source={"lines": [{"omega": 1.0}]})
    assert main(["analyze", "--config", str(path)]) == EXIT_INPUT
    assert "source.lines[0].amplitude_peak" in capsys.readouterr().err

    path = simple_setup(
        tmp_path, source={"lines": [{"amplitude_peak": 1.0, "omega": 0.0, "phase": 0.3}]}
    )
    assert main(["analyze", "--config", str(path)]) == EXIT_INPUT
    assert "DC line cannot carry a phase" in capsys.readouterr().err


def test_grid_validation_messages(tmp_path, capsys):
    path = simple_setup(tmp_path, extra={"t_grid": {"n": 21, "values": [0.0]}})
    assert main(["analyze", "--config", str(path)]) == EXIT_INPUT
    assert "exactly one of 'n' or 'values'" in capsys.readouterr().err

    path = simple_setup(tmp_path, extra={"s_grid": {"values": [0.1, -0.5]}})
    assert main(["analyze", "--config", str(path)]) == EXIT_INPUT
    assert "must be >= 0" in capsys.readouterr().err


def test_incommensurate_source_rejected(tmp_path, capsys):
    path = simple_setup(
        tmp_path,
        source={
            "lines": [
                {"amplitude_peak": 1.0, "omega": 1.0},
                {"amplitude_peak": 1.0, "omega": math.pi},
            ]
        },
    )
    assert main(["analyze", "--config", str(path)]) == EXIT_INPUT
    assert "not a lattice multiple" in capsys.readouterr().err


def test_singular_network_exit_code(tmp_path, capsys):
    # two capacitors in series leave the middle node unconstrained at DC
    write_json(
        tmp_path / "net.json",
        {
            "branches": [
                {"id": "c1", "kind": "capacitor", "value": 1.0, "nodes": ["p", "x"]},
                {"id": "c2", "kind": "capacitor", "value": 1.0, "nodes": ["x", "0"]},
            ],
            "port": {"plus": "p", "ground": "0"},
        },
    )
    write_json(
        tmp_path / "config.json",
        {
            "netlist": "net.json",
            "source": {"lines": [{"amplitude_peak": 1.0, "omega": 0.0}]},
        },
    )
    assert main(["analyze", "--config", str(tmp_path / "config.json")]) == EXIT_NUMERIC
    assert "singular network" in capsys.readouterr().err


# ----------------------------------------------------------------------
# analyze outputs


def test_analyze_writes_expected_files(bench_dir):
    out = bench_dir / "out"
    code = main(
        ["analyze", "--config", str(bench_dir / "flicker_config.json"), "--out", str(out)]
    )
    assert code == EXIT_OK
    names = {p.name for p in out.iterdir()}
    assert names == {
        "balance.json",
        "instantaneous.csv",
        "scaled_s0.csv",
        "scaled_s0.5.csv",
        "scaled_s1.csv",
        "scaled_s2.csv",
        "summary.json",
    }

    inst = (out / "instantaneous.csv").read_text(encoding="utf-8").splitlines()
    assert inst[0] == "t,p,p_d,w_m,w_e,w,x,P_t,Q_t"
    assert len(inst) == 1 + 64

    scaled0 = (out / "scaled_s0.csv").read_text(encoding="utf-8").splitlines()
    assert scaled0[0] == "t,W_m,W_e,W,X,P,Q,P_d"

    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["p_mean"] == pytest.approx(10.05, rel=1e-12)
    assert summary["q_budeanu"] == pytest.approx(-30.15, rel=1e-12)
    assert summary["character"] == "capacitive"
    assert summary["residual_maxima"]["reactive"] < 1e-9 * 30.15

    balance = json.loads((out / "balance.json").read_text(encoding="utf-8"))
    assert balance["active"]["relative"] < 1e-12
    assert balance["grid"]["n_t"] == 64


def test_analyze_respects_grid_values(tmp_path):
    path = simple_setup(
        tmp_path, extra={"t_grid": {"values": [0.0, 1.0, 2.5]}, "s_grid": {"values": [0.0]}}
    )
    out = tmp_path / "o"
    assert main(["analyze", "--config", str(path), "--out", str(out)]) == EXIT_OK
    rows = (out / "instantaneous.csv").read_text(encoding="utf-8").splitlines()
    assert len(rows) == 1 + 3
    assert rows[1].split(",")[0] == "0"
    assert rows[3].split(",")[0] == "2.5"
    # u = sqrt(2) cos t across 2 ohms: p(0) = 1 W exactly on this path
    assert float(rows[1].split(",")[1]) == pytest.approx(1.0, rel=1e-15)


def test_analyze_format_restriction(tmp_path):
    path = simple_setup(tmp_path, extra={"s_grid": {"values": [0.0]}})
    out_csv = tmp_path / "csv_only"
    assert main(["analyze", "--config", str(path), "--out", str(out_csv),
                 "--format", "csv"]) == EXIT_OK
    assert {p.name for p in out_csv.iterdir()} == {"instantaneous.csv", "scaled_s0.csv"}

    out_json = tmp_path / "json_only"
    assert main(["analyze", "--config", str(path), "--out", str(out_json),
                 "--format", "json"]) == EXIT_OK
    assert {p.name for p in out_json.iterdir()} == {"summary.json", "balance.json"}


def test_analyze_runs_are_byte_identical(bench_dir):
    cfg = str(bench_dir / "flicker_config.json")
    out_a, out_b = bench_dir / "a", bench_dir / "b"
    assert main(["analyze", "--config", cfg, "--out", str(out_a)]) == EXIT_OK
    assert main(["analyze", "--config", cfg, "--out", str(out_b)]) == EXIT_OK
    for path_a in sorted(out_a.iterdir()):
        path_b = out_b / path_a.name
        assert path_a.read_bytes() == path_b.read_bytes()


def test_csv_uses_full_precision_and_lf(tmp_path):
    path = simple_setup(tmp_path, extra={"t_grid": {"values": [1.0 / 3.0]}})
    out = tmp_path / "o"
    assert main(["analyze", "--config", str(path), "--out", str(out)]) == EXIT_OK
    raw = (out / "instantaneous.csv").read_bytes()
    assert b"\r" not in raw
    assert b"0.33333333333333331" in raw  # .17g round-trips doubles exactly


# ----------------------------------------------------------------------
# sweep-s


def test_sweep_single_tone_decay(tmp_path):
    # 1 H inductor: mean X and mean Q both carry exp(-2 omega s)
    write_json(
        tmp_path / "net.json",
        {
            "branches": [
                {"id": "l1", "kind": "inductor", "value": 1.0, "nodes": ["p", "0"]}
            ],
            "port": {"plus": "p", "ground": "0"},
        },
    )
    s_values = [0.0, 0.25, 0.5, 1.0]
    write_json(
        tmp_path / "config.json",
        {
            "netlist": "net.json",
            "source": {"lines": [{"amplitude_peak": ROOT2, "omega": 1.0}]},
            "s_grid": {"values": s_values},
        },
    )
    out = tmp_path / "o"
    code = main(["sweep-s", "--config", str(tmp_path / "config.json"), "--out", str(out)])
    assert code == EXIT_OK
    rows = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "s,mean_X,mean_Q"
    table = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    assert np.allclose(table[:, 0], s_values)
    assert np.allclose(table[:, 1], 0.5 * np.exp(-2.0 * table[:, 0]), rtol=1e-12)
    assert np.allclose(table[:, 2], 1.0 * np.exp(-2.0 * table[:, 0]), rtol=1e-12)


def test_sweep_slope_at_origin_matches_budeanu(bench_dir):
    h = 1e-6
    cfg = json.loads((bench_dir / "flicker_config.json").read_text(encoding="utf-8"))
    cfg["s_grid"] = {"values": [0.0, h]}
    write_json(bench_dir / "cfg2.json", cfg)
    out = bench_dir / "o"
    assert main(["sweep-s", "--config", str(bench_dir / "cfg2.json"),
                 "--out", str(out)]) == EXIT_OK
    rows = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()[1:]
    (s0, x0, q0), (s1, x1, _) = ([float(v) for v in r.split(",")] for r in rows)
    assert q0 == pytest.approx(-30.15, rel=1e-12)
    # mean Q = -d(mean X)/ds, so a forward difference of mean X recovers Q_B
    assert -(x1 - x0) / h == pytest.approx(-30.15, rel=1e-4)


# ----------------------------------------------------------------------
# verify


def test_verify_passes_with_default_tolerance(bench_dir, capsys):
    assert main(["verify", "--config", str(bench_dir / "flicker_config.json")]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    assert all("PASS" in ln for ln in lines)
    assert lines[0].startswith("instantaneous balance: PASS")
    assert lines[3].startswith("budeanu cross-check: PASS")


def test_verify_fails_with_zero_tolerance(bench_dir, capsys):
    code = main(["verify", "--config", str(bench_dir / "flicker_config.json"),
                 "--tol", "0"])
    assert code == EXIT_NUMERIC
    out = capsys.readouterr().out
    assert "FAIL" in out and "exceeds" in out
