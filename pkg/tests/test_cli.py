import csv
import io

import numpy as np
import pytest

from dataeff import CpaConfig, CraConfig, FadingModel, LinkParams, eor_cra, ior_cra
from dataeff.cli import main
from dataeff.units import db_to_linear

COMMON = ["--B", "200kHz", "--N0", "1e-9"]


@pytest.fixture(autouse=True)
def fixed_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_sweep(path):
    lines = path.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return meta, rows[0], rows[1:]


def test_eval_eor_matches_library(capsys):
    code, out, _ = run(
        capsys, "eval", "--metric", "eor", "--strategy", "cra", "--H", "50kB", "--Eth", "0.05J",
        "--Pt", "0.2W", "--fading", "rayleigh", "--gbar", "-10dB", *COMMON,
    )
    assert code == 0
    value = float(out.strip())
    expected = eor_cra(LinkParams(2e5, 1e-9), CraConfig(0.2), FadingModel.rayleigh(0.1), 4e5, 0.05)
    assert value == expected
    assert 0.0 <= value <= 1.0


def test_eval_held(capsys):
    code, out, _ = run(
        capsys, "eval", "--metric", "mec", "--strategy", "cpa", "--H", "50kB", "--g", "0.001",
        "--gammac", "10", "--Pmax", "0.5W", *COMMON,
    )
    assert code == 0
    assert out.strip() == "HELD"


def test_eval_zero_bits(capsys):
    code, out, _ = run(capsys, "eval", "--metric", "mid", "--strategy", "cra", "--E", "80mJ", "--g", "0", "--Pt", "0.2W", *COMMON)
    assert code == 0
    assert out.strip() == "0 bits"


def test_eval_mec_units(capsys):
    code, out, _ = run(capsys, "eval", "--metric", "mec", "--strategy", "cra", "--H", "50kB", "--g", "0.1", "--Pt", "0.2W", *COMMON)
    assert code == 0
    number, unit = out.split()
    assert unit == "J"
    assert float(number) == pytest.approx(0.0600761932894752, rel=1e-12)


def test_eval_regime_violation_is_domain_exit(capsys):
    code, _, err = run(capsys, "eval", "--metric", "mid", "--strategy", "cra", "--E", "80mJ", "--g", "0.1",
                       "--Pt", "0.2W", "--Tc", "10ms", *COMMON)
    assert code == 1
    assert "mid_cra_multi" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--metric", "eor", "--strategy", "cra"],
        ["eval", "--metric", "eor", "--strategy", "cra", "--H", "50kg"],
        ["eval", "--metric", "nope"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_domain_error_exit_1(capsys):
    code, _, err = run(capsys, "eval", "--metric", "eor", "--strategy", "cra", "--H", "50kB", "--Eth", "0.05J",
                       "--Pt", "0.2W", "--fading", "nakagami", "--m", "0.2", "--gbar", "-10dB", *COMMON)
    assert code == 1
    assert "error" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# baseline point\nmetric = eor\nstrategy = cra\nH = 50kB\nEth = 1J\nPt = 0.2W\nB = 200kHz\nfading = rayleigh\ngbar = -10dB\n")
    code, out, _ = run(capsys, "eval", "--config", str(cfg), "--Eth", "0.05J")
    assert code == 0
    expected = eor_cra(LinkParams(2e5, 1e-9), CraConfig(0.2), FadingModel.rayleigh(0.1), 4e5, 0.05)
    assert float(out) == expected


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--config", str(cfg)])
    assert exc.value.code == 2


EOR_CRA = ["--metric", "eor", "--strategy", "cra", "--H", "50kB", "--Pt", "0.2W", "--fading", "rayleigh", "--gbar", "-10dB", *COMMON]


def test_sweep_eor_monotone_in_threshold(tmp_path, capsys):
    out = tmp_path / "eor.csv"
    code, _, _ = run(capsys, "sweep", *EOR_CRA, "--swept", "E_th", "--min", "1mJ", "--max", "1J", "--points", "30",
                     "--spacing", "log", "--out", str(out))
    assert code == 0
    meta, header, rows = read_sweep(out)
    assert header == ["E_th", "value"]
    assert len(rows) == 30
    values = [float(v) for _, v in rows]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert "# param N0: 1e-09 W/Hz" in meta
    assert any(line.startswith("# timestamp: 2023-11-14") for line in meta)


def test_sweep_irrelevant_parameter_is_constant(tmp_path, capsys):
    out = tmp_path / "pmax.csv"
    code, _, _ = run(capsys, "sweep", *EOR_CRA, "--Eth", "0.05J", "--swept", "p_max", "--min", "0.2W", "--max", "0.5W",
                     "--points", "2", "--out", str(out))
    assert code == 0
    _, _, rows = read_sweep(out)
    assert rows[0][1] == rows[1][1]


def test_sweep_ior_nondecreasing(tmp_path, capsys):
    out = tmp_path / "ior.csv"
    code, _, _ = run(capsys, "sweep", "--metric", "ior", "--strategy", "cra", "--E", "80mJ", "--Pt", "0.2W",
                     "--fading", "nakagami", "--m", "2", "--gbar", "-10dB", *COMMON,
                     "--swept", "H_th", "--min", "10kB", "--max", "1MB", "--points", "25", "--spacing", "log",
                     "--out", str(out))
    assert code == 0
    _, header, rows = read_sweep(out)
    assert header == ["H_th", "value"]
    values = [float(v) for _, v in rows]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    link, cra, fading = LinkParams(2e5, 1e-9), CraConfig(0.2), FadingModel.nakagami(2, 0.1)
    for x, v in rows:
        assert float(v) == ior_cra(link, cra, fading, 0.08, float(x))


def test_sweep_lossless_values(tmp_path, capsys):
    out = tmp_path / "db.csv"
    code, _, _ = run(capsys, "sweep", *EOR_CRA, "--Eth", "0.05J", "--swept", "avg_gain_db", "--min", "-20dB",
                     "--max", "0", "--points", "7", "--out", str(out))
    assert code == 0
    _, header, rows = read_sweep(out)
    assert header == ["avg_gain_db", "value"]
    grid = np.linspace(-20, 0, 7)
    link = LinkParams(2e5, 1e-9)
    for (x, v), db in zip(rows, grid):
        assert float(x) == db
        assert float(v) == eor_cra(link, CraConfig(0.2), FadingModel.rayleigh(db_to_linear(db)), 4e5, 0.05)


def test_sweep_held_token(tmp_path, capsys):
    out = tmp_path / "held.csv"
    code, _, _ = run(capsys, "sweep", "--metric", "mec", "--strategy", "cpa", "--H", "50kB", "--g", "0.002",
                     "--Pmax", "0.5W", *COMMON, "--swept", "gamma_c", "--min", "1", "--max", "10", "--points", "4",
                     "--out", str(out))
    assert code == 0
    _, _, rows = read_sweep(out)
    tokens = [v for _, v in rows]
    assert tokens[0] != "HELD" and tokens[-1] == "HELD"


def test_sweep_with_simulation_columns(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    code, _, _ = run(capsys, "sweep", *EOR_CRA, "--swept", "E_th", "--min", "0.05", "--max", "0.2", "--points", "3",
                     "--simulate", "20000", "--seed", "7", "--out", str(out))
    assert code == 0
    meta, header, rows = read_sweep(out)
    assert header == ["E_th", "value", "p_hat", "std_error"]
    assert "# seed: 7" in meta
    assert any(line.startswith("# generator: ") for line in meta)
    for _, value, p_hat, se in rows:
        assert abs(float(value) - float(p_hat)) <= max(3 * float(se), 1e-4)


def test_sweep_bad_grid(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", *EOR_CRA, "--swept", "E_th", "--min", "1J", "--max", "1mJ", "--points", "3", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["sweep", *EOR_CRA, "--swept", "E_th", "--min", "1mJ", "--max", "1J", "--points", "1", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_sweep_unwritable_path(capsys):
    code, _, err = run(capsys, "sweep", *EOR_CRA, "--swept", "E_th", "--min", "1mJ", "--max", "1J", "--points", "3",
                       "--out", "/nonexistent-dir/out.csv")
    assert code == 1
    assert "error" in err


VERIFY_CRA = ["verify", "--metric", "eor", "--strategy", "cra", "--H", "50kB", "--Eth", "0.05J", "--Pt", "0.2W",
              "--fading", "rayleigh", "--gbar", "-10dB", *COMMON]


def test_verify_pass(capsys):
    code, out, _ = run(capsys, *VERIFY_CRA, "--n", "1000000", "--seed", "3")
    assert code == 0
    assert out.strip().endswith("verdict: PASS")
    assert "closed_form:" in out and "p_hat:" in out and "gap:" in out


def test_verify_huge_threshold(capsys):
    code, out, _ = run(capsys, *VERIFY_CRA, "--Eth", "1e30", "--n", "10000")
    assert code == 0
    fields = dict(line.split(": ", 1) for line in out.splitlines() if not line.startswith("#"))
    assert float(fields["closed_form"]) <= 1e-12
    assert float(fields["p_hat"]) == 0.0


def test_verify_fail_exit_3(capsys, monkeypatch):
    import dataeff.cli as cli

    real = cli.compute
    monkeypatch.setattr(cli, "compute", lambda *a: real(*a) + 0.1)
    code, out, _ = run(capsys, *VERIFY_CRA, "--n", "10000")
    assert code == 3
    assert "verdict: FAIL" in out


def test_verify_degenerate_cutoff(capsys):
    code, _, err = run(capsys, "verify", "--metric", "eor", "--strategy", "cpa", "--H", "50kB", "--Eth", "0.02J",
                       "--gammac", "10", "--Pmax", "1e-9W", "--fading", "rayleigh", "--gbar", "-10dB", *COMMON,
                       "--n", "1000")
    assert code == 1
    assert "cutoff" in err


def test_verify_rejects_non_outage_metric():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--metric", "mec", "--strategy", "cra"])
    assert exc.value.code == 2
