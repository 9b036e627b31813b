from __future__ import annotations

import csv
import subprocess
import sys

import numpy as np
import pytest

from moyalrg.cli import CSV_COLUMNS, InputError, RunConfig, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_classify_nonplanar_tadpole(capsys):
    code, out, _ = run(capsys, "classify", "tadpole_np")
    assert code == 0
    assert "g=0 B=2 planar_irregular ω≥−2 finite_renormalization" in out
    assert "n=1 N=2 L=1 F=2" in out


def test_classify_fourpoint(capsys):
    code, out, _ = run(capsys, "classify", "fourpoint_irregular")
    assert code == 0 and "g=0 B=2" in out and out.rstrip().endswith("convergent")


def test_classify_graph_file(capsys, tmp_path):
    f = tmp_path / "loop.graph"
    f.write_text("vertex v1: h1 h2 h3 h4\nedge e1: h1 h2\nexternal k1: h3\nexternal k2: h4\n")
    code, out, _ = run(capsys, "classify", str(f))
    assert code == 0 and "planar_regular" in out


def test_classify_valence_error_exits_2(capsys, tmp_path):
    f = tmp_path / "bad.graph"
    f.write_text("vertex v1: h1 h2 h3\nedge e1: h1 h2\nexternal k1: h3\n")
    code, _, err = run(capsys, "classify", str(f))
    assert code == 2 and "valence 3" in err


def test_unknown_graph_exits_2(capsys):
    code, _, err = run(capsys, "classify", "no_such_graph")
    assert code == 2 and "neither" in err


def test_bad_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["scan", "--graph", "tadpole_np"])
    assert info.value.code == 2


def test_rosette(capsys):
    code, out, _ = run(capsys, "rosette", "sunset_np", "--all")
    assert code == 0
    assert out.count("rosette (") == 3 and "g=1 B=1 nonplanar" in out


def test_powercount(capsys, tmp_path):
    f = tmp_path / "att.txt"
    f.write_text("scale ea: 1\nscale eb: 1\n")
    code, out, _ = run(capsys, "powercount", "bubble_regular", str(f))
    assert code == 0 and out.rstrip().endswith("bound M^0")
    f.write_text("scale ea: 1\n")
    assert run(capsys, "powercount", "bubble_regular", str(f))[0] == 2


def test_amplitude(capsys):
    code, out, _ = run(capsys, "amplitude", "tadpole_np", "--k", "0.5")
    assert code == 0 and "method=bessel1d" in out


def test_scan_row_count_and_ir_fit(capsys, tmp_path):
    out = tmp_path / "ir.csv"
    code, _, _ = run(capsys, "scan", "--graph", "tadpole_np", "--axis", "k", "--min", "1e-3",
                     "--max", "1e-1", "--points", "20", "--log", "--workers", "4", "--out", str(out))
    assert code == 0
    header, rows = read_csv(out)
    assert tuple(header) == CSV_COLUMNS and len(rows) == 20
    assert all(r[-1] == "ok" for r in rows)
    assert [float(r[0]) for r in rows] == sorted(float(r[0]) for r in rows)
    code, text, _ = run(capsys, "fit", str(out))
    assert code == 0 and "ir_structure" in text and "r2 " in text


def test_massless_fit_reports_vanishing_log(capsys, tmp_path):
    out = tmp_path / "m0.csv"
    assert run(capsys, "scan", "--graph", "tadpole_np", "--min", "1e-3", "--max", "1e-1",
               "--points", "12", "--log", "--a", "0", "--mu2", "0", "--cutoff", "ir",
               "--workers", "4", "--out", str(out))[0] == 0
    code, text, _ = run(capsys, "fit", str(out))
    line = text.splitlines()[0]
    c_log = float(line.split("c_log = ")[1].split(" ")[0])
    err = float(line.split("c_log = ")[1].split("± ")[1].split(",")[0])
    assert abs(c_log) <= 2 * err


def test_uv_scan_monotone_and_power_law(capsys, tmp_path):
    out = tmp_path / "uv.csv"
    assert run(capsys, "scan", "--graph", "tadpole_planar", "--axis", "uv", "--min", "1", "--max", "100",
               "--points", "16", "--out", str(out))[0] == 0
    _, rows = read_csv(out)
    values = [float(r[1]) for r in rows]
    assert len(rows) == 16 and all(b > a for a, b in zip(values, values[1:]))
    wide = tmp_path / "uv_wide.csv"
    run(capsys, "scan", "--graph", "tadpole_planar", "--axis", "uv", "--min", "10", "--max", "1000",
        "--points", "10", "--log", "--out", str(wide))
    code, text, _ = run(capsys, "fit", "--axis", "uv", str(wide))
    assert code == 0
    head = text.splitlines()[0].split()
    assert head[:2] == ["power_law", "exponent"] and abs(float(head[2]) - 2.0) <= 0.1


def test_fourpoint_uv_fit_is_log_law(capsys, tmp_path):
    out = tmp_path / "bubble.csv"
    run(capsys, "scan", "--graph", "bubble_regular", "--axis", "uv", "--min", "10", "--max", "1000",
        "--points", "8", "--log", "--workers", "4", "--out", str(out))
    code, text, _ = run(capsys, "fit", "--axis", "uv", str(out))
    assert code == 0 and text.startswith("log_law")


def test_scan_is_byte_identical(capsys, tmp_path):
    args = ["scan", "--graph", "sunset_np", "--axis", "uv", "--min", "10", "--max", "100", "--points", "3",
            "--log", "--samples", "20000", "--seed", "7"]
    paths = [tmp_path / f"run{i}.csv" for i in range(3)]
    run(capsys, *args, "--out", str(paths[0]))
    run(capsys, *args, "--out", str(paths[1]))
    run(capsys, *args, "--workers", "3", "--out", str(paths[2]))
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]
    assert b"," in data[0] and b";" not in data[0]


def test_scan_records_row_errors(capsys, tmp_path):
    out = tmp_path / "err.csv"
    # k = 0 has no slice window
    code, _, err = run(capsys, "scan", "--graph", "tadpole_np", "--min", "0", "--max", "1",
                       "--points", "3", "--out", str(out))
    _, rows = read_csv(out)
    assert code == 1 and len(rows) == 3
    assert rows[0][-1].startswith("error") and rows[1][-1] == "ok"


def test_fit_malformed_csv(capsys, tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("x,y\n1,2\n")
    assert run(capsys, "fit", str(f))[0] == 2
    f.write_text("axis,re,im,abs_err,status\n1,abc,0,0,ok\n")
    assert run(capsys, "fit", str(f))[0] == 2
    assert run(capsys, "fit", str(tmp_path / "missing.csv"))[0] == 2


def test_run_config_invariants():
    with pytest.raises(InputError):
        RunConfig("scan", grid_min=2.0, grid_max=1.0)
    with pytest.raises(InputError):
        RunConfig("scan", points=1)
    with pytest.raises(InputError):
        RunConfig("scan", seed=2 ** 64)
    cfg = RunConfig("scan", grid_min=1.0, grid_max=100.0, points=3, log=True)
    assert np.allclose(cfg.grid(), [1.0, 10.0, 100.0])


def test_seed_accepts_u64(capsys):
    code, _, _ = run(capsys, "amplitude", "tadpole_np", "--seed", str(2 ** 64 - 1))
    assert code == 0
    with pytest.raises(SystemExit):
        main(["amplitude", "tadpole_np", "--seed", "-3"])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "moyalrg", "classify", "tadpole_np"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "finite_renormalization" in res.stdout
