import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from su2synth import cli
from su2synth.errors import InvalidInputError
from su2synth.solver import load_field
from su2synth.su2 import exp_map, group_distance
from su2synth.synthesis import FROM_IDENTITY, GateSequence

SMALL = ["--grid-h", "0.2", "--grid-extent", "1.6"]


@pytest.fixture(scope="module")
def small_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "f.bin"
    assert cli.main(["solve", *SMALL, "--out", str(out)]) == 0
    return out


def test_parse_matrix():
    U = cli.parse_matrix("0+0i 0-1i 0-1i 0+0i")
    np.testing.assert_allclose(U, exp_map(np.array([np.pi, 0, 0])), atol=1e-15)
    assert cli.parse_matrix("1,0,0,1")[0, 0] == 1
    for bad in ("1 0 0", "1 0 0 2", "a b c d"):
        with pytest.raises(InvalidInputError):
            cli.parse_matrix(bad)


def test_parse_point():
    np.testing.assert_array_equal(cli.parse_point("1,0.5,-2"), [1, 0.5, -2])
    with pytest.raises(InvalidInputError):
        cli.parse_point("1,2")


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"h": 0.25, "R": 2.0, "tol": 1e-4}))
    args = cli.build_parser().parse_args(["solve", "--config", str(cfg), "--grid-h", "0.5",
                                          "--out", "x"])
    c = cli.solver_config(args)
    assert (c.h, c.R, c.tol, c.n_dir) == (0.5, 2.0, 1e-4, 16)
    cfg.write_text(json.dumps({"bogus": 1}))
    args = cli.build_parser().parse_args(["solve", "--config", str(cfg), "--out", "x"])
    with pytest.raises(InvalidInputError):
        cli.solver_config(args)


def test_solve_writes_file(small_file, capsys):
    F = load_field(small_file)
    assert F.converged and F.config.h == 0.2


def test_solve_records_effective_config(small_file):
    head = json.loads(small_file.read_bytes().split(b"\n")[1])
    assert head["h"] == 0.2 and head["R"] == 1.6 and head["n_dir"] == 16
    assert head["meta"] == {"seed": 0}


def test_solve_no_convergence(tmp_path, capsys):
    out = tmp_path / "nc.bin"
    code = cli.main(["solve", *SMALL, "--tol", "0", "--max-iters", "5", "--out", str(out)])
    assert code == 3
    assert "NO_CONVERGENCE" in capsys.readouterr().err
    assert not load_field(out).converged


def test_solve_is_byte_identical(tmp_path):
    digests = []
    for name in ("a.bin", "b.bin"):
        out = tmp_path / name
        assert cli.main(["solve", *SMALL, "--out", str(out)]) == 0
        digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_invalid_input_exit_code(tmp_path, capsys):
    assert cli.main(["solve", "--grid-h", "-1", "--out", str(tmp_path / "x")]) == 2
    assert "INVALID_INPUT" in capsys.readouterr().err
    assert cli.main(["solve", "--dirs", "4", "--out", str(tmp_path / "x")]) == 2
    assert cli.main(["slice", "--field", str(tmp_path / "missing"), "--out", "x"]) == 2


def test_slice(small_file, tmp_path):
    ab, cb = tmp_path / "ab.csv", tmp_path / "cb.csv"
    assert cli.main(["slice", "--field", str(small_file), "--plane", "ab", "--out", str(ab)]) == 0
    assert cli.main(["slice", "--field", str(small_file), "--plane", "cb", "--out", str(cb)]) == 0
    assert ab.read_text().splitlines()[0] == "a,b,C"
    A = np.loadtxt(ab, delimiter=",", skiprows=1)
    B = np.loadtxt(cb, delimiter=",", skiprows=1)
    assert A[(A[:, 0] == 0) & (A[:, 1] == 0), 2][0] == 0.0
    assert (A[:, 2] >= 0).all()
    finite = np.isfinite(A[:, 2])
    assert np.abs(A[finite, 2] - B[finite, 2]).max() <= 2 * 0.2
    assert cli.main(["slice", "--field", str(small_file), "--plane", "ab", "--offset", "0.1",
                     "--out", str(ab)]) == 2


def test_trace(small_file, tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert cli.main(["trace", "--field", str(small_file), "--start", "1,0,0", "--dt", "0.05",
                     "--out", str(out)]) == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert rows[-1, 0] == pytest.approx(1.0)
    assert np.abs(rows[:, 2:4]).max() <= 1e-12
    assert cli.main(["trace", "--field", str(small_file), "--matrix", "1 0 0 1",
                     "--out", str(out)]) == 0
    assert np.loadtxt(out, delimiter=",", skiprows=1, ndmin=2).shape == (1, 6)
    assert cli.main(["trace", "--field", str(small_file), "--out", str(out)]) == 2


def test_trace_outside_grid(small_file, tmp_path):
    assert cli.main(["trace", "--field", str(small_file), "--start", "3,0,0",
                     "--out", str(tmp_path / "t.csv")]) == 2


def test_synth(small_file, tmp_path):
    out = tmp_path / "g.json"
    assert cli.main(["synth", "--field", str(small_file), "--target", "1,0,0", "--dt", "0.05",
                     "--out", str(out)]) == 0
    seq = GateSequence.from_json(out.read_text())
    assert seq.direction == FROM_IDENTITY
    assert len(seq.gates) == 20 and {a for a, _ in seq.gates} == {"X"}
    assert seq.error <= 1e-9
    assert group_distance(seq.product(), exp_map(np.array([1.0, 0, 0]))) <= 1e-9
    assert cli.main(["synth", "--field", str(small_file), "--matrix", "1 0 0 1",
                     "--out", str(out)]) == 0
    assert json.loads(out.read_text())["gates"] == []


def test_oracle(small_file, capsys):
    assert cli.main(["oracle", "--matrix", "1 0 0 1", "--field", str(small_file)]) == 0
    assert "gap=0.000000" in capsys.readouterr().out
    assert cli.main(["oracle", "--start", "1,0,0", "--field", str(small_file)]) == 0
    line = capsys.readouterr().out
    gap = float(line.split("gap=")[1].split()[0])
    assert gap <= max(0.2, 3 * 0.2)
    assert cli.main(["oracle", "--start", "0,1,0", "--h-o", "0.1", "--tau", "0.1",
                     "--field", str(small_file)]) == 0
    vals = dict(kv.split("=") for kv in capsys.readouterr().out.split())
    assert float(vals["oracle"]) > 1.0 and float(vals["solver"]) > 1.0
    assert cli.main(["oracle", "--start", "1,0,0", "--h-o", "0.1", "--tau", "0.05"]) == 2


@pytest.mark.parametrize("C, n, scale", [("0", "3", 0.0), ("2", "1", 800.0), ("2", "2", 51200.0)])
def test_bounds(capsys, C, n, scale):
    assert cli.main(["bounds", "--C", C, "--n", n, "--eps", "0.1"]) == 0
    out = capsys.readouterr().out
    got = float(out.split("scale: ")[1].split()[0])
    assert got == pytest.approx(scale, rel=1e-12)
    assert "disclaimer" in out


def test_no_numba_flag(tmp_path):
    from su2synth import _accel

    before = _accel.USE_NUMBA
    try:
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        assert cli.main(["--no-numba", "solve", *SMALL, "--out", str(a)]) == 0
        _accel.USE_NUMBA = before
        assert cli.main(["solve", *SMALL, "--out", str(b)]) == 0
        np.testing.assert_allclose(load_field(a).S, load_field(b).S, atol=1e-14)
    finally:
        _accel.USE_NUMBA = before


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "su2synth", "bounds", "--C", "2", "--eps", "0.1"],
                       capture_output=True, text=True, check=True)
    assert "scale: 8" in r.stdout
