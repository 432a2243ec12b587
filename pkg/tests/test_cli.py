from __future__ import annotations

import math
import subprocess
import sys
import textwrap
from pathlib import Path

import numpy as np
import pytest

from subdiff_inverse.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_UNSOLVABLE,
    OUTPUT_DIR_ENV,
    ConfigError,
    main,
    parse_config,
)
from subdiff_inverse.inverse_solver import read_solution_csv
from subdiff_inverse.spectral_space import read_vector_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

MINIMAL_FORWARD = """
[problem]
rho = 1
T = 1
K = 4

[operator]
kind = dirichlet_1d
length = pi

[g]
kind = const
c = 1

[phi]
kind = coeffs
values = 1, 0, 0, 0

[f]
kind = coeffs
values = 0, 0, 0, 0
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


@pytest.fixture(autouse=True)
def _outdir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "out"))
    return tmp_path / "out"


# {{{ parsing

def test_minimal_forward_config(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL_FORWARD), "forward")
    assert (cfg.rho, cfg.T, cfg.K) == (1.0, 1.0, 4)
    assert np.allclose(cfg.operator.eigenvalues, np.arange(1, 5) ** 2)
    assert cfg.phi.coeffs.tolist() == [1, 0, 0, 0]
    assert not np.any(cfg.f.coeffs)


def test_rho_out_of_range(tmp_path):
    path = write(tmp_path, MINIMAL_FORWARD.replace("rho = 1", "rho = 1.5"))
    with pytest.raises(ConfigError, match=r"rho out of \(0, 1\]"):
        parse_config(path, "forward")


def test_missing_section_named(tmp_path):
    path = write(tmp_path, MINIMAL_FORWARD.replace("[f]", "[psi]"))
    with pytest.raises(ConfigError, match=r"\[psi\]: section not used"):
        parse_config(path, "forward")
    path = write(tmp_path, MINIMAL_FORWARD.split("[f]")[0])
    with pytest.raises(ConfigError, match=r"missing section \[psi\]"):
        parse_config(path, "inverse")


def test_unknown_key_has_line_number(tmp_path):
    path = write(tmp_path, MINIMAL_FORWARD.replace("c = 1", "c = 1\nrate = 2"))
    with pytest.raises(ConfigError) as exc:
        parse_config(path, "forward")
    # line 14 of the dedented file (it starts with a blank line)
    assert f"{path}:14:" in str(exc.value) and "unknown key 'rate'" in str(exc.value)


def test_unknown_section(tmp_path):
    path = write(tmp_path, MINIMAL_FORWARD + "\n[solver]\nmethod = x\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(path, "forward")


def test_syntax_error_has_line_number(tmp_path):
    path = write(tmp_path, MINIMAL_FORWARD.replace("K = 4", "K = 4\nnot a key value pair"))
    with pytest.raises(ConfigError, match=r"run.ini:6: cannot parse line 'not a key value pair'"):
        parse_config(path, "forward")


@pytest.mark.parametrize(("old", "new", "field"), [
    ("T = 1", "T = -1", r"\[problem\] t"),
    ("K = 4", "K = four", r"\[problem\] k"),
    ("length = pi", "length = 0", r"\[operator\] length"),
    ("kind = const", "kind = gaussian", r"\[g\] kind"),
    ("values = 1, 0, 0, 0", "values = 1, 0, 0, 0, 0", r"\[phi\] values"),
    ("values = 0, 0, 0, 0", "values = 0, x", r"\[f\] values"),
])
def test_constraint_violations_name_field(tmp_path, old, new, field):
    path = write(tmp_path, MINIMAL_FORWARD.replace(old, new, 1))
    with pytest.raises(ConfigError, match=field):
        parse_config(path, "forward")


def test_sign_constant_checked_at_parse_time(tmp_path):
    text = MINIMAL_FORWARD.replace("kind = const\nc = 1",
                                   "kind = linear\na = 1\nb = -3\nsign_constant = true")
    with pytest.raises(ConfigError, match="sign-constant"):
        parse_config(write(tmp_path, text), "forward")


def test_vector_kinds(tmp_path):
    (tmp_path / "phi.csv").write_text("k,coeff\n1,0.5\n2,0.25\n3,0.0\n4,-1e-3\n")
    text = MINIMAL_FORWARD.replace(
        "[phi]\nkind = coeffs\nvalues = 1, 0, 0, 0",
        "[phi]\nkind = file\npath = phi.csv").replace(
        "[f]\nkind = coeffs\nvalues = 0, 0, 0, 0",
        "[f]\nkind = function\nname = sine\nn = 2")
    cfg = parse_config(write(tmp_path, text), "forward")
    assert cfg.phi.coeffs.tolist() == [0.5, 0.25, 0.0, -1e-3]
    # sin(2x) on (0, pi) is sqrt(pi / 2) times the second eigenfunction
    assert np.allclose(cfg.f.coeffs, [0, math.sqrt(math.pi / 2), 0, 0], atol=1e-13)


def test_random_vectors_are_seeded(tmp_path):
    text = MINIMAL_FORWARD.replace("kind = coeffs\nvalues = 1, 0, 0, 0",
                                   "kind = random\nseed = 4")
    a = parse_config(write(tmp_path, text), "forward").phi
    b = parse_config(write(tmp_path, text, "again.ini"), "forward").phi
    assert np.array_equal(a.coeffs, b.coeffs) and np.any(a.coeffs)
    with pytest.raises(ConfigError, match="seed"):
        parse_config(write(tmp_path, text.replace("seed = 4", "decay = 1")), "forward")


def test_explicit_operator(tmp_path):
    text = MINIMAL_FORWARD.replace("kind = dirichlet_1d\nlength = pi",
                                   "kind = explicit\neigenvalues = 1, 4, 9, 16, 25")
    cfg = parse_config(write(tmp_path, text), "forward")
    assert cfg.operator.eigenvalues.tolist() == [1, 4, 9, 16]
    bad = text.replace("1, 4, 9, 16, 25", "1, 4")
    with pytest.raises(ConfigError, match="K=4"):
        parse_config(write(tmp_path, bad), "forward")


def test_output_dir_override(tmp_path, monkeypatch):
    text = MINIMAL_FORWARD + "\n[output]\ndir = elsewhere\n"
    assert parse_config(write(tmp_path, text), "forward").output_dir == tmp_path / "out"
    monkeypatch.delenv(OUTPUT_DIR_ENV)
    assert parse_config(write(tmp_path, text), "forward").output_dir == Path("elsewhere")

# }}}


# {{{ runs

def test_forward_run(tmp_path, _outdir):
    assert main(["forward", str(write(tmp_path, MINIMAL_FORWARD))]) == EXIT_OK
    psi = read_vector_csv(_outdir / "psi.csv")
    # u_1 = e^{-t}, so psi_1 = 1 - e^{-1}
    assert abs(psi[1] - (1 - math.exp(-1))) < 1e-15
    assert (_outdir / "trajectory.csv").exists()
    assert "status = 0" in (_outdir / "diagnostics.txt").read_text()


def test_roundtrip_run_is_deterministic(_outdir):
    assert main(["roundtrip", str(CONFIGS / "roundtrip.ini")]) == EXIT_OK
    first = {p.name: p.read_bytes() for p in _outdir.glob("*.csv")}
    assert set(first) == {"f.csv", "f_true.csv", "psi.csv"}
    assert main(["roundtrip", str(CONFIGS / "roundtrip.ini")]) == EXIT_OK
    assert first == {p.name: p.read_bytes() for p in _outdir.glob("*.csv")}


def test_recovered_source_reloads_exactly(tmp_path, _outdir):
    assert main(["roundtrip", str(CONFIGS / "roundtrip.ini")]) == EXIT_OK
    f = read_solution_csv(_outdir / "f.csv")
    text = (CONFIGS / "roundtrip.ini").read_text().replace(
        "[f]\nkind = random\nseed = 12\ndecay = 2",
        f"[f]\nkind = file\npath = {_outdir / 'f.csv'}")
    cfg = parse_config(write(tmp_path, text), "roundtrip")
    assert np.array_equal(cfg.f.coeffs, f.coeffs)


def test_inverse_unsolvable(_outdir, capsys):
    code = main(["inverse", str(CONFIGS / "inverse_unsolvable.ini")])
    assert code == EXIT_UNSOLVABLE
    assert "k=3" in capsys.readouterr().err
    diag = (_outdir / "diagnostics.txt").read_text()
    assert "criterion=violated" in diag and "status = 3" in diag
    row = (_outdir / "f.csv").read_text().splitlines()[3].split(",")
    assert row[:3] == ["3", "", "1"] and abs(float(row[3]) - 1e-3) < 1e-9


def test_inverse_solvable(_outdir):
    assert main(["inverse", str(CONFIGS / "inverse.ini")]) == EXIT_OK
    f = read_solution_csv(_outdir / "f.csv")
    # the source of [source] is recovered except in the free mode 3
    assert np.allclose(f.coeffs, [0.5, -0.25, 0.0, 0.1, 0, 0, 0, 0], atol=1e-9)


def test_config_error_exit_and_diagnostics(tmp_path, _outdir):
    path = write(tmp_path, MINIMAL_FORWARD.replace("rho = 1", "rho = 1.5"))
    assert main(["forward", str(path)]) == EXIT_CONFIG
    assert "rho out of (0, 1]" in (_outdir / "diagnostics.txt").read_text()


def test_missing_config_is_io_error(tmp_path):
    assert main(["forward", str(tmp_path / "nope.ini")]) == EXIT_IO


def test_unwritable_output_is_io_error(tmp_path, monkeypatch):
    blocker = tmp_path / "file"
    blocker.write_text("")
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(blocker / "sub"))
    assert main(["forward", str(write(tmp_path, MINIMAL_FORWARD))]) == EXIT_IO


def test_numerical_failure_exit(tmp_path, _outdir):
    text = MINIMAL_FORWARD.replace("kind = const\nc = 1", "kind = cosine\nomega = 2000") \
        .replace("values = 0, 0, 0, 0", "values = 1, 0, 0, 0") \
        + "\n[quadrature]\npanels = 1\nnodes_per_panel = 2\nmax_doublings = 0\n"
    text = text.replace("kind = dirichlet_1d\nlength = pi",
                        "kind = explicit\neigenvalues = 1e-5, 1, 2, 3")
    assert main(["forward", str(write(tmp_path, text))]) == EXIT_NUMERICAL
    assert "numerical failure" in (_outdir / "diagnostics.txt").read_text()


def test_ml_eval(capsys):
    assert main(["ml-eval", "--rho", "0.5", "--mu", "1", "--z", "-1"]) == EXIT_OK
    value = float(capsys.readouterr().out)
    assert abs(value - 0.427583576155807) < 1e-15
    assert main(["ml-eval", "--rho", "1.5", "--z", "-1"]) == EXIT_CONFIG


def test_selftest_quick(_outdir, capsys):
    assert main(["selftest", "--quick"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "6/6 checks passed" in out
    assert (_outdir / "selftest.txt").read_text() == out


def test_console_entry_point(tmp_path, _outdir):
    proc = subprocess.run([sys.executable, "-m", "subdiff_inverse", "ml-eval",
                           "--rho", "1", "--z", "0"], capture_output=True, text=True)
    assert proc.returncode == 0 and float(proc.stdout) == 1.0

# }}}

# vim: foldmethod=marker
