from __future__ import annotations

import subprocess
import sys
from importlib import resources

import pytest

from knotren import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_matches_everything(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert out.strip().splitlines()[-1].split() == ["matched", "12/12"]


def test_verify_reports_first_mismatch(tmp_path, capsys):
    raw = resources.files("knotren").joinpath("data/golden_ladder.txt").read_text()
    bad = raw.replace("Z(3) := 5/4*x^-1 - 19/24*x^-2", "Z(3) := 5/4*x^-1 - 17/24*x^-2")
    assert bad != raw
    path = tmp_path / "golden.txt"
    path.write_text(bad)
    code, out, _ = run(capsys, "verify", "--golden", str(path))
    assert code == 1
    lines = [l for l in out.splitlines() if "MISMATCH" in l]
    assert lines == ["Z(3)     MISMATCH at x^-2 []: golden -17/24, computed -19/24"]


def test_verify_small_window(capsys):
    code, out, _ = run(capsys, "verify", "--order", "2")
    assert code == 1
    assert "truncation window too small" in out


def test_zfactor_ladder_and_overlap(capsys):
    code, out, _ = run(capsys, "zfactor", "--loops", "2", "--format", "machine")
    assert code == 0
    assert "series=-1/2*x^-2 + 1/2*x^-1" in out.splitlines()
    code, out, _ = run(capsys, "zfactor", "--loops", "2", "--overlap", "--format", "machine")
    assert "series=-x^-2 + x^-1" in out.splitlines()
    assert "kind=overlap" in out.splitlines()


def test_zfactor_family_file(tmp_path, capsys):
    f = tmp_path / "shifted.txt"
    f.write_text("a_eps = 1/2\n")
    code, out, _ = run(capsys, "zfactor", "--loops", "2", "--family", str(f))
    assert code == 0 and "loops" in out
    f.write_text("flavour = up\n")
    code, _, err = run(capsys, "zfactor", "--loops", "2", "--family", str(f))
    assert code == 1 and "bad family file" in err


def test_zero_loops_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["zfactor", "--loops", "0"])
    assert info.value.code == 2


def test_braid_commands(capsys):
    code, out, _ = run(capsys, "braid", "reduce", "s3 s2 s1 s2 s3 s1 s2", "--format", "machine")
    rows = dict(l.split("=", 1) for l in out.splitlines())
    assert rows["result"] == "s1^5" and rows["replay"] == "ok"
    code, out, _ = run(capsys, "braid", "lookup", "s1^7")
    assert "(2,7), ζ(7)" in out
    code, out, _ = run(capsys, "braid", "components", "(s1 s2)^4", "--format", "machine")
    assert "components=1" in out.splitlines()
    code, out, _ = run(capsys, "braid", "skein", "s1^2 s2^2", "--format", "machine")
    assert "terms=4" in out.splitlines()


def test_braid_parse_error_has_position(capsys):
    code, _, err = run(capsys, "braid", "reduce", "s1 x2")
    assert code == 1
    assert "position 3" in err


def test_euler_commands(capsys):
    code, out, _ = run(capsys, "euler", "count", "12", "2", "--format", "machine")
    assert "E=3" in out.splitlines()
    code, out, _ = run(capsys, "euler", "zigzag", "5")
    assert "441/8 * zet(7) ≈ 55.585253915678495" in out
    code, out, _ = run(capsys, "euler", "families", "7", "--format", "machine")
    assert "depth3=1: N(5,3,3)" in out.splitlines()


def test_rational_commands(capsys):
    code, out, _ = run(capsys, "rational", "s", "4", "3", "--format", "machine")
    assert "S=0" in out.splitlines()
    code, out, _ = run(capsys, "rational", "check", "1/2*x^-1 - ge*x^-2", "--format", "machine")
    assert code == 1 and "first_offender=x^-2 [ge]" in out.splitlines()


def test_numeric_commands(capsys):
    code, out, _ = run(capsys, "numeric", "eval", "1/2*x^-1 - 1/2*x^-2", "--eps", "1/10",
                       "--format", "machine")
    assert "value=-45.0" in out.splitlines()
    code, out, _ = run(capsys, "numeric", "fit", "6*zet(3)", "--basis", "zet(3)")
    assert code == 0 and "6 * zet(3)" in out
    code, out, _ = run(capsys, "numeric", "fit", "7.21234141895757", "--basis", "zet(3)")
    assert code == 1 and "failed" in out
    code, out, _ = run(capsys, "numeric", "gegenbauer", "1000", "--format", "machine")
    assert "status=ok" in out.splitlines()


def test_output_is_deterministic(capsys):
    first = run(capsys, "zfactor", "--loops", "4", "--format", "machine")
    second = run(capsys, "zfactor", "--loops", "4", "--format", "machine")
    assert first == second


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "knotren", "euler", "count", "3", "1",
                           "--format", "machine"], capture_output=True, text=True, check=True)
    assert "E=1" in proc.stdout.splitlines()
