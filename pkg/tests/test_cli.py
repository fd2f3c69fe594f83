import json
import subprocess
import sys

import numpy as np
import pytest

from hfrac.cli import main, read_any
from hfrac.fields import load_field


def test_field_sample_and_convert_round_trip(tmp_path, capsys):
    a = tmp_path / "g.hfld"
    assert main(["field", "sample", "gaussian", "a=2", "b=1", "--counts", "8,8,16", "--out", str(a)]) == 0
    f = load_field(a)
    assert f.spec.counts == (8, 8, 16)
    assert f.values[4, 4].real.max() == pytest.approx(np.exp(-2 * 2 * 0.375 ** 2 - 0.25 ** 2), rel=1e-12)
    b, c = tmp_path / "g.npz", tmp_path / "back.hfld"
    assert main(["field", "convert", str(a), str(b)]) == 0
    assert main(["field", "convert", str(b), str(c)]) == 0
    assert a.read_bytes() == c.read_bytes()
    assert read_any(b).spec == f.spec
    assert "gaussian" in capsys.readouterr().out


def test_bad_inputs_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.hfld"
    bad.write_bytes(b"nope")
    assert main(["field", "convert", str(bad), str(tmp_path / "x.npz")]) == 2
    assert main(["field", "sample", "gaussian", "a=-1", "--counts", "8,8,16",
                 "--out", str(tmp_path / "y.hfld")]) == 2
    assert main(["kernels", "build", "heat", "--param", "1", "--counts", "16,17,33",
                 "--out", str(tmp_path / "k.hfld")]) == 2
    with pytest.raises(SystemExit):
        main(["field", "sample", "gaussian", "a2", "--out", str(tmp_path / "z.hfld")])
    err = capsys.readouterr().err
    assert "hfrac: error" in err


def test_kernels_build(tmp_path, capsys):
    out = tmp_path / "h.hfld"
    assert main(["kernels", "build", "heat", "--param", "1", "--counts", "13,13,17",
                 "--half-widths", "3,6", "--out", str(out)]) == 0
    k = load_field(out)
    assert k.values.real.sum() * k.spec.cell_volume == pytest.approx(1.0, abs=1e-3)
    assert "mass" in capsys.readouterr().out


def test_run_subcommand(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("homog_r = 2\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--experiment", "E4,E8", "--out", str(out)]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["config"]["homog_r"] == [2.0]
    assert (out / "E4_cases.csv").exists() and (out / "E8_cases.csv").exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert main(["run", "--config", str(bad), "--out", str(out)]) == 2


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "hfrac.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for word in ("run", "field", "kernels"):
        assert word in r.stdout
