import subprocess
import sys

import numpy as np
import pytest

from heavy_elliptic import cli, io


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    status = cli.main([*argv, "--out", str(out)])
    return status, out


def test_figure_small_n(tmp_path):
    status, out = run(tmp_path, "figure", "--which", "2a", "--n", "40")
    assert status == 0
    header, data = io.read_csv(out / "figure_2a.csv")
    assert header == ["re", "im"] and data.shape == (40, 2)
    assert (out / "figure_2a.svg").read_text().startswith("<svg")


@pytest.mark.parametrize("argv", [
    ("spectrum", "--n", "30", "--theta", "circle", "--seed", "3"),
    ("singvals", "--n", "30", "--z", "0.5,0.1"),
    ("stieltjes", "--n", "20", "--eta", "0.5,1", "--trials", "3"),
    ("pwit", "--branching", "5", "--depth", "3", "--trials", "20", "--theta", "axes-arcs", "--b", "0.5"),
    ("rde", "--pool", "500", "--gens", "3", "--terms", "10", "--energies=-1,1,3", "--eta", "0.2"),
    ("hermitize", "--n", "15", "--window=-1,1,-1,1", "--h", "0.25", "--theta", "circle"),
    ("lsv", "--n", "20", "--trials", "5"),
])
def test_config_rerun_is_byte_identical(tmp_path, argv):
    status, first = run(tmp_path, *argv, name="a")
    assert status == 0
    status, second = run(tmp_path, argv[0], "--config", str(first / "config.txt"), name="b")
    assert status == 0
    files = sorted(p.name for p in first.iterdir())
    assert files == sorted(p.name for p in second.iterdir())
    for f in files:
        assert (first / f).read_bytes() == (second / f).read_bytes(), f


def test_singvals_rows(tmp_path):
    _, out = run(tmp_path, "singvals", "--n", "25")
    _, data = io.read_csv(out / "singular_values.csv")
    assert data.shape == (25, 1) and np.all(data >= 0)


def test_pwit_row(tmp_path):
    _, out = run(tmp_path, "pwit", "--branching", "4", "--depth", "2", "--trials", "10")
    header, data = io.read_csv(out / "pwit_estimate.csv")
    assert tuple(header) == io.PWIT_HEADER and data.shape == (1, 12)
    assert data[0, 4] > 0


def test_hermitize_refuses_line_support(tmp_path):
    status, out = run(tmp_path, "hermitize", "--n", "10", "--theta", "diagonal-arcs", "--b", "0")
    assert status == 2 and not (out / "mu_grid.csv").exists()


def test_crossval_free_case(tmp_path):
    atoms = tmp_path / "atoms.csv"
    atoms.write_text("1,0,0,0,1e-300\n")
    status, out = run(tmp_path, "crossval", "--theta", f"atoms(file={atoms})", "--diag", "zero",
                      "--n", "10", "--trials", "3", "--pwit-trials", "5", "--branching", "3",
                      "--depth", "2", "--pool", "200", "--gens", "2", "--terms", "5")
    assert status == 0
    text = (out / "crossval.txt").read_text().splitlines()
    assert text[:3] == ["matrix im_m=1.0 se=0.0", "pwit im_m=1.0 se=0.0", "rde im_m=1.0 se=0.0"]


def test_crossval_deterministic(tmp_path):
    argv = ("crossval", "--theta", "circle", "--n", "20", "--trials", "3", "--pwit-trials", "10",
            "--branching", "5", "--depth", "3", "--pool", "300", "--gens", "3", "--terms", "10")
    _, a = run(tmp_path, *argv, name="a")
    _, b = run(tmp_path, *argv, name="b")
    assert (a / "crossval.txt").read_bytes() == (b / "crossval.txt").read_bytes()


def test_concentration(tmp_path):
    status, out = run(tmp_path, "concentration", "--n-list", "10,20", "--trials", "20")
    assert status == 0
    _, data = io.read_csv(out / "concentration.csv")
    assert data.shape == (2, 2) and list(data[:, 0]) == [10, 20]
    with pytest.raises(ValueError):
        run(tmp_path, "concentration", "--n-list", "10", "--trials", "5")


def test_unknown_config_key(tmp_path):
    (tmp_path / "c.txt").write_text("bogus = 1\n")
    with pytest.raises(SystemExit):
        cli.main(["spectrum", "--config", str(tmp_path / "c.txt")])


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "heavy_elliptic", "spectrum", "--n", "8",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "eigenvalues.csv").exists()
