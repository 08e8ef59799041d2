import math

import numpy as np
import pytest

from heavy_elliptic import io
from heavy_elliptic.ensemble import ResolventBlock
from heavy_elliptic.heavy_sampler import ArcUniform, ConfigurationError, DiscreteAtoms


def test_csv_round_trip(tmp_path):
    e = np.array([1 / 3 + 0.1j, -2.5e-17 - 7j])
    p = io.write_eigenvalues(tmp_path / "e.csv", e)
    header, data = io.read_csv(p)
    assert tuple(header) == io.EIGENVALUE_HEADER
    assert np.array_equal(data[:, 0] + 1j * data[:, 1], e)


def test_headers_written(tmp_path):
    io.write_singular_values(tmp_path / "s.csv", [1.0, 2.0])
    io.write_stieltjes(tmp_path / "m.csv", [(1.0, 0.1 + 0.5j)])
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "s"
    assert (tmp_path / "m.csv").read_text().splitlines() == ["eta_im,m_re,m_im", "1.0,0.1,0.5"]


def test_pwit_row_layout():
    blk = ResolventBlock(1 + 2j, 3 + 4j, 5 + 6j, 7 + 8j)
    row = io.pwit_row(0.5 + 0.25j, 1.0, blk, None)
    assert len(row) == len(io.PWIT_HEADER)
    assert row[:9] == (0.5, 0.25, 1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0) and math.isnan(row[-1])


def test_empty_csv(tmp_path):
    io.write_singular_values(tmp_path / "s.csv", [])
    header, data = io.read_csv(tmp_path / "s.csv")
    assert header == ["s"] and data.shape == (0, 1)


def test_config_round_trip(tmp_path):
    p = io.write_config(tmp_path / "c.txt", {"alpha": 1.25, "theta": "circle", "skip": None})
    p.write_text(p.read_text() + "# comment\n\nprune-tol = 0.0\n")
    assert io.read_config(p) == {"alpha": "1.25", "theta": "circle", "prune_tol": "0.0"}
    p.write_text("no equals sign\n")
    with pytest.raises(ConfigurationError):
        io.read_config(p)


@pytest.mark.parametrize("text,value", [("pi", math.pi), ("5pi/4", 5 * math.pi / 4),
                                        ("-3*pi/2", -1.5 * math.pi), ("0.25", 0.25)])
def test_eval_number(text, value):
    assert io.eval_number(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["__import__('os')", "pi**2", "x", "1+"])
def test_eval_number_rejects(text):
    with pytest.raises(ConfigurationError):
        io.eval_number(text)


def test_parse_theta_arcs():
    spec = io.parse_theta("arcs(centers=pi/4,5pi/4; b=0.5)", 1.25)
    assert isinstance(spec.angular, ArcUniform)
    assert spec.angular.centers == pytest.approx((math.pi / 4, 5 * math.pi / 4))
    assert spec.angular.halfwidth == pytest.approx(0.5 * math.pi / 4)


def test_parse_theta_atoms(tmp_path):
    (tmp_path / "a.csv").write_text("re1,im1,re2,im2,weight\n1,0,0,0,0.5\n0,0,0,1,1.5\n")
    spec = io.parse_theta("atoms(file=a.csv)", 1.5, base_dir=tmp_path)
    assert isinstance(spec.angular, DiscreteAtoms)
    assert spec.total_mass == 2.0
    with pytest.raises(ConfigurationError):
        io.parse_theta("atoms()", 1.5)


def test_parse_theta_presets_and_errors():
    assert io.parse_theta("circle", 1.25).alpha == 1.25
    for bad in ("", "arcs(", "nonsense-name"):
        with pytest.raises((ConfigurationError, ValueError)):
            io.parse_theta(bad, 1.25)


def test_svg_crop(tmp_path):
    pts = [0j, 1 + 1j, 10 + 0j]
    p = io.svg_scatter(tmp_path / "s.svg", pts, window=(-2, 2, -2, 2))
    text = p.read_text()
    assert text.startswith("<svg") and text.count("<circle") == 2
    p = io.svg_scatter(tmp_path / "t.svg", pts)
    assert p.read_text().count("<circle") == 3
