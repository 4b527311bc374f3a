from __future__ import annotations

import numpy as np
import pytest

from sdflow.grid import CellField, Grid2D, total_mass
from sdflow.io import format_snapshot, read_snapshot, write_snapshot, write_vtk


def test_two_by_two_csv_exact():
    g = Grid2D(2, 2, 1.0, 1.0)
    s = CellField(g, [[0.0, 1.0], [2.0, 3.0]])
    assert format_snapshot(s, 0.0) == "2,2,1.0,1.0,0.0\n0.0,1.0\n2.0,3.0\n"


def test_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    g = Grid2D(7, 5, 0.1, 1.0 / 3.0)
    s = CellField(g, rng.random(g.shape))
    path = write_snapshot(s, 350.0 / 7.0, tmp_path / "a" / "snap.csv")
    back, t = read_snapshot(path)
    assert np.array_equal(back.values, s.values)
    assert back.grid.dx == g.dx and back.grid.dy == g.dy
    assert t == 350.0 / 7.0


def test_initial_slab_mass_from_file(tmp_path):
    g = Grid2D(256, 64, 1.0, 1.0)
    path = write_snapshot(CellField.constant(g, 0.21), 0.0, tmp_path / "s.csv")
    back, _ = read_snapshot(path)
    assert total_mass(back) == pytest.approx(0.21 * 256 * 64, rel=1e-14)


def test_vtk_output_deterministic(tmp_path):
    g = Grid2D(3, 2, 0.5, 0.25)
    s = CellField(g, np.arange(6.0).reshape(2, 3))
    p = write_snapshot(s, 1.5, tmp_path / "x.csv", vtk=True)
    vtk = p.with_suffix(".vtk").read_text()
    assert "DIMENSIONS 3 2 1" in vtk and "POINT_DATA 6" in vtk
    assert vtk.splitlines()[-6:] == ["0.0", "1.0", "2.0", "3.0", "4.0", "5.0"]
    again = write_vtk(s, tmp_path / "y.vtk", t=1.5).read_text()
    assert again == vtk


def test_io_errors_have_path_context(tmp_path):
    g = Grid2D(2, 2, 1.0, 1.0)
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        write_snapshot(CellField.constant(g, 0.0), 0.0, blocker / "sub" / "s.csv")
    with pytest.raises(OSError, match="missing.csv"):
        read_snapshot(tmp_path / "missing.csv")


def test_malformed_snapshot(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("2,2,1.0,1.0\n0,1\n2,3\n")
    with pytest.raises(ValueError):
        read_snapshot(p)
    p.write_text("2,2,1.0,1.0,0.0\n0,1\n")
    with pytest.raises(ValueError):
        read_snapshot(p)
