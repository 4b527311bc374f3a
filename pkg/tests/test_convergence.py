from __future__ import annotations

import math

import numpy as np
import pytest

from sdflow.convergence import exact_average, problem_grid, restrict, solve, study
from sdflow.grid import project_to_cell_averages


@pytest.mark.parametrize("problem", ["1d", "2d"])
def test_exact_average_matches_fine_quadrature(problem):
    g = problem_grid(problem, 16)
    t = 0.3
    if problem == "1d":
        f = lambda x, y: 0.5 + 0.25 * np.sin(2 * np.pi * (x - t))
    else:
        f = lambda x, y: 0.5 + 0.25 * np.sin(2 * np.pi * (x + y - 2 * t))
    # Gauss-Legendre per cell as the independent oracle
    xg, wg = np.polynomial.legendre.leggauss(6)
    X, Y = g.cell_centers()
    acc = np.zeros(g.shape)
    for xi, wi in zip(xg, wg):
        for yj, wj in zip(xg, wg):
            acc += 0.25 * wi * wj * f(X + 0.5 * g.dx * xi, Y + 0.5 * g.dy * yj)
    np.testing.assert_allclose(exact_average(g, problem, t).values, acc, atol=1e-13)
    # midpoint projection differs at O(h^2)
    mid = project_to_cell_averages(f, g).values
    assert np.abs(mid - acc).max() < (np.pi * g.dx) ** 2


def test_restrict_preserves_mean():
    fine = solve("2d", 16, "SD1_2D", t_end=0.1)
    r = restrict(fine, "2d")
    assert r.shape == (8, 8) and r.mean() == pytest.approx(fine.values.mean(), rel=1e-14)


def test_periodic_solution_conserves_mass():
    s = solve("2d", 16, "SD2_2D", t_end=0.25)
    assert s.values.mean() == pytest.approx(0.5, abs=1e-14)


def test_study_tables_small():
    tab = study("1d", "SD2_2D", (32, 64, 128), t_end=0.5)
    assert len(tab.exact_rates) == 2 and len(tab.self_rates) == 1
    assert all(r > 1.5 for r in tab.exact_rates)
    assert tab.self_rates[0] > 1.5
    text = tab.format()
    assert "n,L1_exact,rate_exact" in text and "32/64,64/128" not in text


def test_first_order_scheme_rates():
    tab = study("1d", "SD1_2D", (32, 64, 128), t_end=0.5)
    assert all(0.6 < r < 1.2 for r in tab.exact_rates)
    assert not any(math.isnan(e) for e in tab.exact_errors)
