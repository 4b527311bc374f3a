from __future__ import annotations

import numpy as np
import pytest

from sdflow.flow import RockFluidModel
from sdflow.grid import CellField, FaceVelocityField, Grid2D
from sdflow.pressure import (
    BoundaryFlux,
    IncompatibleSourcesError,
    PressureSolveError,
    Well,
    WellSet,
    assemble,
    discrete_divergence,
    face_velocities,
    harmonic_mean,
    solve_pressure,
    solve_velocity,
    transmissibilities,
    vertex_velocities,
)

M = RockFluidModel()


class UnitMobility:
    def mobility(self, s):
        return np.ones_like(np.asarray(s, dtype=float))


def test_harmonic_mean():
    assert harmonic_mean(1.0, 3.0) == 1.5
    assert harmonic_mean(0.0, 0.0) == 0.0
    rng = np.random.default_rng(0)
    a, b = rng.uniform(0.1, 10, 100), rng.uniform(0.1, 10, 100)
    assert np.all(harmonic_mean(a, b) <= 2 * np.minimum(a, b) + 1e-12)


def test_series_transmissibility():
    g = Grid2D(2, 2, 1.0, 1.0)
    K = CellField(g, [[1.0, 3.0], [1.0, 3.0]])
    t = transmissibilities(CellField.constant(g, 0.5), K, UnitMobility())
    assert t.tx[0, 1] == 1.5
    assert np.all(t.tx[:, [0, -1]] == 0) and np.all(t.ty[[0, -1], :] == 0)


def test_homogeneous_stencil_and_symmetry():
    g = Grid2D(5, 5, 1.0, 1.0)
    sys_ = assemble(CellField.constant(g, 0.5), CellField.constant(g, 1.0), UnitMobility())
    A = sys_.matrix.toarray()
    assert np.array_equal(A, A.T)
    i = 2 * 5 + 2
    row = A[i]
    assert row[i] == 4.0
    assert sorted(row[[i - 1, i + 1, i - 5, i + 5]]) == [-1.0] * 4
    assert np.count_nonzero(row) == 5
    rng = np.random.default_rng(1)
    g = Grid2D(7, 6, 0.5, 2.0)
    K = CellField(g, np.exp(rng.normal(size=g.shape)))
    s = CellField(g, rng.uniform(0.21, 0.85, g.shape))
    A = assemble(s, K, M).matrix
    assert (A != A.T).nnz == 0


def test_zero_rate_wells_and_zero_rhs():
    g = Grid2D(4, 4, 1.0, 1.0)
    sys_ = assemble(CellField.constant(g, 0.5), CellField.constant(g, 1.0), M, WellSet([Well((0, 0), 0.0)]))
    assert not sys_.rhs.any()
    assert not solve_pressure(sys_).values.any()


def test_incompatible_sources_rejected():
    with pytest.raises(IncompatibleSourcesError):
        WellSet([Well((0, 0), 1.0), Well((1, 1), -0.5)])
    g = Grid2D(4, 4, 1.0, 1.0)
    b = BoundaryFlux.no_flow(g)
    b.left[:] = 1.0
    with pytest.raises(IncompatibleSourcesError):
        assemble(CellField.constant(g, 0.5), CellField.constant(g, 1.0), M, boundary=b)


def test_well_outside_grid():
    g = Grid2D(4, 4, 1.0, 1.0)
    with pytest.raises(ValueError):
        WellSet([Well((4, 0), 1.0), Well((0, 0), -1.0)]).rates(g)


def test_nonpositive_permeability_rejected():
    g = Grid2D(3, 3, 1.0, 1.0)
    K = CellField.constant(g, 1.0)
    K.values[1, 1] = 0.0
    with pytest.raises(ValueError):
        transmissibilities(CellField.constant(g, 0.5), K, M)


def _column(K_values, u=0.7, dx=1.0):
    nx = len(K_values)
    g = Grid2D(nx, 2, dx, 1.0)
    K = CellField(g, np.tile(K_values, (2, 1)))
    b = BoundaryFlux.no_flow(g)
    b.left[:] = u
    b.right[:] = u
    p, vf = solve_velocity(CellField.constant(g, 0.5), K, UnitMobility(), boundary=b)
    return g, p, vf


def test_homogeneous_column_pressure_is_linear():
    u = 0.7
    g, p, vf = _column(np.ones(20), u)
    x = (np.arange(20) + 0.5) * g.dx
    exact = -u * x
    exact -= exact.mean()
    np.testing.assert_allclose(p.values, np.tile(exact, (2, 1)), rtol=0, atol=1e-9)
    np.testing.assert_allclose(vf.xfaces, u, atol=1e-9)
    np.testing.assert_allclose(vf.yfaces, 0.0, atol=1e-9)


def test_two_block_series_resistance():
    # cells 0..9 with K=1, 10..19 with K=3; unit mobility, flux u
    u = 0.7
    Kv = np.r_[np.ones(10), 3 * np.ones(10)]
    g, p, vf = _column(Kv, u)
    x = (np.arange(20) + 0.5) * g.dx
    # integrate -u/K from the first center; the interface face uses the harmonic mean
    exact = np.empty(20)
    exact[0] = 0.0
    for j in range(1, 20):
        t = 2 * Kv[j - 1] * Kv[j] / (Kv[j - 1] + Kv[j])
        exact[j] = exact[j - 1] - u * g.dx / t
    exact -= exact.mean()
    np.testing.assert_allclose(p.values[0], exact, rtol=0, atol=1e-9)
    # drop across the interface face: resistance 1/1.5
    assert p.values[0, 9] - p.values[0, 10] == pytest.approx(u / 1.5, abs=1e-9)
    # drop across a block-1 cell pair is u/1, across a block-2 pair u/3
    assert p.values[0, 3] - p.values[0, 4] == pytest.approx(u, abs=1e-9)
    assert p.values[0, 13] - p.values[0, 14] == pytest.approx(u / 3, abs=1e-9)
    del x


def test_five_spot_divergence_residual():
    g = Grid2D(32, 32, 2.0, 2.0)
    rng = np.random.default_rng(3)
    K = CellField(g, np.exp(rng.normal(size=g.shape)))
    wells = WellSet([Well((0, 0), 2.0), Well((31, 31), -2.0)])
    _, vf = solve_velocity(CellField.constant(g, 0.21), K, M, wells)
    div = discrete_divergence(vf).values
    src = wells.rates(g) / g.cell_area
    scale = np.abs(vf.xfaces).mean() + np.abs(vf.yfaces).mean()
    assert np.abs(div - src).max() <= 1e-9 * scale
    interior = np.abs(div - src).sum()
    assert interior <= 1e-9 * (np.abs(vf.xfaces).sum() + np.abs(vf.yfaces).sum())


def test_well_free_domain_divergence():
    g = Grid2D(16, 8, 1.0, 1.0)
    b = BoundaryFlux.no_flow(g)
    b.left[:] = 0.3
    b.right[:] = 0.3
    rng = np.random.default_rng(4)
    K = CellField(g, np.exp(rng.normal(size=g.shape)))
    _, vf = solve_velocity(CellField.constant(g, 0.5), K, M, boundary=b)
    assert np.abs(discrete_divergence(vf).values).max() <= 1e-9


def test_face_velocity_examples():
    g = Grid2D(4, 3, 1.0, 1.0)
    t = transmissibilities(CellField.constant(g, 0.5), CellField.constant(g, 1.0), UnitMobility())
    vf = face_velocities(CellField.constant(g, 3.0), t)
    assert not vf.xfaces.any() and not vf.yfaces.any()
    X, _ = g.cell_centers()
    vf = face_velocities(CellField(g, -2.0 * X), t)
    np.testing.assert_allclose(vf.xfaces[:, 1:-1], 2.0)
    assert not vf.yfaces.any()


def test_divergence_examples():
    g = Grid2D(4, 3, 0.5, 1.0)
    assert not discrete_divergence(FaceVelocityField.uniform(g, 2.0, -1.0)).values.any()
    xf = np.arange(g.nx + 1) * g.dx
    vf = FaceVelocityField(g, np.tile(xf, (g.ny, 1)), np.zeros((g.ny + 1, g.nx)))
    np.testing.assert_allclose(discrete_divergence(vf).values, 1.0)


def test_vertex_interpolation():
    g = Grid2D(5, 4, 1.0, 1.0)
    v = vertex_velocities(FaceVelocityField.uniform(g, 1.7, -0.4))
    np.testing.assert_allclose(v.vx, 1.7, rtol=1e-15)
    np.testing.assert_allclose(v.vy, -0.4, rtol=1e-15)
    z = vertex_velocities(FaceVelocityField.zeros(g))
    assert not z.vx.any() and not z.vy.any()


def test_vertex_interpolation_hand_evaluation():
    g = Grid2D(2, 2, 1.0, 1.0)
    xf = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    yf = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    v = vertex_velocities(FaceVelocityField(g, xf, yf))
    # center vertex: eighth of the eight x-face samples of the four cells
    assert v.vx[1, 1] == pytest.approx((1 + 2 + 2 + 3 + 4 + 5 + 5 + 6) / 8)
    assert v.vy[1, 1] == pytest.approx((1 + 3 + 2 + 4 + 3 + 5 + 4 + 6) / 8)
    # corner vertex: one cell, renormalized
    assert v.vx[0, 0] == pytest.approx((1 + 2) / 2)
    # edge vertex between two cells
    assert v.vx[0, 1] == pytest.approx((1 + 2 + 2 + 3) / 4)


def test_vertex_interpolation_is_linear():
    rng = np.random.default_rng(5)
    g = Grid2D(6, 5, 1.0, 1.0)

    def rand():
        return FaceVelocityField(g, rng.normal(size=(5, 7)), rng.normal(size=(6, 6)))

    a, b = rand(), rand()
    comb = FaceVelocityField(g, 2 * a.xfaces - 3 * b.xfaces, 2 * a.yfaces - 3 * b.yfaces)
    va, vb, vc = vertex_velocities(a), vertex_velocities(b), vertex_velocities(comb)
    np.testing.assert_allclose(vc.vx, 2 * va.vx - 3 * vb.vx, atol=1e-13)
    np.testing.assert_allclose(vc.vy, 2 * va.vy - 3 * vb.vy, atol=1e-13)


def test_solver_reports_nonconvergence():
    g = Grid2D(16, 16, 1.0, 1.0)
    wells = WellSet([Well((0, 0), 1.0), Well((15, 15), -1.0)])
    sys_ = assemble(CellField.constant(g, 0.5), CellField.constant(g, 1.0), M, wells)
    with pytest.raises(PressureSolveError, match="residual"):
        solve_pressure(sys_, maxiter=2)


def test_warm_start_gives_same_solution():
    g = Grid2D(16, 16, 1.0, 1.0)
    wells = WellSet([Well((0, 0), 1.0), Well((15, 15), -1.0)])
    sys_ = assemble(CellField.constant(g, 0.5), CellField.constant(g, 1.0), M, wells)
    p = solve_pressure(sys_)
    p2 = solve_pressure(sys_, x0=p)
    assert abs(p.values.mean()) < 1e-12
    np.testing.assert_allclose(p2.values, p.values, atol=1e-9 * np.abs(p.values).max())


def test_high_contrast_near_converged_start_meets_bound():
    # log-permeability std 3 over a slab with edge flux; start from a slightly
    # perturbed solution, where the initial residual is mostly round-off
    rng = np.random.default_rng(8)
    g = Grid2D(128, 32, 1.0, 1.0)
    K = CellField(g, np.exp(3.0 * rng.normal(size=g.shape)))
    s = CellField(g, rng.uniform(0.21, 0.85, g.shape))
    b = BoundaryFlux.no_flow(g)
    b.left[:] = 0.05
    b.right[:] = 0.05
    sys_ = assemble(s, K, M, boundary=b)
    p = solve_pressure(sys_)
    rhs = sys_.rhs - sys_.rhs.mean()

    def rel_res(x):
        return np.linalg.norm(rhs - sys_.matrix @ x.values.ravel()) / np.linalg.norm(rhs)

    assert rel_res(p) <= 1e-10
    near = CellField(g, p.values * (1 + 1e-12 * rng.normal(size=g.shape)))
    assert rel_res(solve_pressure(sys_, x0=near)) <= 1e-10
