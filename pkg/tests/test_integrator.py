from __future__ import annotations

import math

import numpy as np
import pytest

from sdflow.flow import RockFluidModel
from sdflow.grid import CellField, FaceVelocityField, Grid2D, VertexVelocityField, total_mass
from sdflow.integrator import CflPolicy, StepFailure, advance, cfl_dt, rk2_step
from sdflow.scheme import ConvectionOperator

M = RockFluidModel()


class UnitSpeed:
    max_speed = 1.0


def test_policy_validation():
    with pytest.raises(ValueError):
        CflPolicy(sigma=0.5)
    with pytest.raises(ValueError):
        CflPolicy(sigma=0.0)
    with pytest.raises(ValueError):
        CflPolicy(dt_min=2.0, dt_max=1.0)


def test_cfl_example():
    g = Grid2D(4, 4, 1.0, 1.0)
    s = CellField.constant(g, 0.5)
    v = VertexVelocityField.uniform(g, 2.0, 1.0)
    assert cfl_dt(s, v, UnitSpeed(), CflPolicy(0.45)) == pytest.approx(0.225, rel=1e-15)


def test_cfl_no_flow_and_homogeneity():
    g = Grid2D(4, 4, 1.0, 1.0)
    s = CellField.constant(g, 0.5)
    pol = CflPolicy(dt_max=3.0)
    assert cfl_dt(s, VertexVelocityField.uniform(g, 0.0, 0.0), M, pol) == 3.0
    v1 = VertexVelocityField.uniform(g, 0.1, 0.05)
    v2 = VertexVelocityField.uniform(g, 0.2, 0.1)
    assert cfl_dt(s, v2, M, pol) == pytest.approx(0.5 * cfl_dt(s, v1, M, pol), rel=1e-15)


def test_cfl_includes_face_velocities():
    g = Grid2D(4, 4, 1.0, 1.0)
    s = CellField.constant(g, 0.5)
    v = VertexVelocityField.uniform(g, 1.0, 0.0)
    vf = FaceVelocityField.uniform(g, 4.0, 0.0)
    assert cfl_dt(s, v, UnitSpeed(), vface=vf) == pytest.approx(0.45 / 4.0)


def test_cfl_rejects_nonfinite():
    g = Grid2D(2, 2, 1.0, 1.0)
    s = CellField(g, [[np.nan, 0.0], [0.0, 0.0]])
    with pytest.raises(StepFailure):
        cfl_dt(s, VertexVelocityField.uniform(g, 1.0, 0.0), M)


def test_rk2_examples():
    g = Grid2D(3, 2, 1.0, 1.0)
    s = CellField(g, np.arange(6.0).reshape(2, 3))
    out = rk2_step(s, 0.3, lambda x: CellField.constant(g, 0.0))
    assert np.array_equal(out.values, s.values)
    c = CellField(g, np.full(g.shape, 2.0))
    out = rk2_step(s, 0.25, lambda x: c)
    np.testing.assert_array_equal(out.values, s.values + 0.5)
    assert rk2_step(1.0, 0.1, lambda y: -y) == pytest.approx(0.905, abs=1e-15)


def test_rk2_reports_nonfinite():
    with pytest.raises(StepFailure):
        rk2_step(np.array([1.0]), 1.0, lambda y: np.array([np.inf]))


def test_rk2_is_second_order():
    errs = []
    for n in (10, 20, 40, 80):
        y = np.array([1.0])
        dt = 1.0 / n
        for _ in range(n):
            y = rk2_step(y, dt, lambda u: -u)
        errs.append(abs(y[0] - math.exp(-1.0)))
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(3)]
    assert all(abs(r - 2.0) <= 0.1 for r in rates)


def test_advance_clips_final_step_and_identity():
    s, n = advance(1.0, 2.0, 2.0, lambda y: -y, lambda y: 0.3)
    assert s == 1.0 and n == 0
    times = []
    s, n = advance(1.0, 0.0, 1.0, lambda y: 0.0 * y, lambda y: 0.3, on_step=lambda a, b, t, dt: times.append(t))
    assert n == 4 and times[-1] == 1.0
    s, n = advance(2.0, 0.0, 1.0, lambda y: 0.0, lambda y: 5.0)
    assert s == 2.0 and n == 1
    with pytest.raises(ValueError):
        advance(1.0, 1.0, 0.0, lambda y: y, lambda y: 0.1)


def test_advance_runaway_and_early_stop():
    with pytest.raises(StepFailure):
        advance(1.0, 0.0, 1.0, lambda y: 0.0, lambda y: 1e-3, max_steps=10)
    s, n = advance(1.0, 0.0, 1.0, lambda y: 0.0, lambda y: 0.1, on_step=lambda a, b, t, dt: t >= 0.3 - 1e-12)
    assert n == 3


def test_advance_converges_under_dt_refinement():
    # 1D advection: smaller micro-steps approach the fine reference as O(dt^2)
    g = Grid2D(32, 2, 1.0 / 32, 0.5)
    x = (np.arange(32) + 0.5) / 32
    s0 = CellField(g, np.tile(0.5 + 0.25 * np.sin(2 * np.pi * x), (2, 1)))
    from sdflow.flow import LinearFlux

    op = ConvectionOperator(g, VertexVelocityField.uniform(g, 1.0, 0.0), FaceVelocityField.uniform(g, 1.0, 0.0), LinearFlux(), periodic=(True, False))
    ref, _ = advance(s0, 0.0, 0.25, op, lambda s: 0.025 / 32)
    errs = []
    for c in (0.4, 0.2, 0.1):
        out, _ = advance(s0, 0.0, 0.25, op, lambda s, c=c: c / 32)
        errs.append(np.abs(out.values - ref.values).max())
    assert errs[1] < errs[0] / 3 and errs[2] < errs[1] / 3


def test_step_mass_accounting():
    rng = np.random.default_rng(0)
    g = Grid2D(9, 7, 1.0, 1.0)
    s = CellField(g, rng.uniform(0.21, 0.85, g.shape))
    vf = FaceVelocityField(g, rng.normal(size=(7, 10)), rng.normal(size=(8, 9)))
    v = VertexVelocityField(g, rng.normal(size=(8, 10)), rng.normal(size=(8, 10)))
    op = ConvectionOperator(g, v, vf, M)
    dt = 0.01
    s1 = s + dt * op(s)
    out = rk2_step(s, dt, op)
    expected = 0.5 * dt * (op.net_inflow(s) + op.net_inflow(s1))
    assert total_mass(out) - total_mass(s) == pytest.approx(expected, rel=1e-12)


def test_determinism():
    rng = np.random.default_rng(1)
    g = Grid2D(9, 7, 1.0, 1.0)
    s = CellField(g, rng.uniform(0.21, 0.85, g.shape))
    v = VertexVelocityField.uniform(g, 0.3, 0.2)
    vf = FaceVelocityField.uniform(g, 0.3, 0.2)
    op = ConvectionOperator(g, v, vf, M)
    a = rk2_step(s, 0.01, op)
    b = rk2_step(s, 0.01, op)
    assert np.array_equal(a.values, b.values)
