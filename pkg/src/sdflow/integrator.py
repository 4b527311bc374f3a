"""CFL-limited time steps and Heun's second-order Runge-Kutta method."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import CellField, FaceVelocityField, VertexVelocityField


class StepFailure(RuntimeError):
    """A step produced non-finite values or the step count ran away."""


@dataclass(frozen=True)
class CflPolicy:
    sigma: float = 0.45
    dt_min: float = 1e-12
    dt_max: float = 5.0

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma < 0.5:
            raise ValueError(f"CFL number must lie in (0, 0.5), got {self.sigma}")
        if not 0.0 < self.dt_min <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_max")


def cfl_dt(
    s: CellField,
    v: VertexVelocityField,
    m,
    policy: CflPolicy = CflPolicy(),
    vface: FaceVelocityField | None = None,
) -> float:
    """Largest stable convection step for the current velocities.

    Uses the global bound ``m.max_speed`` on ``|f'|`` rather than the range
    of the current field, so the step only changes when the velocities do.
    When ``vface`` is given its face velocities enter the maxima as well
    (the dimension-by-dimension flux uses them directly).
    """
    if not s.all_finite():
        raise StepFailure("non-finite saturation passed to the CFL computation")
    ux = float(np.abs(v.vx).max())
    uy = float(np.abs(v.vy).max())
    if vface is not None:
        ux = max(ux, float(np.abs(vface.xfaces).max()))
        uy = max(uy, float(np.abs(vface.yfaces).max()))
    fmax = float(m.max_speed)
    rate = max(ux * fmax / s.grid.dx, uy * fmax / s.grid.dy)
    if rate == 0.0:
        return policy.dt_max
    return float(np.clip(policy.sigma / rate, policy.dt_min, policy.dt_max))


def rk2_step(s, dt: float, rhs_fn: Callable):
    """One step of Heun's method (explicit trapezoid).

    Works on anything supporting ``+`` and scalar ``*``: floats, arrays or
    :class:`~sdflow.grid.CellField`.
    """
    s1 = s + dt * rhs_fn(s)
    out = 0.5 * (s + s1 + dt * rhs_fn(s1))
    finite = out.all_finite() if isinstance(out, CellField) else bool(np.all(np.isfinite(out)))
    if not finite:
        raise StepFailure("Runge-Kutta step produced non-finite values")
    return out


def advance(
    s,
    t_now: float,
    t_target: float,
    rhs_fn: Callable,
    dt_fn: Callable,
    max_steps: int = 1_000_000,
    on_step: Callable | None = None,
):
    """Integrate from ``t_now`` to exactly ``t_target``.

    ``dt_fn(s)`` proposes each micro-step; the last one is clipped to land on
    ``t_target``. ``on_step(s_old, s_new, t_new, dt)`` is called after each
    step; a truthy return value stops the integration early. Returns
    ``(s, steps)``.
    """
    if t_target < t_now:
        raise ValueError(f"t_target={t_target} precedes t_now={t_now}")
    t = t_now
    steps = 0
    while t < t_target:
        if steps >= max_steps:
            raise StepFailure(f"more than {max_steps} micro-steps before t={t_target} (stopped at t={t})")
        dt = dt_fn(s)
        if t + dt >= t_target or t_target - (t + dt) <= 1e-12 * max(1.0, abs(t_target)):
            dt = t_target - t
            t_next = t_target
        else:
            t_next = t + dt
        s_new = rk2_step(s, dt, rhs_fn)
        steps += 1
        stop = on_step(s, s_new, t_next, dt) if on_step is not None else False
        s, t = s_new, t_next
        if stop:
            break
    return s, steps
