"""Built-in periodic advection problems for measuring the schemes' convergence order.

The flux is linear (``f(s) = s``) and the velocity constant, so the exact
solution is the translated initial profile ``0.5 + 0.25 sin(2 pi x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .flow import LinearFlux
from .grid import CellField, FaceVelocityField, Grid2D, VertexVelocityField
from .integrator import advance
from .reconstruction import THETA_DEFAULT
from .scheme import ConvectionOperator, SchemeKind

PROBLEMS = ("1d", "2d")


def _sinc(h: float) -> float:
    return math.sin(math.pi * h) / (math.pi * h)


def exact_average(grid: Grid2D, problem: str, t: float) -> CellField:
    """Exact cell averages of the advected sine wave at time ``t``.

    ``1d``: profile in x moving with velocity (1, 0); ``2d``: profile in
    ``x + y`` moving with velocity (1, 1).
    """
    X, Y = grid.cell_centers()
    if problem == "1d":
        phase = X - t
        damp = _sinc(grid.dx)
    elif problem == "2d":
        phase = X + Y - 2.0 * t
        damp = _sinc(grid.dx) * _sinc(grid.dy)
    else:
        raise ValueError(f"unknown problem {problem!r}; choose from {PROBLEMS}")
    return CellField(grid, 0.5 + 0.25 * damp * np.sin(2.0 * np.pi * phase))


def problem_grid(problem: str, n: int, ny_1d: int = 4) -> Grid2D:
    if problem == "1d":
        return Grid2D(n, ny_1d, 1.0 / n, 1.0 / ny_1d)
    return Grid2D(n, n, 1.0 / n, 1.0 / n)


def solve(problem: str, n: int, kind: SchemeKind | str, theta: float = THETA_DEFAULT, t_end: float = 1.0, sigma: float = 0.4) -> CellField:
    """Advect the initial cell averages to ``t_end`` on an ``n``-cell (per direction) grid."""
    grid = problem_grid(problem, n)
    vy = 0.0 if problem == "1d" else 1.0
    periodic = (True, problem == "2d")
    op = ConvectionOperator(
        grid,
        VertexVelocityField.uniform(grid, 1.0, vy),
        FaceVelocityField.uniform(grid, 1.0, vy),
        LinearFlux(),
        theta,
        SchemeKind.parse(kind),
        periodic=periodic,
    )
    rate = 1.0 / grid.dx + vy / grid.dy
    dt = sigma / rate
    s0 = exact_average(grid, problem, 0.0)
    s, _ = advance(s0, 0.0, t_end, op, lambda _s: dt, max_steps=10**7)
    return s


def restrict(s: CellField, problem: str) -> np.ndarray:
    """Average a fine solution onto the grid with half the cells per refined direction."""
    v = s.values
    if problem == "1d":
        return 0.5 * (v[:, 0::2] + v[:, 1::2])
    return 0.25 * (v[0::2, 0::2] + v[0::2, 1::2] + v[1::2, 0::2] + v[1::2, 1::2])


def l1(a: np.ndarray, cell_area: float) -> float:
    return float(np.abs(a).sum() * cell_area)


@dataclass
class ConvergenceTable:
    problem: str
    kind: SchemeKind
    theta: float
    sizes: tuple[int, ...]
    exact_errors: list[float]
    self_differences: list[float]

    @property
    def exact_rates(self) -> list[float]:
        e = self.exact_errors
        return [math.log2(e[i] / e[i + 1]) for i in range(len(e) - 1)]

    @property
    def self_rates(self) -> list[float]:
        d = self.self_differences
        return [math.log2(d[i] / d[i + 1]) for i in range(len(d) - 1)]

    def format(self) -> str:
        lines = [f"# {self.problem} {self.kind.name} theta={self.theta}", "n,L1_exact,rate_exact"]
        rates = [float("nan"), *self.exact_rates]
        lines += [f"{n},{e:.6e},{r:.3f}" for n, e, r in zip(self.sizes, self.exact_errors, rates)]
        lines.append("pair,L1_self,rate_self")
        pairs = [f"{a}/{b}" for a, b in zip(self.sizes[:-1], self.sizes[1:])]
        srates = [float("nan"), *self.self_rates]
        lines += [f"{p},{d:.6e},{r:.3f}" for p, d, r in zip(pairs, self.self_differences, srates)]
        return "\n".join(lines)


def study(
    problem: str,
    kind: SchemeKind | str,
    sizes: tuple[int, ...] = (64, 128, 256),
    theta: float = THETA_DEFAULT,
    t_end: float = 1.0,
) -> ConvergenceTable:
    """Errors against the exact solution and successive-resolution differences."""
    kind = SchemeKind.parse(kind)
    sols = [solve(problem, n, kind, theta, t_end) for n in sizes]
    exact = [l1(s.values - exact_average(s.grid, problem, t_end).values, s.grid.cell_area) for s in sols]
    diffs = [
        l1(coarse.values - restrict(fine, problem), coarse.grid.cell_area)
        for coarse, fine in zip(sols[:-1], sols[1:])
    ]
    return ConvergenceTable(problem, kind, theta, tuple(sizes), exact, diffs)
