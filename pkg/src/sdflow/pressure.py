"""Cell-centered (two-point flux) pressure solve and Darcy velocities.

The elliptic problem ``div(v) = q``, ``v = -lambda(s) K grad(p)`` is
discretized with face transmissibilities equal to the harmonic mean of the
cell-wise ``lambda * K``. Boundaries are either no-flow or carry a prescribed
normal velocity; the resulting pure-Neumann system is solved by Jacobi
preconditioned conjugate gradients on the compatible right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .grid import CellField, FaceVelocityField, Grid2D, VertexVelocityField


RESIDUAL_BOUND = 1e-10
MAX_RESTARTS = 5


class PressureSolveError(RuntimeError):
    pass


class IncompatibleSourcesError(ValueError):
    pass


@dataclass(frozen=True)
class Well:
    """Point source in one cell. ``rate`` is m^2/day per unit depth, > 0 injects."""

    cell: tuple[int, int]  # (j, k): column, row
    rate: float


@dataclass
class WellSet:
    wells: list[Well] = field(default_factory=list)

    def __post_init__(self) -> None:
        total = sum(w.rate for w in self.wells)
        scale = sum(abs(w.rate) for w in self.wells)
        if abs(total) > 1e-12 * max(scale, 1e-300) and scale > 0:
            raise IncompatibleSourcesError(f"well rates sum to {total}, expected 0")

    def __iter__(self):
        return iter(self.wells)

    def __len__(self) -> int:
        return len(self.wells)

    def rates(self, grid: Grid2D) -> np.ndarray:
        q = grid.zeros()
        for w in self.wells:
            j, k = w.cell
            if not (0 <= j < grid.nx and 0 <= k < grid.ny):
                raise ValueError(f"well cell {w.cell} outside the {grid.nx}x{grid.ny} grid")
            q[k, j] += w.rate
        return q


@dataclass(eq=False)
class BoundaryFlux:
    """Prescribed normal velocities on the four edges (m/day, +x/+y oriented).

    ``left``/``right`` have ``ny`` entries, ``bottom``/``top`` ``nx``. All
    zero means no flow everywhere.
    """

    left: np.ndarray
    right: np.ndarray
    bottom: np.ndarray
    top: np.ndarray

    @classmethod
    def no_flow(cls, grid: Grid2D) -> BoundaryFlux:
        return cls(np.zeros(grid.ny), np.zeros(grid.ny), np.zeros(grid.nx), np.zeros(grid.nx))

    def net_inflow(self, grid: Grid2D) -> float:
        return float(
            (self.left.sum() - self.right.sum()) * grid.dy + (self.bottom.sum() - self.top.sum()) * grid.dx
        )


@dataclass(eq=False)
class TransmissibilityField:
    """Face conductances ``lambda*K`` (harmonic mean across each face); zero on boundaries."""

    tx: np.ndarray
    ty: np.ndarray


@dataclass(eq=False)
class PressureSystem:
    grid: Grid2D
    matrix: sp.csr_matrix
    rhs: np.ndarray
    trans: TransmissibilityField
    boundary: BoundaryFlux


def harmonic_mean(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    total = a + b
    return np.divide(2.0 * a * b, total, out=np.zeros_like(total), where=total > 0.0)


def transmissibilities(s: CellField, K: CellField, m) -> TransmissibilityField:
    if np.any(K.values <= 0.0):
        raise ValueError("permeability must be positive everywhere")
    g = s.grid
    lk = m.mobility(s.values) * K.values
    tx = np.zeros((g.ny, g.nx + 1))
    ty = np.zeros((g.ny + 1, g.nx))
    tx[:, 1:-1] = harmonic_mean(lk[:, :-1], lk[:, 1:])
    ty[1:-1, :] = harmonic_mean(lk[:-1, :], lk[1:, :])
    return TransmissibilityField(tx, ty)


def assemble(
    s: CellField,
    K: CellField,
    m,
    wells: WellSet | None = None,
    boundary: BoundaryFlux | None = None,
) -> PressureSystem:
    """Five-point system ``A p = b`` in volumetric units (m^2/day per unit depth).

    Row ``i`` states that the net outflow of cell ``i`` equals its well rate
    plus prescribed boundary inflow.
    """
    g = s.grid
    wells = wells or WellSet()
    boundary = boundary or BoundaryFlux.no_flow(g)
    trans = transmissibilities(s, K, m)

    b = wells.rates(g)
    b[:, 0] += boundary.left * g.dy
    b[:, -1] -= boundary.right * g.dy
    b[0, :] += boundary.bottom * g.dx
    b[-1, :] -= boundary.top * g.dx
    total = b.sum()
    scale = np.abs(b).sum()
    if scale > 0 and abs(total) > 1e-12 * scale:
        raise IncompatibleSourcesError(f"sources and boundary inflow sum to {total}, expected 0")

    n = g.nx * g.ny
    idx = np.arange(n).reshape(g.shape)
    cx = trans.tx[:, 1:-1] * (g.dy / g.dx)
    cy = trans.ty[1:-1, :] * (g.dx / g.dy)
    i_x, j_x = idx[:, :-1].ravel(), idx[:, 1:].ravel()
    i_y, j_y = idx[:-1, :].ravel(), idx[1:, :].ravel()
    off_i = np.concatenate([i_x, j_x, i_y, j_y])
    off_j = np.concatenate([j_x, i_x, j_y, i_y])
    off_v = -np.concatenate([cx.ravel(), cx.ravel(), cy.ravel(), cy.ravel()])
    diag = np.zeros(g.shape)
    diag[:, :-1] += cx
    diag[:, 1:] += cx
    diag[:-1, :] += cy
    diag[1:, :] += cy
    A = sp.coo_matrix(
        (np.concatenate([off_v, diag.ravel()]), (np.concatenate([off_i, idx.ravel()]), np.concatenate([off_j, idx.ravel()]))),
        shape=(n, n),
    ).tocsr()
    return PressureSystem(g, A, b.ravel(), trans, boundary)


def solve_pressure(
    system: PressureSystem,
    rtol: float = 1e-12,
    maxiter: int | None = None,
    x0: CellField | None = None,
) -> CellField:
    """Zero-mean pressure with relative residual at most ``max(rtol, RESIDUAL_BOUND)``.

    CG iterates toward ``rtol``; the guaranteed bound is checked on the true
    residual. ``x0`` is an optional initial guess, typically the previous
    pressure.
    """
    g = system.grid
    b = system.rhs - system.rhs.mean()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return CellField(g, g.zeros())
    A = system.matrix
    d = A.diagonal()
    inv_d = np.divide(1.0, d, out=np.ones_like(d), where=d > 0)
    M = sp.diags(inv_d)
    maxiter = maxiter or 20 * A.shape[0]
    p = np.zeros_like(b) if x0 is None else x0.values.ravel() - x0.values.mean()
    target = max(rtol, RESIDUAL_BOUND)
    # Each pass solves for a correction from the true residual, projected to
    # zero mean. Near convergence the residual is mostly round-off with a
    # component along the constant null space; CG on that inconsistent system
    # diverges, and the recursively updated residual drifts from the true one.
    info = 0
    for _ in range(MAX_RESTARTS + 1):
        r = b - A @ p
        r -= r.mean()
        rnorm = np.linalg.norm(r)
        res = rnorm / bnorm
        if res <= target:
            break
        dp, info = cg(A, r, rtol=min(0.5, rtol * bnorm / rnorm), atol=0.0, maxiter=maxiter, M=M)
        p += dp - dp.mean()
        if info != 0:
            break
    res = np.linalg.norm(b - A @ p) / bnorm
    if info != 0 or res > target:
        raise PressureSolveError(f"conjugate gradients did not converge (info={info}, relative residual {res:.3e})")
    return CellField(g, p.reshape(g.shape))


def face_velocities(
    pressure: CellField,
    trans: TransmissibilityField,
    boundary: BoundaryFlux | None = None,
) -> FaceVelocityField:
    g = pressure.grid
    p = pressure.values
    vx = np.zeros((g.ny, g.nx + 1))
    vy = np.zeros((g.ny + 1, g.nx))
    vx[:, 1:-1] = -trans.tx[:, 1:-1] * (p[:, 1:] - p[:, :-1]) / g.dx
    vy[1:-1, :] = -trans.ty[1:-1, :] * (p[1:, :] - p[:-1, :]) / g.dy
    if boundary is not None:
        vx[:, 0], vx[:, -1] = boundary.left, boundary.right
        vy[0, :], vy[-1, :] = boundary.bottom, boundary.top
    return FaceVelocityField(g, vx, vy)


def _cell_to_vertex_mean(cell_sum: np.ndarray, samples_per_cell: int) -> np.ndarray:
    ny, nx = cell_sum.shape
    total = np.zeros((ny + 1, nx + 1))
    count = np.zeros((ny + 1, nx + 1))
    for dk in (0, 1):
        for dj in (0, 1):
            total[dk : dk + ny, dj : dj + nx] += cell_sum
            count[dk : dk + ny, dj : dj + nx] += samples_per_cell
    return total / count


def vertex_velocities(vf: FaceVelocityField) -> VertexVelocityField:
    """Vertex velocities as the mean of the face samples of the cells sharing the vertex.

    At an interior vertex each component is one eighth of the sum of the
    eight face values (two per cell, four cells). Boundary vertices average
    over the cells that exist.
    """
    sx = vf.xfaces[:, :-1] + vf.xfaces[:, 1:]
    sy = vf.yfaces[:-1, :] + vf.yfaces[1:, :]
    return VertexVelocityField(vf.grid, _cell_to_vertex_mean(sx, 2), _cell_to_vertex_mean(sy, 2))


def discrete_divergence(vf: FaceVelocityField) -> CellField:
    g = vf.grid
    div = (vf.xfaces[:, 1:] - vf.xfaces[:, :-1]) / g.dx + (vf.yfaces[1:, :] - vf.yfaces[:-1, :]) / g.dy
    return CellField(g, div)


def solve_velocity(
    s: CellField,
    K: CellField,
    m,
    wells: WellSet | None = None,
    boundary: BoundaryFlux | None = None,
    x0: CellField | None = None,
) -> tuple[CellField, FaceVelocityField]:
    """Assemble, solve and return ``(pressure, face velocities)``."""
    system = assemble(s, K, m, wells, boundary)
    p = solve_pressure(system, x0=x0)
    return p, face_velocities(p, system.trans, system.boundary)
