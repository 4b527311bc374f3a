"""Uniform cell grid and the field containers shared by every solver stage.

Storage layout, used everywhere in the package:

* cell arrays have shape ``(ny, nx)`` (row ``k``, column ``j``, x fastest),
* x-face arrays have shape ``(ny, nx + 1)``; face ``j + 1/2`` is column ``j + 1``,
* y-face arrays have shape ``(ny + 1, nx)``; face ``k + 1/2`` is row ``k + 1``,
* vertex arrays have shape ``(ny + 1, nx + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid needs at least 2x2 cells, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError(f"cell spacings must be positive, got dx={self.dx}, dy={self.dy}")

    @classmethod
    def from_extent(cls, nx: int, ny: int, length_x: float, length_y: float) -> Grid2D:
        return cls(nx, ny, length_x / nx, length_y / ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def length_x(self) -> float:
        return self.nx * self.dx

    @property
    def length_y(self) -> float:
        return self.ny * self.dy

    @property
    def area(self) -> float:
        return self.length_x * self.length_y

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` arrays of cell-center coordinates, each ``(ny, nx)``."""
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y)

    def vertices(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.origin[0] + np.arange(self.nx + 1) * self.dx
        y = self.origin[1] + np.arange(self.ny + 1) * self.dy
        return np.meshgrid(x, y)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


@dataclass(eq=False)
class CellField:
    """Cell averages on a grid.

    Supports elementwise arithmetic with scalars and with fields on the same
    grid, which is what the Runge-Kutta stages need.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def constant(cls, grid: Grid2D, value: float) -> CellField:
        return cls(grid, np.full(grid.shape, float(value)))

    def copy(self) -> CellField:
        return CellField(self.grid, self.values.copy())

    def _other(self, other):
        if isinstance(other, CellField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return CellField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return CellField(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return CellField(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return CellField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return CellField(self.grid, self.values / self._other(other))

    def __neg__(self):
        return CellField(self.grid, -self.values)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def all_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


@dataclass(eq=False)
class FaceVelocityField:
    """Normal Darcy velocities on cell faces (m/day).

    ``xfaces[k, J]`` is the +x velocity through the vertical face at
    ``x = x0 + J*dx`` in row ``k``; ``yfaces[K, j]`` the +y velocity through the
    horizontal face at ``y = y0 + K*dy`` in column ``j``.
    """

    grid: Grid2D
    xfaces: np.ndarray
    yfaces: np.ndarray

    def __post_init__(self) -> None:
        g = self.grid
        self.xfaces = np.asarray(self.xfaces, dtype=float)
        self.yfaces = np.asarray(self.yfaces, dtype=float)
        if self.xfaces.shape != (g.ny, g.nx + 1) or self.yfaces.shape != (g.ny + 1, g.nx):
            raise ValueError("face array shapes do not match the grid")

    @classmethod
    def zeros(cls, grid: Grid2D) -> FaceVelocityField:
        return cls(grid, np.zeros((grid.ny, grid.nx + 1)), np.zeros((grid.ny + 1, grid.nx)))

    @classmethod
    def uniform(cls, grid: Grid2D, vx: float, vy: float) -> FaceVelocityField:
        return cls(
            grid,
            np.full((grid.ny, grid.nx + 1), float(vx)),
            np.full((grid.ny + 1, grid.nx), float(vy)),
        )

    def max_abs(self) -> float:
        return float(max(np.abs(self.xfaces).max(), np.abs(self.yfaces).max()))


@dataclass(eq=False)
class VertexVelocityField:
    """Velocity components sampled at cell vertices, each ``(ny + 1, nx + 1)``."""

    grid: Grid2D
    vx: np.ndarray
    vy: np.ndarray

    def __post_init__(self) -> None:
        g = self.grid
        self.vx = np.asarray(self.vx, dtype=float)
        self.vy = np.asarray(self.vy, dtype=float)
        shape = (g.ny + 1, g.nx + 1)
        if self.vx.shape != shape or self.vy.shape != shape:
            raise ValueError(f"vertex arrays must have shape {shape}")
        if not (np.isfinite(self.vx).all() and np.isfinite(self.vy).all()):
            raise ValueError("vertex velocities must be finite")

    @classmethod
    def uniform(cls, grid: Grid2D, vx: float, vy: float) -> VertexVelocityField:
        shape = (grid.ny + 1, grid.nx + 1)
        return cls(grid, np.full(shape, float(vx)), np.full(shape, float(vy)))


def project_to_cell_averages(f: Callable[[np.ndarray, np.ndarray], np.ndarray], grid: Grid2D) -> CellField:
    """Cell averages of ``f(x, y)`` by the midpoint rule.

    Exact for functions that are linear in each coordinate (bilinear), and
    second-order accurate otherwise, which matches the scheme order.
    """
    X, Y = grid.cell_centers()
    values = np.broadcast_to(np.asarray(f(X, Y), dtype=float), grid.shape).copy()
    return CellField(grid, values)


def total_mass(s: CellField) -> float:
    """Integral of the field over the domain (per unit depth)."""
    return float(s.values.sum() * s.grid.cell_area)
