"""Piecewise-linear MUSCL reconstruction with the three-argument theta-minmod limiter."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import CellField

THETA_DEFAULT = 1.8


@dataclass(eq=False)
class SlopeField:
    """Limited cell slopes ``sx``, ``sy`` (saturation per meter), each ``(ny, nx)``."""

    sx: np.ndarray
    sy: np.ndarray


@dataclass(eq=False)
class InterfaceValues:
    """Reconstructed traces at face midpoints.

    ``x_minus[k, J]`` / ``x_plus[k, J]`` are the values just left / right of
    x-face ``J``; ``y_minus`` / ``y_plus`` are below / above y-faces. Faces
    on a non-periodic boundary carry the single adjacent interior trace on
    both sides.
    """

    x_minus: np.ndarray
    x_plus: np.ndarray
    y_minus: np.ndarray
    y_plus: np.ndarray


@dataclass(eq=False)
class CornerValues:
    """The four one-sided reconstructions meeting at each vertex.

    Arrays are ``(ny + 1, nx + 1)``. The first sign selects the cell in x
    (``m`` = left, ``p`` = right of the vertex), the second in y (``m`` =
    below, ``p`` = above): ``mm`` comes from the lower-left cell, ``pp`` from
    the upper-right one. Entries whose cell lies outside the domain are NaN.
    """

    mm: np.ndarray
    pm: np.ndarray
    mp: np.ndarray
    pp: np.ndarray


def minmod3(a, b, c):
    """Smallest-magnitude argument when all three share a sign, else zero."""
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    lo = np.minimum(np.minimum(a, b), c)
    hi = np.maximum(np.maximum(a, b), c)
    out = np.where(lo > 0.0, lo, np.where(hi < 0.0, hi, 0.0))
    return out if out.ndim else float(out)


def _limited_differences(s: np.ndarray, axis: int, h: float, theta: float, periodic: bool) -> np.ndarray:
    d_left = s - np.roll(s, 1, axis=axis)
    d_right = np.roll(s, -1, axis=axis) - s
    slope = minmod3(theta * d_right / h, (d_left + d_right) / (2.0 * h), theta * d_left / h)
    if not periodic:
        # first order in any direction lacking a full three-cell stencil
        edge = [slice(None)] * 2
        edge[axis] = [0, -1]
        slope[tuple(edge)] = 0.0
    return slope


def check_theta(theta: float) -> None:
    if not 1.0 <= theta <= 2.0:
        raise ValueError(f"theta must lie in [1, 2], got {theta}")
    if theta > 1.8:
        warnings.warn(f"theta={theta} is above the usual operating range [1, 1.8]", stacklevel=3)


def compute_slopes(s: CellField, theta: float = THETA_DEFAULT, periodic: tuple[bool, bool] = (False, False)) -> SlopeField:
    check_theta(theta)
    g = s.grid
    sx = _limited_differences(s.values, 1, g.dx, theta, periodic[0])
    sy = _limited_differences(s.values, 0, g.dy, theta, periodic[1])
    return SlopeField(sx, sy)


def _neighborhood_extrema(v: np.ndarray, periodic: tuple[bool, bool]) -> tuple[np.ndarray, np.ndarray]:
    """Min and max over each cell's 3x3 block of existing cells."""
    modes = ["wrap" if periodic[1] else "edge", "wrap" if periodic[0] else "edge"]
    padded = np.pad(np.pad(v, ((1, 1), (0, 0)), mode=modes[0]), ((0, 0), (1, 1)), mode=modes[1])
    ny, nx = v.shape
    lo = v.copy()
    hi = v.copy()
    for dk in (0, 1, 2):
        for dj in (0, 1, 2):
            block = padded[dk : dk + ny, dj : dj + nx]
            np.minimum(lo, block, out=lo)
            np.maximum(hi, block, out=hi)
    return lo, hi


def limit_corners(s: CellField, sl: SlopeField, periodic: tuple[bool, bool] = (False, False)) -> SlopeField:
    """Scale both slopes of a cell so its four corner values stay within the 3x3 neighbourhood range.

    Minmod bounds each direction separately, but ``S + hx + hy`` can still
    leave the range of the surrounding averages. Interface values and
    one-dimensional data are unaffected.
    """
    g = s.grid
    v = s.values
    ext = np.abs(0.5 * g.dx * sl.sx) + np.abs(0.5 * g.dy * sl.sy)
    lo, hi = _neighborhood_extrema(v, periodic)
    alpha = np.ones_like(v)
    over = v + ext > hi
    under = v - ext < lo
    alpha[over] = (hi[over] - v[over]) / ext[over]
    alpha[under] = np.minimum(alpha[under], (v[under] - lo[under]) / ext[under])
    return SlopeField(sl.sx * alpha, sl.sy * alpha)


def zero_slopes(s: CellField) -> SlopeField:
    return SlopeField(np.zeros(s.grid.shape), np.zeros(s.grid.shape))


def neighbor_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell indices left and right of each of the ``n + 1`` faces along one axis.

    Boundary faces wrap around, which is the periodic closure; callers with
    physical boundaries overwrite those faces.
    """
    left = np.arange(-1, n) % n
    right = np.arange(0, n + 1) % n
    return left, right


def interface_values(s: CellField, sl: SlopeField, periodic: tuple[bool, bool] = (False, False)) -> InterfaceValues:
    g = s.grid
    v = s.values
    hx = 0.5 * g.dx * sl.sx
    hy = 0.5 * g.dy * sl.sy
    east, west = v + hx, v - hx
    north, south = v + hy, v - hy

    il, ir = neighbor_index(g.nx)
    x_minus = east[:, il]
    x_plus = west[:, ir]
    if not periodic[0]:
        x_minus[:, 0] = west[:, 0]
        x_plus[:, -1] = east[:, -1]

    kl, kr = neighbor_index(g.ny)
    y_minus = north[kl, :]
    y_plus = south[kr, :]
    if not periodic[1]:
        y_minus[0, :] = south[0, :]
        y_plus[-1, :] = north[-1, :]
    return InterfaceValues(x_minus, x_plus, y_minus, y_plus)


def cell_corners(s: CellField, sl: SlopeField) -> dict[str, np.ndarray]:
    """Each cell's reconstruction evaluated at its own four corners.

    Keys are ``ll``, ``lr``, ``ul``, ``ur`` (lower-left, lower-right, ...).
    """
    g = s.grid
    v = s.values
    hx = 0.5 * g.dx * sl.sx
    hy = 0.5 * g.dy * sl.sy
    west, east = v - hx, v + hx
    return {"ll": west - hy, "lr": east - hy, "ul": west + hy, "ur": east + hy}


def corner_values(s: CellField, sl: SlopeField) -> CornerValues:
    g = s.grid
    c = cell_corners(s, sl)
    shape = (g.ny + 1, g.nx + 1)
    out = {key: np.full(shape, np.nan) for key in ("mm", "pm", "mp", "pp")}
    # vertex (K, J) touches cells (K-1, J-1) [mm], (K-1, J) [pm], (K, J-1) [mp], (K, J) [pp]
    out["mm"][1:, 1:] = c["ur"]
    out["pm"][1:, :-1] = c["ul"]
    out["mp"][:-1, 1:] = c["lr"]
    out["pp"][:-1, :-1] = c["ll"]
    return CornerValues(**out)
