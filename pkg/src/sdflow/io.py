"""Snapshot files: a small CSV format and legacy-VTK structured points.

CSV layout::

    nx,ny,dx,dy,t
    <row k=0: nx comma-separated values>
    ...
    <row k=ny-1>

The first line holds the values of those five quantities. Floats are written
with ``repr`` so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .grid import CellField, Grid2D


def _fmt(x: float) -> str:
    return repr(float(x))


def format_snapshot(s: CellField, t: float) -> str:
    g = s.grid
    lines = [f"{g.nx},{g.ny},{_fmt(g.dx)},{_fmt(g.dy)},{_fmt(t)}"]
    lines.extend(",".join(_fmt(x) for x in row) for row in s.values)
    return "\n".join(lines) + "\n"


def write_snapshot(s: CellField, t: float, path: str | os.PathLike, vtk: bool = False, name: str = "saturation") -> Path:
    """Write ``s`` at time ``t`` to ``path`` (CSV); with ``vtk`` also a ``.vtk`` sibling."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_snapshot(s, t))
        if vtk:
            write_vtk(s, path.with_suffix(".vtk"), name=name, t=t)
    except OSError as exc:
        raise OSError(f"could not write snapshot {path}: {exc}") from exc
    return path


def read_snapshot(path: str | os.PathLike) -> tuple[CellField, float]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"could not read snapshot {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split(",")
    if len(head) != 5:
        raise ValueError(f"{path}: header must be nx,ny,dx,dy,t")
    nx, ny = int(head[0]), int(head[1])
    dx, dy, t = float(head[2]), float(head[3]), float(head[4])
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    values = np.array(rows, dtype=float)
    if values.shape != (ny, nx):
        raise ValueError(f"{path}: expected {ny} rows of {nx} values, got shape {values.shape}")
    return CellField(Grid2D(nx, ny, dx, dy), values), t


def write_vtk(s: CellField, path: str | os.PathLike, name: str = "saturation", t: float | None = None) -> Path:
    """ASCII legacy VTK, STRUCTURED_POINTS with one point per cell center."""
    g = s.grid
    path = Path(path)
    title = "sdflow snapshot" if t is None else f"sdflow snapshot t={_fmt(t)}"
    out = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {g.nx} {g.ny} 1",
        f"ORIGIN {_fmt(g.origin[0] + 0.5 * g.dx)} {_fmt(g.origin[1] + 0.5 * g.dy)} 0.0",
        f"SPACING {_fmt(g.dx)} {_fmt(g.dy)} 1.0",
        f"POINT_DATA {g.nx * g.ny}",
        f"SCALARS {name} double 1",
        "LOOKUP_TABLE default",
    ]
    out.extend(_fmt(x) for x in s.values.ravel())
    path.write_text("\n".join(out) + "\n")
    return path
