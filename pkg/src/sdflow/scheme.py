"""Semi-discrete central fluxes for the saturation equation.

Three flux families are available:

* ``SD2_2D``: genuinely two-dimensional second-order central flux. The
  convective part is a trapezoid rule along each face using velocities at
  the two face end-vertices and the reconstructed states of the two
  adjacent cells at those vertices; dissipation is sized by the maximum
  local speed over the three face-normal Riemann problems sharing the
  face's end-vertices.
* ``SD1_2D``: the same flux with zero slopes (two-dimensional Rusanov).
* ``KT_DXD``: one-dimensional Kurganov-Tadmor flux applied per direction
  with face-normal velocities.

Physical boundary faces never use the central flux: inflow faces carry
``v * f(s_inj)``, outflow faces upwind the interior cell and no-flow faces
carry zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import CellField, FaceVelocityField, Grid2D, VertexVelocityField
from .reconstruction import (
    THETA_DEFAULT,
    InterfaceValues,
    cell_corners,
    check_theta,
    compute_slopes,
    interface_values,
    limit_corners,
    neighbor_index,
)


class SchemeKind(enum.Enum):
    SD2_2D = "SD2_2D"
    SD1_2D = "SD1_2D"
    KT_DXD = "KT_DXD"

    @classmethod
    def parse(cls, name: str | SchemeKind) -> SchemeKind:
        if isinstance(name, SchemeKind):
            return name
        key = name.strip().upper().replace("-", "_")
        aliases = {"SD2": "SD2_2D", "SD1": "SD1_2D", "RUSANOV": "SD1_2D", "KTDXD": "KT_DXD", "KT": "KT_DXD"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown scheme {name!r}; choose from {[k.value for k in cls]}") from None


@dataclass(eq=False)
class LocalSpeeds:
    """Dissipation coefficients: ``cx`` on x-faces ``(ny, nx+1)``, ``dy`` on y-faces ``(ny+1, nx)``."""

    cx: np.ndarray
    dy: np.ndarray


def _max_bounding_vertex_speed(v: VertexVelocityField) -> tuple[np.ndarray, np.ndarray]:
    ux = np.maximum(np.abs(v.vx[:-1, :]), np.abs(v.vx[1:, :]))
    uy = np.maximum(np.abs(v.vy[:, :-1]), np.abs(v.vy[:, 1:]))
    return ux, uy


def _neighbor_max(a: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    """Max of ``a`` and its two neighbors along ``axis`` (truncated at a wall)."""
    if periodic:
        return np.maximum(a, np.maximum(np.roll(a, 1, axis), np.roll(a, -1, axis)))
    out = a.copy()
    if axis == 0:
        np.maximum(out[1:], a[:-1], out=out[1:])
        np.maximum(out[:-1], a[1:], out=out[:-1])
    else:
        np.maximum(out[:, 1:], a[:, :-1], out=out[:, 1:])
        np.maximum(out[:, :-1], a[:, 1:], out=out[:, :-1])
    return out


def _speeds(s: np.ndarray, ux: np.ndarray, uy: np.ndarray, m, periodic: tuple[bool, bool]) -> LocalSpeeds:
    ny, nx = s.shape
    il, ir = neighbor_index(nx)
    kl, kr = neighbor_index(ny)
    ax = m.wave_speed_bound(s[:, il], s[:, ir]) * ux
    ay = m.wave_speed_bound(s[kl, :], s[kr, :]) * uy
    if not periodic[0]:
        ax[:, [0, -1]] = 0.0
    if not periodic[1]:
        ay[[0, -1], :] = 0.0
    # face value -> max over the two end-vertices -> max over both: rows k-1..k+1
    return LocalSpeeds(_neighbor_max(ax, 0, periodic[1]), _neighbor_max(ay, 1, periodic[0]))


def local_speeds(s: CellField, v: VertexVelocityField, m, periodic: tuple[bool, bool] = (False, False)) -> LocalSpeeds:
    """Local propagation speeds ``c^x``, ``d^y`` from cell averages and vertex velocities.

    The face-normal Riemann problem between the two cells adjacent to a face
    gets the speed ``max|f'|`` over their states times the larger ``|v|`` at
    the face's end-vertices. ``c^x`` at a face is the maximum of that quantity
    over the face and its two neighbors in y (``d^y`` likewise in x).
    """
    ux, uy = _max_bounding_vertex_speed(v)
    return _speeds(s.values, ux, uy, m, periodic)


def corner_fractional_flow(corners: dict[str, np.ndarray], m) -> dict[str, np.ndarray]:
    return {key: m.fractional_flow(val) for key, val in corners.items()}


def flux_sd2_x(corners, iv: InterfaceValues, v: VertexVelocityField, speeds: LocalSpeeds, m, fc=None) -> np.ndarray:
    """Second-order x-fluxes on every x-face; boundary columns use the periodic wrap.

    ``corners`` is the per-cell corner dictionary from
    :func:`~sdflow.reconstruction.cell_corners`; ``fc`` optionally holds
    ``f`` already evaluated on it.
    """
    fc = corner_fractional_flow(corners, m) if fc is None else fc
    nx = v.grid.nx
    il, ir = neighbor_index(nx)
    v_up, v_lo = v.vx[1:, :], v.vx[:-1, :]
    return 0.25 * (
        v_up * (fc["ul"][:, ir] + fc["ur"][:, il]) + v_lo * (fc["ll"][:, ir] + fc["lr"][:, il])
    ) - 0.5 * speeds.cx * (iv.x_plus - iv.x_minus)


def flux_sd2_y(corners, iv: InterfaceValues, v: VertexVelocityField, speeds: LocalSpeeds, m, fc=None) -> np.ndarray:
    fc = corner_fractional_flow(corners, m) if fc is None else fc
    ny = v.grid.ny
    kl, kr = neighbor_index(ny)
    v_right, v_left = v.vy[:, 1:], v.vy[:, :-1]
    return 0.25 * (
        v_right * (fc["lr"][kr, :] + fc["ur"][kl, :]) + v_left * (fc["ll"][kr, :] + fc["ul"][kl, :])
    ) - 0.5 * speeds.dy * (iv.y_plus - iv.y_minus)


def flux_rusanov_x(s: CellField, v: VertexVelocityField, speeds: LocalSpeeds, m, fs=None) -> np.ndarray:
    fs = m.fractional_flow(s.values) if fs is None else fs
    il, ir = neighbor_index(s.grid.nx)
    v_up, v_lo = v.vx[1:, :], v.vx[:-1, :]
    return 0.25 * (
        v_up * (fs[:, ir] + fs[:, il]) + v_lo * (fs[:, ir] + fs[:, il])
    ) - 0.5 * speeds.cx * (s.values[:, ir] - s.values[:, il])


def flux_rusanov_y(s: CellField, v: VertexVelocityField, speeds: LocalSpeeds, m, fs=None) -> np.ndarray:
    fs = m.fractional_flow(s.values) if fs is None else fs
    kl, kr = neighbor_index(s.grid.ny)
    v_right, v_left = v.vy[:, 1:], v.vy[:, :-1]
    return 0.25 * (
        v_right * (fs[kr, :] + fs[kl, :]) + v_left * (fs[kr, :] + fs[kl, :])
    ) - 0.5 * speeds.dy * (s.values[kr, :] - s.values[kl, :])


def _kt_flux(u_minus: np.ndarray, u_plus: np.ndarray, vn: np.ndarray, m) -> np.ndarray:
    a = np.abs(vn) * m.wave_speed_bound(u_minus, u_plus)
    return 0.5 * vn * (m.fractional_flow(u_plus) + m.fractional_flow(u_minus)) - 0.5 * a * (u_plus - u_minus)


def flux_ktdxd_x(iv: InterfaceValues, vface: FaceVelocityField, m) -> np.ndarray:
    return _kt_flux(iv.x_minus, iv.x_plus, vface.xfaces, m)


def flux_ktdxd_y(iv: InterfaceValues, vface: FaceVelocityField, m) -> np.ndarray:
    return _kt_flux(iv.y_minus, iv.y_plus, vface.yfaces, m)


@dataclass(eq=False)
class ConvectionOperator:
    """Right-hand side ``dS/dt`` of the semi-discrete saturation equation.

    Velocities are frozen for the lifetime of the operator (one pressure
    step). ``well_rates`` holds per-cell volumetric source rates per unit
    depth (m^2/day, positive for injection).
    """

    grid: Grid2D
    v: VertexVelocityField
    vface: FaceVelocityField
    model: object
    theta: float = THETA_DEFAULT
    kind: SchemeKind = SchemeKind.SD2_2D
    s_inj: float = 0.85
    well_rates: np.ndarray | None = None
    periodic: tuple[bool, bool] = (False, False)
    compiled: bool = True  # use the fused kernel when the model supports it
    corner_limit: bool = True  # SD2 only: keep corner values inside the local range

    def __post_init__(self) -> None:
        self.kind = SchemeKind.parse(self.kind)
        if self.kind is SchemeKind.SD2_2D:
            check_theta(self.theta)
        if self.well_rates is not None:
            self.well_rates = np.asarray(self.well_rates, dtype=float)
            if self.well_rates.shape != self.grid.shape:
                raise ValueError("well_rates must be a cell array")

    @cached_property
    def _vertex_speed(self):
        return _max_bounding_vertex_speed(self.v)

    @cached_property
    def _f_inj(self) -> float:
        return float(self.model.fractional_flow(self.s_inj))

    def speeds(self, s: CellField) -> LocalSpeeds:
        ux, uy = self._vertex_speed
        return _speeds(s.values, ux, uy, self.model, self.periodic)

    def fluxes(self, s: CellField) -> tuple[np.ndarray, np.ndarray]:
        """Numerical fluxes on all x-faces and y-faces, boundaries included."""
        m = self.model
        if self.kind is SchemeKind.SD1_2D:
            sp = self.speeds(s)
            fs = m.fractional_flow(s.values)
            hx = flux_rusanov_x(s, self.v, sp, m, fs)
            hy = flux_rusanov_y(s, self.v, sp, m, fs)
        else:
            sl = compute_slopes(s, self.theta, self.periodic)
            if self.kind is SchemeKind.SD2_2D and self.corner_limit:
                sl = limit_corners(s, sl, self.periodic)
            iv = interface_values(s, sl, self.periodic)
            if self.kind is SchemeKind.KT_DXD:
                hx = flux_ktdxd_x(iv, self.vface, m)
                hy = flux_ktdxd_y(iv, self.vface, m)
            else:
                sp = self.speeds(s)
                corners = cell_corners(s, sl)
                fc = corner_fractional_flow(corners, m)
                hx = flux_sd2_x(corners, iv, self.v, sp, m, fc)
                hy = flux_sd2_y(corners, iv, self.v, sp, m, fc)
        b = self.boundary_fluxes(s)
        if "left" in b:
            hx[:, 0], hx[:, -1] = b["left"], b["right"]
        if "bottom" in b:
            hy[0, :], hy[-1, :] = b["bottom"], b["top"]
        return hx, hy

    def boundary_fluxes(self, s: CellField) -> dict[str, np.ndarray]:
        """Fluxes on the non-periodic edges (``left``/``right``/``bottom``/``top``), +x/+y oriented."""
        f = self.model.fractional_flow
        f_inj = self._f_inj
        s = s.values
        out = {}
        if not self.periodic[0]:
            vl, vr = self.vface.xfaces[:, 0], self.vface.xfaces[:, -1]
            out["left"] = vl * np.where(vl > 0.0, f_inj, f(s[:, 0]))
            out["right"] = vr * np.where(vr < 0.0, f_inj, f(s[:, -1]))
        if not self.periodic[1]:
            vb, vt = self.vface.yfaces[0, :], self.vface.yfaces[-1, :]
            out["bottom"] = vb * np.where(vb > 0.0, f_inj, f(s[0, :]))
            out["top"] = vt * np.where(vt < 0.0, f_inj, f(s[-1, :]))
        return out

    def well_terms(self, s: CellField) -> np.ndarray | None:
        """Water volume rate per cell from wells (m^2/day)."""
        if self.well_rates is None:
            return None
        q = self.well_rates
        out = np.zeros_like(q)
        idx = self._well_cells
        qi = q[idx]
        out[idx] = qi * np.where(qi > 0.0, self._f_inj, self.model.fractional_flow(s.values[idx]))
        return out

    @cached_property
    def _well_cells(self):
        return np.nonzero(self.well_rates)

    @cached_property
    def _kernel_args(self):
        from .flow import RockFluidModel

        if not self.compiled or type(self.model) is not RockFluidModel:
            return None
        from . import _kernels

        m = self.model
        crit = np.array(m.critical_points, dtype=float)
        crit_speed = np.array([abs(m.dfds(c)) for c in crit], dtype=float)
        code = {
            SchemeKind.SD2_2D: _kernels.KIND_SD2,
            SchemeKind.SD1_2D: _kernels.KIND_SD1,
            SchemeKind.KT_DXD: _kernels.KIND_KT,
        }[self.kind]
        wells = self.well_rates if self.well_rates is not None else np.zeros(self.grid.shape)
        return (
            _kernels.convection_rhs,
            code,
            np.array([m.s_rw, m.s_max, m.mu_w, m.mu_o], dtype=float),
            crit,
            crit_speed,
            np.ascontiguousarray(wells, dtype=float),
        )

    def __call__(self, s: CellField) -> CellField:
        g = self.grid
        args = self._kernel_args
        if args is not None:
            kernel, code, params, crit, crit_speed, wells = args
            out = np.empty(g.shape)
            kernel(
                np.ascontiguousarray(s.values, dtype=float), self.v.vx, self.v.vy, self.vface.xfaces,
                self.vface.yfaces, float(g.dx), float(g.dy), float(self.theta), code,
                bool(self.corner_limit), bool(self.periodic[0]), bool(self.periodic[1]), params, crit, crit_speed,
                self._f_inj, wells, out,
            )
            return CellField(g, out)
        hx, hy = self.fluxes(s)
        out = -(hx[:, 1:] - hx[:, :-1]) / g.dx - (hy[1:, :] - hy[:-1, :]) / g.dy
        wt = self.well_terms(s)
        if wt is not None:
            out += wt / g.cell_area
        return CellField(g, out)

    def water_rates(self, s: CellField) -> tuple[float, float, float]:
        """``(injected water, produced water, produced total)`` rates in m^2/day.

        Sums over inflow/outflow boundary faces and wells, consistent with
        the fluxes used by :meth:`__call__`.
        """
        g = self.grid
        b = self.boundary_fluxes(s)
        inj = prod_w = prod_t = 0.0
        edges = []
        if "left" in b:
            edges += [(b["left"], self.vface.xfaces[:, 0], g.dy), (-b["right"], -self.vface.xfaces[:, -1], g.dy)]
        if "bottom" in b:
            edges += [(b["bottom"], self.vface.yfaces[0, :], g.dx), (-b["top"], -self.vface.yfaces[-1, :], g.dx)]
        # inward-positive flux and velocity on each edge
        for h_in, v_in, length in edges:
            inflow = v_in > 0.0
            inj += float(h_in[inflow].sum()) * length
            prod_w -= float(h_in[~inflow].sum()) * length
            prod_t -= float(v_in[~inflow].sum()) * length
        wt = self.well_terms(s)
        if wt is not None:
            q = self.well_rates
            inj += float(wt[q > 0.0].sum())
            prod_w -= float(wt[q < 0.0].sum())
            prod_t -= float(q[q < 0.0].sum())
        return inj, prod_w, prod_t

    def net_inflow(self, s: CellField) -> float:
        """Rate of change of total water volume implied by the boundary and well fluxes."""
        inj, prod_w, _ = self.water_rates(s)
        return inj - prod_w


def rhs(
    s: CellField,
    v: VertexVelocityField,
    vface: FaceVelocityField,
    m,
    theta: float = THETA_DEFAULT,
    kind: SchemeKind | str = SchemeKind.SD2_2D,
    **options,
) -> CellField:
    """One-shot evaluation of the semi-discrete right-hand side.

    Extra keyword options (``s_inj``, ``well_rates``, ``periodic``) are
    forwarded to :class:`ConvectionOperator`.
    """
    op = ConvectionOperator(s.grid, v, vface, m, theta, SchemeKind.parse(kind), **options)
    return op(s)


def transport_source_rates(
    grid: Grid2D,
    v: VertexVelocityField,
    vface: FaceVelocityField,
    kind: SchemeKind | str = SchemeKind.SD2_2D,
    periodic: tuple[bool, bool] = (False, False),
    cutoff: float = 1e-12,
) -> np.ndarray:
    """Per-cell volume rate (m^2/day) equal to the divergence of the velocity the scheme transports.

    Vertex averaging spreads a point well's divergence over the neighbouring
    cells. Using these rates as the saturation source keeps a constant
    state constant, which a single-cell source does not. Entries below
    ``cutoff`` times the largest magnitude are zeroed.
    """
    from .flow import LinearFlux

    op = ConvectionOperator(grid, v, vface, LinearFlux(), THETA_DEFAULT, SchemeKind.parse(kind), 1.0, None, periodic)
    q = -op(CellField.constant(grid, 1.0)).values * grid.cell_area
    scale = np.abs(q).max()
    q[np.abs(q) <= cutoff * scale] = 0.0
    return q
