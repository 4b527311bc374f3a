"""Scenario construction and the pressure/saturation operator-splitting loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError, SimulationConfig
from .flow import DegenerateModelError, RockFluidModel
from .geostats import FieldSpec, generate
from .grid import CellField, Grid2D, total_mass
from .integrator import CflPolicy, StepFailure, advance, cfl_dt
from .io import read_snapshot, write_snapshot
from .pressure import BoundaryFlux, PressureSolveError, Well, WellSet, solve_velocity, vertex_velocities
from .scheme import ConvectionOperator, SchemeKind, transport_source_rates

DAYS_PER_YEAR = 365.0

DEFAULT_EXTENTS = {
    "slab": (256.0, 64.0),
    "five_spot_diagonal": (64.0, 64.0),
    "five_spot_parallel": (64.0, 64.0),
}


class NumericalFailure(RuntimeError):
    """A run aborted; ``last_time`` is the last time with a valid saturation field."""

    def __init__(self, message: str, last_time: float):
        super().__init__(f"{message} (last valid time {last_time:.6g} days)")
        self.last_time = last_time


@dataclass
class Scenario:
    grid: Grid2D
    permeability: CellField
    initial: CellField
    boundary: BoundaryFlux
    wells: WellSet

    @property
    def injection_rate(self) -> float:
        """Total injected volume rate (m^2/day per unit depth)."""
        q = sum(w.rate for w in self.wells if w.rate > 0)
        b = self.boundary
        g = self.grid
        q += float(np.clip(b.left, 0, None).sum() * g.dy + np.clip(-b.right, 0, None).sum() * g.dy)
        q += float(np.clip(b.bottom, 0, None).sum() * g.dx + np.clip(-b.top, 0, None).sum() * g.dx)
        return q


@dataclass
class SimulationRecord:
    config: SimulationConfig
    grid: Grid2D
    final: CellField
    final_time: float
    initial_mass: float
    times: list[float] = field(default_factory=list)
    dts: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    cumulative_inflow: list[float] = field(default_factory=list)
    s_min: list[float] = field(default_factory=list)
    s_max: list[float] = field(default_factory=list)
    water_cut: list[float] = field(default_factory=list)
    pressure_solves: int = 0
    snapshots: dict[float, CellField] = field(default_factory=dict)
    snapshot_files: list[Path] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.dts)

    def mass_balance_error(self) -> np.ndarray:
        """Relative mismatch between the mass change and the integrated boundary/well flux."""
        m = np.asarray(self.mass)
        q = np.asarray(self.cumulative_inflow)
        return np.abs((m - self.initial_mass) - q) / self.initial_mass


def model_from_config(cfg: SimulationConfig) -> RockFluidModel:
    try:
        return RockFluidModel(cfg.s_rw, cfg.s_ro, cfg.mu_w, cfg.mu_o)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _extent(cfg: SimulationConfig) -> tuple[float, float]:
    lx, ly = DEFAULT_EXTENTS[cfg.scenario]
    lx = cfg.length_x if cfg.length_x is not None else lx
    ly = cfg.length_y if cfg.length_y is not None else ly
    if not (lx > 0 and ly > 0 and math.isfinite(lx) and math.isfinite(ly)):
        raise ConfigError(f"domain extent must be positive and finite, got {lx} x {ly}")
    return lx, ly


def _permeability(cfg: SimulationConfig, grid: Grid2D) -> CellField:
    if cfg.permeability_file:
        try:
            k, _ = read_snapshot(cfg.permeability_file)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if k.values.shape != grid.shape:
            raise ConfigError(f"permeability file has shape {k.values.shape}, grid is {grid.shape}")
        if not np.all(k.values > 0) or not k.all_finite():
            raise ConfigError("permeability file must hold positive finite values")
        return CellField(grid, k.values)
    spec = FieldSpec(grid.nx, grid.ny, cfg.seed, cfg.mean_perm, cfg.cv, cfg.spectral_exponent)
    return generate(spec, grid)


def build_scenario(cfg: SimulationConfig) -> Scenario:
    lx, ly = _extent(cfg)
    grid = Grid2D.from_extent(cfg.nx, cfg.ny, lx, ly)
    K = _permeability(cfg, grid)
    s0 = CellField.constant(grid, cfg.initial_saturation)
    q = cfg.injection_rate * grid.area / DAYS_PER_YEAR
    boundary = BoundaryFlux.no_flow(grid)
    wells = WellSet()
    nx, ny = grid.nx, grid.ny
    if cfg.scenario == "slab":
        u = q / ly
        boundary.left[:] = u
        boundary.right[:] = u
    elif cfg.scenario == "five_spot_diagonal":
        wells = WellSet([Well((0, 0), q), Well((nx - 1, ny - 1), -q)])
    else:
        h = 0.5 * q
        wells = WellSet(
            [Well((0, 0), h), Well((nx - 1, ny - 1), h), Well((nx - 1, 0), -h), Well((0, ny - 1), -h)]
        )
    return Scenario(grid, K, s0, boundary, wells)


def pore_volumes_injected(cfg: SimulationConfig, t: float) -> float:
    return cfg.injection_rate * t / DAYS_PER_YEAR


def days_for_pvi(cfg: SimulationConfig, pvi: float) -> float:
    if cfg.injection_rate <= 0:
        raise ValueError("no injection")
    return pvi * DAYS_PER_YEAR / cfg.injection_rate


def _snapshot_path(out_dir: Path, t: float) -> Path:
    return out_dir / f"saturation_t{t:011.4f}.csv"


def run(cfg: SimulationConfig, scenario: Scenario | None = None) -> SimulationRecord:
    """Run the splitting loop to ``cfg.total_time`` (or ``cfg.stop_after_steps`` micro-steps)."""
    m = model_from_config(cfg)
    sc = scenario or build_scenario(cfg)
    g = sc.grid
    kind = SchemeKind.parse(cfg.scheme)
    policy = CflPolicy(sigma=cfg.cfl_sigma)
    has_wells = len(sc.wells) > 0
    out_dir = cfg.resolved_output_dir()

    s = sc.initial.copy()
    t = 0.0
    rec = SimulationRecord(cfg, g, s, t, total_mass(s))
    pending = sorted(set(cfg.snapshot_times))

    def take_snapshots(s: CellField, t: float) -> None:
        while pending and pending[0] <= t + 1e-9 * max(1.0, t):
            ts = pending.pop(0)
            rec.snapshots[ts] = s.copy()
            if out_dir is not None:
                rec.snapshot_files.append(write_snapshot(s, ts, _snapshot_path(out_dir, ts), vtk=cfg.write_vtk))

    take_snapshots(s, t)
    cumulative = 0.0
    pressure = None
    try:
        while t < cfg.total_time:
            pressure, vface = solve_velocity(s, sc.permeability, m, sc.wells, sc.boundary, x0=pressure)
            rec.pressure_solves += 1
            v = vertex_velocities(vface)
            well_rates = transport_source_rates(g, v, vface, kind) if has_wells else None
            op = ConvectionOperator(
                g, v, vface, m, cfg.theta, kind, cfg.injected_saturation, well_rates, corner_limit=cfg.corner_limiter
            )
            dt_c = cfl_dt(s, v, m, policy, vface)
            t_p = t + min(cfg.pressure_interval_days, cfg.pressure_interval_steps * dt_c)
            if pending:
                t_p = min(t_p, pending[0])
            t_p = min(t_p, cfg.total_time)
            if cfg.total_time - t_p <= 1e-12 * cfg.total_time:
                t_p = cfg.total_time

            # net inflow at each Heun stage, so the balance integrates the same quadrature
            stage: list[tuple[float, float, float]] = []

            def rhs_fn(x: CellField) -> CellField:
                stage.append(op.water_rates(x))
                return op(x)

            def on_step(old: CellField, new: CellField, t_new: float, dt: float) -> bool:
                nonlocal cumulative
                (i0, w0, p0), (i1, w1, _) = stage[-2], stage[-1]
                stage.clear()
                cumulative += 0.5 * dt * ((i0 - w0) + (i1 - w1))
                rec.times.append(t_new)
                rec.dts.append(dt)
                rec.mass.append(total_mass(new))
                rec.cumulative_inflow.append(cumulative)
                rec.s_min.append(new.min())
                rec.s_max.append(new.max())
                rec.water_cut.append(w0 / p0 if p0 > 0 else 0.0)
                if len(rec.dts) >= cfg.max_steps:
                    raise StepFailure(f"exceeded max_steps={cfg.max_steps}")
                return bool(cfg.stop_after_steps) and len(rec.dts) >= cfg.stop_after_steps

            s_new, _ = advance(s, t, t_p, rhs_fn, lambda _s: dt_c, on_step=on_step)
            s = s_new
            t = rec.times[-1] if rec.times else t_p
            take_snapshots(s, t)
            if cfg.stop_after_steps and len(rec.dts) >= cfg.stop_after_steps:
                break
    except (StepFailure, PressureSolveError, DegenerateModelError, FloatingPointError) as exc:
        raise NumericalFailure(str(exc), t) from exc

    rec.final = s
    rec.final_time = t
    return rec
