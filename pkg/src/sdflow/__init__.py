"""Two-phase immiscible waterflood simulation with semi-discrete central schemes."""

from .config import ConfigError, SimulationConfig, load_config
from .driver import NumericalFailure, Scenario, SimulationRecord, build_scenario, run
from .flow import DegenerateModelError, LinearFlux, RockFluidModel
from .geostats import FieldSpec, generate
from .grid import CellField, FaceVelocityField, Grid2D, VertexVelocityField, total_mass
from .integrator import CflPolicy, StepFailure, advance, cfl_dt, rk2_step
from .io import read_snapshot, write_snapshot, write_vtk
from .pressure import BoundaryFlux, PressureSolveError, Well, WellSet, solve_velocity, vertex_velocities
from .reconstruction import compute_slopes, corner_values, interface_values, minmod3
from .scheme import ConvectionOperator, SchemeKind, local_speeds, rhs

__all__ = [
    "BoundaryFlux",
    "CellField",
    "CflPolicy",
    "ConfigError",
    "ConvectionOperator",
    "DegenerateModelError",
    "FaceVelocityField",
    "FieldSpec",
    "Grid2D",
    "LinearFlux",
    "NumericalFailure",
    "PressureSolveError",
    "RockFluidModel",
    "Scenario",
    "SchemeKind",
    "SimulationConfig",
    "SimulationRecord",
    "StepFailure",
    "VertexVelocityField",
    "Well",
    "WellSet",
    "advance",
    "build_scenario",
    "cfl_dt",
    "compute_slopes",
    "corner_values",
    "generate",
    "interface_values",
    "load_config",
    "local_speeds",
    "minmod3",
    "read_snapshot",
    "rhs",
    "rk2_step",
    "run",
    "solve_velocity",
    "total_mass",
    "vertex_velocities",
    "write_snapshot",
    "write_vtk",
]
