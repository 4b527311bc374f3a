"""Simulation configuration and its flat ``key = value`` file format.

Keys are exactly the field names of :class:`SimulationConfig`. Blank lines
and ``#`` comments are ignored; sequences are comma-separated; ``none``
clears an optional value.
"""

from __future__ import annotations

import dataclasses
import os
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .scheme import SchemeKind

OUTPUT_DIR_ENV = "SDFLOW_OUTPUT_DIR"

SCENARIOS = ("slab", "five_spot_diagonal", "five_spot_parallel")


class ConfigError(ValueError):
    pass


@dataclass
class SimulationConfig:
    scenario: str = "slab"
    nx: int = 256
    ny: int = 64
    length_x: float | None = None  # m; None -> scenario default
    length_y: float | None = None
    scheme: str = "SD2_2D"
    theta: float = 1.8
    corner_limiter: bool = True  # SD2: keep 2D corner values inside the local range
    cfl_sigma: float = 0.45
    pressure_interval_days: float = 5.0
    pressure_interval_steps: int = 10
    total_time: float = 350.0  # days
    injection_rate: float = 0.2  # pore volumes per year
    initial_saturation: float = 0.21
    injected_saturation: float = 0.85
    s_rw: float = 0.2
    s_ro: float = 0.15
    mu_w: float = 0.05
    mu_o: float = 10.0
    cv: float = 0.0  # 0 -> homogeneous
    mean_perm: float = 100.0  # mD
    spectral_exponent: float = 1.5
    permeability_file: str | None = None
    seed: int = 0
    snapshot_times: tuple[float, ...] = field(default_factory=tuple)
    output_dir: str | None = None
    write_vtk: bool = False
    max_steps: int = 10_000_000
    stop_after_steps: int = 0  # 0 -> run to total_time

    def __post_init__(self) -> None:
        self.snapshot_times = tuple(float(t) for t in self.snapshot_times)
        self.validate()

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        try:
            SchemeKind.parse(self.scheme)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.nx < 2 or self.ny < 2:
            raise ConfigError("grid needs at least 2x2 cells")
        for name in ("total_time", "pressure_interval_days", "mean_perm"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.pressure_interval_steps < 1:
            raise ConfigError("pressure_interval_steps must be >= 1")
        if self.injection_rate < 0:
            raise ConfigError("injection_rate must be non-negative")
        if not 0.0 < self.cfl_sigma < 0.5:
            raise ConfigError("cfl_sigma must lie in (0, 0.5)")
        if not 1.0 <= self.theta <= 2.0:
            raise ConfigError("theta must lie in [1, 2]")
        for name in ("initial_saturation", "injected_saturation"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.cv < 0:
            raise ConfigError("cv must be non-negative")
        if any(t < 0 or t > self.total_time for t in self.snapshot_times):
            raise ConfigError("snapshot times must lie in [0, total_time]")
        if self.stop_after_steps < 0 or self.max_steps < 1:
            raise ConfigError("step limits must be positive")

    def resolved_output_dir(self) -> Path | None:
        env = os.environ.get(OUTPUT_DIR_ENV)
        if env:
            return Path(env)
        return Path(self.output_dir) if self.output_dir else None

    def replace(self, **changes) -> SimulationConfig:
        return dataclasses.replace(self, **changes)


def _field_types() -> dict[str, object]:
    return typing.get_type_hints(SimulationConfig)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_value(key: str, text: str):
    types = _field_types()
    if key not in types:
        raise ConfigError(f"unknown configuration key {key!r}")
    tp = types[key]
    text = text.strip()
    optional = type(None) in typing.get_args(tp)
    if optional:
        if text.lower() in ("", "none", "null"):
            return None
        tp = next(a for a in typing.get_args(tp) if a is not type(None))
    try:
        if tp is bool:
            return _parse_bool(text)
        if tp is int:
            return int(text.replace("_", ""))
        if tp is float:
            return float(text)
        if tp is str:
            return text
        if typing.get_origin(tp) is tuple:
            return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None
    raise ConfigError(f"unsupported type for {key}")


def parse_config_text(text: str, overrides: dict[str, str] | None = None) -> SimulationConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = parse_value(key, val)
    for key, val in (overrides or {}).items():
        values[key] = parse_value(key, val)
    try:
        return SimulationConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | os.PathLike, overrides: dict[str, str] | None = None) -> SimulationConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, overrides)


def format_config(cfg: SimulationConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        val = getattr(cfg, f.name)
        if val is None:
            text = "none"
        elif isinstance(val, tuple):
            text = ",".join(repr(x) for x in val)
        else:
            text = str(val)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
