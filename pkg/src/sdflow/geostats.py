"""Log-normal permeability fields from power-law spectral synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import CellField, Grid2D

# coefficient-of-variation presets quoted for the slab study (text and figure captions)
CV_PRESETS_TEXT = (0.5, 1.0, 2.4)
CV_PRESETS_FIGURES = (0.5, 1.2, 2.2)


@dataclass(frozen=True)
class FieldSpec:
    nx: int
    ny: int
    seed: int = 0
    mean_perm: float = 100.0  # milliDarcy
    cv: float = 1.0
    spectral_exponent: float = 1.5

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ValueError("field needs at least 2x2 cells")
        if self.cv < 0:
            raise ValueError(f"coefficient of variation must be >= 0, got {self.cv}")
        if self.mean_perm <= 0:
            raise ValueError(f"mean permeability must be positive, got {self.mean_perm}")


def log_std(cv: float) -> float:
    """Standard deviation of ``ln K`` giving a log-normal with the requested CV."""
    return math.sqrt(math.log1p(cv * cv))


def gaussian_field(nx: int, ny: int, seed: int, spectral_exponent: float) -> np.ndarray:
    """Zero-mean, unit-variance Gaussian field with spectrum ``|k|^-beta``, shape ``(ny, nx)``.

    Synthesized on a doubled periodic domain and cropped, which removes the
    wrap-around correlation of the raw FFT field.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    my, mx = 2 * ny, 2 * nx
    noise = rng.standard_normal((my, mx))
    ky = np.fft.fftfreq(my)
    kx = np.fft.rfftfreq(mx)
    k2 = ky[:, None] ** 2 + kx[None, :] ** 2
    amp = np.zeros_like(k2)
    nz = k2 > 0
    amp[nz] = k2[nz] ** (-spectral_exponent / 4.0)
    xi = np.fft.irfft2(np.fft.rfft2(noise) * amp, s=(my, mx))[:ny, :nx]
    xi = xi - xi.mean()
    std = xi.std()
    return xi / std if std > 0 else xi


def generate(spec: FieldSpec, grid: Grid2D | None = None) -> CellField:
    """Permeability field with sample mean ``mean_perm`` and population CV ``cv``."""
    grid = grid or Grid2D(spec.nx, spec.ny, 1.0, 1.0)
    if grid.shape != (spec.ny, spec.nx):
        raise ValueError("grid does not match the field dimensions")
    if spec.cv == 0:
        return CellField.constant(grid, spec.mean_perm)
    xi = gaussian_field(spec.nx, spec.ny, spec.seed, spec.spectral_exponent)
    k = np.exp(log_std(spec.cv) * xi)
    return CellField(grid, spec.mean_perm * (k / k.mean()))
