"""Constitutive closures for incompressible two-phase (water/oil) flow.

Quadratic relative permeabilities with residual saturations; all functions
accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq


class DegenerateModelError(ValueError):
    """Raised when total mobility vanishes, which only invalid parameters allow."""


@dataclass(frozen=True)
class RockFluidModel:
    s_rw: float = 0.2
    s_ro: float = 0.15
    mu_w: float = 0.05
    mu_o: float = 10.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.s_rw < 1.0 - self.s_ro <= 1.0):
            raise DegenerateModelError(
                f"need 0 <= s_rw < 1 - s_ro <= 1, got s_rw={self.s_rw}, s_ro={self.s_ro}"
            )
        if not (self.mu_w > 0 and self.mu_o > 0):
            raise DegenerateModelError("viscosities must be positive")

    @property
    def s_max(self) -> float:
        """Largest mobile water saturation, ``1 - s_ro``."""
        return 1.0 - self.s_ro

    # -- relative permeabilities --------------------------------------------

    def krw(self, s):
        sw = np.clip(s, self.s_rw, 1.0)
        return ((sw - self.s_rw) / (1.0 - self.s_rw)) ** 2

    def kro(self, s):
        so = np.clip(s, 0.0, self.s_max)
        return (1.0 - so / self.s_max) ** 2

    # -- mobilities -----------------------------------------------------------

    def _phase_mobilities(self, s):
        sw = np.clip(s, self.s_rw, 1.0)
        so = np.clip(s, 0.0, self.s_max)
        a = (sw - self.s_rw) ** 2 / ((1.0 - self.s_rw) ** 2 * self.mu_w)
        b = (1.0 - so / self.s_max) ** 2 / self.mu_o
        return a, b

    def mobility(self, s):
        """Total mobility ``krw/mu_w + kro/mu_o``."""
        a, b = self._phase_mobilities(s)
        lam = a + b
        if np.any(lam <= 0.0):
            raise DegenerateModelError("total mobility vanished")
        return lam

    def fractional_flow(self, s):
        a, b = self._phase_mobilities(s)
        return a / (a + b)

    def dfds(self, s):
        """Closed-form derivative of the fractional flow."""
        sw = np.clip(s, self.s_rw, 1.0)
        so = np.clip(s, 0.0, self.s_max)
        cw = 1.0 / ((1.0 - self.s_rw) ** 2 * self.mu_w)
        a = (sw - self.s_rw) ** 2 * cw
        da = 2.0 * (sw - self.s_rw) * cw
        # zero derivative where the clip is active
        da = np.where(np.asarray(s) > 1.0, 0.0, da)
        r = 1.0 - so / self.s_max
        b = r**2 / self.mu_o
        db = np.where(np.asarray(s) < 0.0, 0.0, -2.0 * r / (self.s_max * self.mu_o))
        d = a + b
        out = (da * b - a * db) / (d * d)
        return out if np.ndim(out) else float(out)

    def _d2fds2(self, s: float) -> float:
        # only used on the open mobile interval, where no clip is active
        cw = 1.0 / ((1.0 - self.s_rw) ** 2 * self.mu_w)
        a = (s - self.s_rw) ** 2 * cw
        da = 2.0 * (s - self.s_rw) * cw
        dda = 2.0 * cw
        r = 1.0 - s / self.s_max
        b = r**2 / self.mu_o
        db = -2.0 * r / (self.s_max * self.mu_o)
        ddb = 2.0 / (self.s_max**2 * self.mu_o)
        d = a + b
        dd = da + db
        num = da * b - a * db
        return (dda * b - a * ddb) / d**2 - 2.0 * num * dd / d**3

    # -- wave speeds ------------------------------------------------------------

    @cached_property
    def critical_points(self) -> tuple[float, ...]:
        """Interior extrema of ``f'`` on the mobile range, found once per model."""
        lo, hi = self.s_rw, self.s_max
        grid = np.linspace(lo, hi, 4097)[1:-1]
        g = np.array([self._d2fds2(x) for x in grid])
        roots = []
        for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
            roots.append(brentq(self._d2fds2, grid[i], grid[i + 1], xtol=1e-15))
        roots.extend(float(x) for x in grid[g == 0.0])
        return tuple(sorted(roots))

    @cached_property
    def max_speed(self) -> float:
        """Global maximum of ``|f'|`` over ``[s_rw, 1 - s_ro]``."""
        pts = [self.s_rw, self.s_max, *self.critical_points]
        return float(max(abs(self.dfds(p)) for p in pts))

    def wave_speed_bound(self, s_left, s_right):
        """Maximum of ``|f'|`` over the interval spanned by the two states."""
        lo = np.minimum(s_left, s_right)
        hi = np.maximum(s_left, s_right)
        out = np.maximum(np.abs(self.dfds(lo)), np.abs(self.dfds(hi)))
        for c in self.critical_points:
            inside = (lo <= c) & (c <= hi)
            out = np.where(inside, np.maximum(out, abs(self.dfds(c))), out)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class LinearFlux:
    """``f(s) = s``: plain linear advection, used for convergence studies."""

    @property
    def max_speed(self) -> float:
        return 1.0

    def fractional_flow(self, s):
        return np.asarray(s, dtype=float) * 1.0

    def dfds(self, s):
        return np.ones_like(np.asarray(s, dtype=float))

    def wave_speed_bound(self, s_left, s_right):
        return np.ones(np.broadcast(np.asarray(s_left), np.asarray(s_right)).shape)
