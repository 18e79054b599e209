"""Densities sampled on uniform grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class GridDensity:
    """Non-negative samples ``values[k]`` at ``x0 + k*dx``; mass by trapezoid rule."""

    x0: float
    dx: float
    values: np.ndarray
    mass: float = field(init=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if not self.dx > 0:
            raise InputError("domain", "grid spacing must be positive")
        if vals.ndim != 1 or vals.size < 2:
            raise InputError("domain", "need at least two samples")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise InputError("domain", "densities must be finite and non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "mass", trapezoid(vals, self.dx))

    @classmethod
    def from_function(cls, f, a, b, n):
        x = np.linspace(a, b, n)
        return cls(a, (b - a) / (n - 1), np.asarray(f(x), dtype=float))

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.values.size)

    @property
    def n(self):
        return self.values.size

    def with_values(self, values):
        return GridDensity(self.x0, self.dx, values)

    def same_grid(self, other):
        return (
            self.n == other.n
            and abs(self.x0 - other.x0) <= 1e-12 * max(1.0, abs(self.x0))
            and abs(self.dx - other.dx) <= 1e-12 * self.dx
        )


def trapezoid(values, dx):
    v = np.asarray(values, dtype=float)
    return float(dx * (v.sum() - 0.5 * (v[0] + v[-1])))


def trapezoid_weights(n, dx):
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def check_grids(*densities):
    first = densities[0]
    for d in densities[1:]:
        if not first.same_grid(d):
            raise InputError("grid-mismatch", "densities live on different grids")


def signed(x0, dx, values):
    """A direction (perturbation) on a grid; unlike GridDensity it may be negative."""
    return GridFunction(x0, dx, np.asarray(values, dtype=float))


@dataclass(frozen=True)
class GridFunction:
    """Signed samples on a uniform grid, used for perturbation directions."""

    x0: float
    dx: float
    values: np.ndarray

    @property
    def mass(self):
        return trapezoid(self.values, self.dx)

    @property
    def n(self):
        return np.asarray(self.values).size

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.n)

    same_grid = GridDensity.same_grid
