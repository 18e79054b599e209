"""Interaction potentials S1, S2, K.

Gaussian kernels are normalised so that their integral equals the amplitude:

    G(x) = A / (sigma * sqrt(2 pi)) * exp(-x^2 / (2 sigma^2)),   G_hat(xi) = A exp(-sigma^2 xi^2 / 2)

Tabulated kernels are cubic splines through user samples on a uniform grid,
extended by zero outside the table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InputError

SQRT_2PI = np.sqrt(2.0 * np.pi)

GAUSSIAN = "gaussian"
TABULATED = "tabulated"


@dataclass(frozen=True)
class Kernel:
    """A symmetric, non-negative interaction potential.

    For ``family == "tabulated"`` the samples ``table_x`` / ``table_g`` must be
    on a uniform, strictly increasing grid; ``amplitude`` then acts as a
    multiplier on the sampled values.
    """

    family: str = GAUSSIAN
    amplitude: float = 1.0
    width: float = 1.0
    table_x: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    table_g: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family == GAUSSIAN:
            if not self.width > 0:
                raise InputError("domain", f"kernel width must be positive, got {self.width}")
            if self.amplitude < 0:
                raise InputError("domain", "kernel amplitude must be non-negative")
        elif self.family == TABULATED:
            x = np.asarray(self.table_x, dtype=float)
            g = np.asarray(self.table_g, dtype=float)
            if x.ndim != 1 or x.shape != g.shape or x.size < 4:
                raise InputError("domain", "tabulated kernel needs >= 4 matching samples")
            dx = np.diff(x)
            if np.any(dx <= 0):
                raise InputError("domain", "tabulated x must be strictly increasing")
            if not np.allclose(dx, dx[0], rtol=1e-8, atol=0):
                raise InputError("domain", "tabulated x must be uniformly spaced")
            object.__setattr__(self, "table_x", x)
            object.__setattr__(self, "table_g", g)
            object.__setattr__(self, "_spline", CubicSpline(x, g, bc_type="natural"))
        else:
            raise InputError("domain", f"unknown kernel family {self.family!r}")

    @property
    def mass(self) -> float:
        if self.family == GAUSSIAN:
            return float(self.amplitude)
        return float(self.amplitude * np.trapezoid(self.table_g, self.table_x))

    def scaled(self, factor: float) -> "Kernel":
        """Return ``factor * self`` (the ``S_i = sigma_i K`` construction)."""
        return Kernel(self.family, self.amplitude * factor, self.width, self.table_x, self.table_g)

    def _tab(self, x, nu):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.table_x[0]) & (x <= self.table_x[-1])
        out = np.where(inside, self._spline(np.clip(x, self.table_x[0], self.table_x[-1]), nu), 0.0)
        return self.amplitude * out


def eval(kernel: Kernel, x):
    """G(x)."""
    if kernel.family == GAUSSIAN:
        x = np.asarray(x, dtype=float)
        s = kernel.width
        return kernel.amplitude / (s * SQRT_2PI) * np.exp(-0.5 * (x / s) ** 2)
    return kernel._tab(x, 0)


def eval_d1(kernel: Kernel, x):
    """G'(x); odd in x."""
    if kernel.family == GAUSSIAN:
        x = np.asarray(x, dtype=float)
        return -x / kernel.width**2 * eval(kernel, x)
    return kernel._tab(x, 1)


def eval_d2(kernel: Kernel, x):
    """G''(x); even in x."""
    if kernel.family == GAUSSIAN:
        x = np.asarray(x, dtype=float)
        s2 = kernel.width**2
        return (x * x / s2 - 1.0) / s2 * eval(kernel, x)
    return kernel._tab(x, 2)


def fourier(kernel: Kernel, xi, window_tol=1e-6):
    """Real, even transform int G(x) exp(-i xi x) dx.

    Tabulated kernels are transformed by trapezoid quadrature on a 4x refined
    copy of the spline; the table must decay to ``window_tol * peak`` at both
    ends, otherwise the truncation is not negligible.
    """
    xi = np.asarray(xi, dtype=float)
    if kernel.family == GAUSSIAN:
        return kernel.amplitude * np.exp(-0.5 * (kernel.width * xi) ** 2)
    g = kernel.table_g
    peak = np.max(np.abs(g))
    if peak > 0 and max(abs(g[0]), abs(g[-1])) > window_tol * peak:
        raise InputError("fourier-window", "tabulated kernel does not decay inside its table")
    x = np.linspace(kernel.table_x[0], kernel.table_x[-1], 4 * (g.size - 1) + 1)
    vals = eval(kernel, x)
    flat = np.atleast_1d(xi)
    out = np.trapezoid(vals[None, :] * np.cos(flat[:, None] * x[None, :]), x, axis=1)
    return out.reshape(xi.shape) if xi.ndim else float(out[0])


def _check_nonneg(x, y):
    if np.any(np.asarray(x) < 0) or np.any(np.asarray(y) < 0):
        raise InputError("domain", "symmetrised kernels need x, y >= 0")


def symmetrized_minus(kernel: Kernel, x, y):
    """G(x - y) - G(x + y); non-negative for decreasing kernels."""
    _check_nonneg(x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return eval(kernel, x - y) - eval(kernel, x + y)


def symmetrized_plus(kernel: Kernel, x, y):
    """G(x - y) + G(x + y)."""
    _check_nonneg(x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return eval(kernel, x - y) + eval(kernel, x + y)


@dataclass(frozen=True)
class KernelTriple:
    s1: Kernel
    s2: Kernel
    k: Kernel

    @classmethod
    def multiples(cls, sigma1, sigma2, base: Kernel = None):
        """S1 = sigma1 K, S2 = sigma2 K."""
        base = base if base is not None else Kernel()
        return cls(base.scaled(sigma1), base.scaled(sigma2), base)

    def scaled(self, c):
        return KernelTriple(self.s1.scaled(c), self.s2.scaled(c), self.k.scaled(c))

    def swapped(self):
        return KernelTriple(self.s2, self.s1, self.k)

    @property
    def min_width(self):
        return min(kk.width for kk in (self.s1, self.s2, self.k))


def tabulate(kernel: Kernel, half_width=None, n=2001) -> Kernel:
    """Sample ``kernel`` on a symmetric uniform grid into a tabulated kernel."""
    half_width = 12.0 * kernel.width if half_width is None else half_width
    x = np.linspace(-half_width, half_width, n)
    return Kernel(TABULATED, 1.0, kernel.width, x, np.asarray(eval(kernel, x)))


def load_table(path) -> Kernel:
    """Read a two-column text file ``x G(x)`` into a tabulated kernel."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise InputError("domain", f"{path}: expected two columns")
    x, g = data[:, 0], data[:, 1]
    width = float(np.sqrt(np.trapezoid(x * x * g, x) / np.trapezoid(g, x)))
    return Kernel(TABULATED, 1.0, width, x, g)
