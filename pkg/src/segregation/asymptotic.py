"""Small-diffusion segregated steady state.

For ``eps -> 0`` the steady pair shrinks like ``delta = eps**(1/3)``; in the
rescaled variable it is a pair of matched parabolic caps.  The inner species
(mass ``z1``) occupies ``[-mu, mu]`` and the outer one ``mu <= |x| <= lam``:

    rho1~(x) = 1/2 (C1 mu^2 + C2 (lam^2 - mu^2)) - C1 x^2 / 2      |x| < mu
    rho2~(x) = C2/2 (lam^2 - x^2)                                  mu < |x| < lam

``(mu, lam)`` solve the cubic system with ``zt = (1 + z1) / 2``

    zt - 1/2 = (C1/3 - C2/2) mu^3 + C2/2 mu lam^2
    1 - zt   = C2/6 mu^3 + C2/3 lam^3 - C2/2 mu lam^2

and physical densities are ``rho_i(x) = rho_i~(x / delta) / delta``.
Total mass is 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import energy
from . import kernels as kn
from .errors import InputError, NumericalFailure
from .grid import GridDensity


def constants(triple: kn.KernelTriple, z1):
    """(C1, C2) from the kernel curvatures at the origin."""
    if not 0 < z1 < 1:
        raise InputError("domain", f"z1 must lie in (0, 1), got {z1}")
    s1, s2, k = (float(kn.eval_d2(g, 0.0)) for g in (triple.s1, triple.s2, triple.k))
    if max(s1, s2, k) >= 0:
        raise InputError("flat-kernel", "kernels need strictly negative curvature at 0")
    c1 = -s1 * z1 - k * (1 - z1)
    c2 = -s2 * (1 - z1) - k * z1
    return c1, c2


def lambda_tilde(mu, c1, c2):
    """lam as a function of mu from the sum of the two cubic equations."""
    return np.cbrt(1.5 / c2 + (c2 - c1) / c2 * np.asarray(mu, dtype=float) ** 3)


def cubic_residuals(mu, lam, c1, c2, z1):
    zt = 0.5 * (1 + z1)
    r1 = (c1 / 3 - c2 / 2) * mu**3 + c2 / 2 * mu * lam**2 - (zt - 0.5)
    r2 = c2 / 6 * mu**3 + c2 / 3 * lam**3 - c2 / 2 * mu * lam**2 - (1 - zt)
    return r1, r2


def solve_mu_lambda(c1, c2, z1, mu_hi=None, max_doublings=60):
    """Unique root with ``0 < mu < lam``, by bisection on

        g(mu) = (mu - lam~(mu))^2 (2 lam~(mu) + mu) - 3 (1 - z1) / C2

    ``g(0) = 3 z1 / C2 > 0`` and ``g`` is negative where ``mu = lam~(mu)``,
    i.e. at ``mu = (3 / (2 C1))**(1/3)``, which is the default upper end.
    """
    if not (c1 > 0 and c2 > 0):
        raise InputError("domain", "C1, C2 must be positive")
    if not 0 < z1 < 1:
        raise InputError("domain", "z1 must lie in (0, 1)")
    target = 3.0 * (1 - z1) / c2

    def g(mu):
        lam = lambda_tilde(mu, c1, c2)
        return (mu - lam) ** 2 * (2 * lam + mu) - target

    lo = 0.0
    hi = (1.5 / c1) ** (1 / 3) if mu_hi is None else float(mu_hi)
    for _ in range(max_doublings):
        if g(hi) < 0:
            break
        hi *= 2.0
    else:
        raise NumericalFailure("no-bracket", "could not bracket the (mu, lambda) root")
    # unique sign change in (0, hi]: stop when the interval can no longer shrink
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    lam = float(lambda_tilde(mu, c1, c2))
    if not 0 < mu < lam:
        raise NumericalFailure("no-bracket", f"root outside 0 < mu < lambda: mu={mu}, lam={lam}")
    return mu, lam


@dataclass(frozen=True)
class AsymptoticSolution:
    z1: float
    C1: float
    C2: float
    mu: float
    lam: float
    delta: float
    rho1: GridDensity
    rho2: GridDensity

    @property
    def eps(self):
        return self.delta**3

    @property
    def interface(self):
        return self.delta * self.mu

    @property
    def outer_edge(self):
        return self.delta * self.lam

    @property
    def w(self):
        return self.rho1.with_values(self.rho1.values + self.rho2.values)

    def rho1_at(self, x):
        return rho1_scaled(np.asarray(x) / self.delta, self.C1, self.C2, self.mu, self.lam) / self.delta

    def rho2_at(self, x):
        return rho2_scaled(np.asarray(x) / self.delta, self.C2, self.mu, self.lam) / self.delta

    def residuals(self):
        return cubic_residuals(self.mu, self.lam, self.C1, self.C2, self.z1)


def rho1_scaled(x, c1, c2, mu, lam):
    x = np.asarray(x, dtype=float)
    cap = 0.5 * (c1 * mu**2 + c2 * (lam**2 - mu**2)) - 0.5 * c1 * x**2
    return np.where(np.abs(x) <= mu, np.maximum(cap, 0.0), 0.0)


def rho2_scaled(x, c2, mu, lam):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    return np.where((ax >= mu) & (ax <= lam), 0.5 * c2 * np.maximum(lam**2 - x * x, 0.0), 0.0)


def _primitive_cap(a, b, lo, hi):
    """Antiderivative of ``a - b x^2`` restricted to ``[lo, hi]``, as a function."""

    def F(x):
        x = np.clip(x, lo, hi)
        return a * x - b * x**3 / 3.0

    return lambda x: F(x) - F(np.full_like(np.asarray(x, dtype=float), lo))


def _cell_average(prim, nodes, dx):
    return (prim(nodes + 0.5 * dx) - prim(nodes - 0.5 * dx)) / dx


def default_grid(delta, lam, cells_per_support=512, pad=0.25):
    """Uniform grid on ``[-(1+pad) delta lam, (1+pad) delta lam]``."""
    half = (1 + pad) * delta * lam
    dx = 2 * delta * lam / cells_per_support
    n = int(np.ceil(2 * half / dx)) + 1
    return -0.5 * (n - 1) * dx, dx, n


def build_profiles(c1, c2, z1, mu, lam, eps, grid=None) -> AsymptoticSolution:
    """Physical densities on ``grid = (x0, dx, n)`` as exact cell averages.

    Cell averages keep the jump at the interface from costing mass accuracy:
    the trapezoid mass of each species equals its exact mass whenever the
    grid extends past the outer support edge.
    """
    if not eps > 0:
        raise InputError("domain", "eps must be positive")
    delta = eps ** (1 / 3)
    if grid is None:
        grid = default_grid(delta, lam)
    x0, dx, n = grid
    if 2 * delta * mu / dx < 16:
        raise InputError("grid-resolution", "fewer than 16 cells across the inner support")
    nodes = x0 + dx * np.arange(n)
    # work in rescaled variables: cell [x-dx/2, x+dx/2] -> [(x-dx/2)/delta, ...]
    s_nodes = nodes / delta
    s_dx = dx / delta
    a1 = 0.5 * (c1 * mu**2 + c2 * (lam**2 - mu**2))
    p1 = _primitive_cap(a1, 0.5 * c1, -mu, mu)
    a2 = 0.5 * c2 * lam**2
    p2r = _primitive_cap(a2, 0.5 * c2, mu, lam)
    p2l = _primitive_cap(a2, 0.5 * c2, -lam, -mu)
    r1 = _cell_average(p1, s_nodes, s_dx) / delta
    r2 = (_cell_average(p2r, s_nodes, s_dx) + _cell_average(p2l, s_nodes, s_dx)) / delta
    # averages are of rho~(x/delta)/delta over a cell of width dx = delta * s_dx
    r1 = np.maximum(r1, 0.0)
    r2 = np.maximum(r2, 0.0)
    return AsymptoticSolution(
        z1, c1, c2, mu, lam, delta, GridDensity(x0, dx, r1), GridDensity(x0, dx, r2)
    )


def solve(triple: kn.KernelTriple, z1, eps, grid=None) -> AsymptoticSolution:
    """constants -> (mu, lambda) -> profiles."""
    c1, c2 = constants(triple, z1)
    mu, lam = solve_mu_lambda(c1, c2, z1)
    return build_profiles(c1, c2, z1, mu, lam, eps, grid)


@dataclass(frozen=True)
class CriticalityReport:
    eps: float
    deviation1: float
    deviation2: float
    relative1: float
    relative2: float
    asserted: bool
    threshold: float = 0.05

    @property
    def ok(self):
        if not self.asserted:
            return True
        return max(self.relative1, self.relative2) < self.threshold


def criticality_check(sol: AsymptoticSolution, triple: kn.KernelTriple, eps, eps_check=1e-3):
    """Spread (max - min) of the first variation of the energy on each support.

    At a steady state ``eps w - S1*rho1 - K*rho2`` is constant on supp(rho1),
    and likewise for species 2.  Deviations are reported relative to
    ``eps * max(w)``; the 5% threshold is only enforced for ``eps <= eps_check``.
    Cells that straddle a support edge are excluded.
    """
    x = sol.rho1.x
    dx = sol.rho1.dx
    lo_cells = np.abs(x) - 0.5 * dx
    hi_cells = np.abs(x) + 0.5 * dx
    inner = hi_cells < sol.interface
    outer = (lo_cells > sol.interface) & (hi_cells < sol.outer_edge)
    pot1 = energy.potential(sol.rho1, sol.rho2, triple, eps, 1)
    pot2 = energy.potential(sol.rho1, sol.rho2, triple, eps, 2)
    d1 = float(np.ptp(pot1[inner]))
    d2 = float(np.ptp(pot2[outer]))
    scale = eps * float(np.max(sol.rho1.values + sol.rho2.values))
    return CriticalityReport(eps, d1, d2, d1 / scale, d2 / scale, eps <= eps_check)
