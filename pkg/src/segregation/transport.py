"""Lagrangian particle scheme for the two-species system.

Each species is represented by N ordered particles of equal mass (quantiles of
its density).  Particle velocities combine

* self-diffusion, the gap-based discretisation of ``-(eps/2) d_z (u_z)^-2``,
* cross-diffusion, ``-eps * d_x`` of a Gaussian-mollified density of the other
  species, and
* nonlocal attraction by S1 / S2 (same species) and K (other species).

With a bandwidth that is frozen for the whole run the scheme is the exact
particle gradient flow of :func:`segregation.energy.discrete_energy`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np
from numba import njit

from . import kernels as kn
from .errors import InputError, NumericalFailure
from .grid import GridDensity

log = logging.getLogger(__name__)

GAP_MIN = 1e-10
DT_MIN = 1e-8
# RK4 stability interval on the negative real axis is about [-2.785, 0]
RK4_REAL_STABILITY = 2.785


@dataclass(frozen=True)
class ParticleState:
    """Ordered positions ``u`` (species 1) and ``v`` (species 2) at time ``t``.

    Each particle of species i carries ``mass_i / N``.
    """

    u: np.ndarray
    v: np.ndarray
    mass1: float = 1.0
    mass2: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        v = np.array(self.v, dtype=float)
        if u.ndim != 1 or v.ndim != 1 or u.size < 2 or u.size != v.size:
            raise InputError("domain", "need two equal-length position arrays with N >= 2")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self):
        return self.u.size

    @property
    def m1(self):
        return self.mass1 / self.n

    @property
    def m2(self):
        return self.mass2 / self.n

    def is_ordered(self, gap_min=0.0):
        return bool(np.all(np.diff(self.u) > gap_min) and np.all(np.diff(self.v) > gap_min))

    def check_ordered(self, gap_min=GAP_MIN):
        if not self.is_ordered(gap_min):
            raise InputError("ordering", "particle positions must be strictly increasing")

    def moved(self, du, dv, dt):
        return ParticleState(self.u + du, self.v + dv, self.mass1, self.mass2, self.t + dt)


@dataclass(frozen=True)
class ReconstructionParams:
    """Mollifier bandwidth for the cross-diffusion gradient."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise InputError("domain", "bandwidth must be positive")

    @classmethod
    def default_for(cls, state: ParticleState, factor=2.0):
        """``factor`` times the mean inter-particle gap, averaged over both species."""
        gap_u = (state.u[-1] - state.u[0]) / (state.n - 1)
        gap_v = (state.v[-1] - state.v[0]) / (state.n - 1)
        return cls(factor * 0.5 * (gap_u + gap_v))


# -- initial data ---------------------------------------------------------------


def atomize(rho0: GridDensity, n: int, rule="sup"):
    """Place ``n`` equal-mass particles at quantiles of ``rho0``.

    ``rule="sup"`` puts particle i at the first point where the cumulative mass
    reaches i/n (so the last particle sits at the right edge of the support).
    ``rule="midpoint"`` uses levels (i - 1/2)/n, which keeps symmetric data
    symmetric.  The cumulative distribution is the piecewise-linear interpolant
    of the trapezoid partial sums.
    """
    if n < 2:
        raise InputError("domain", "need at least two particles")
    vals = rho0.values
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * rho0.dx * (vals[1:] + vals[:-1]))))
    total = cdf[-1]
    if not total > 0:
        raise InputError("empty-density", "initial density has zero mass")
    cdf = cdf / total
    if rule == "sup":
        levels = np.arange(1, n + 1) / n
    elif rule == "midpoint":
        levels = (np.arange(1, n + 1) - 0.5) / n
    else:
        raise InputError("domain", f"unknown atomization rule {rule!r}")
    levels[-1] = min(levels[-1], cdf[-1])
    k = np.searchsorted(cdf, levels, side="left")
    k = np.clip(k, 1, cdf.size - 1)
    c0, c1 = cdf[k - 1], cdf[k]
    frac = np.where(c1 > c0, (levels - c0) / np.where(c1 > c0, c1 - c0, 1.0), 1.0)
    x = rho0.x0 + rho0.dx * (k - 1 + np.clip(frac, 0.0, 1.0))
    if np.any(np.diff(x) <= 0):
        raise InputError("empty-density", "grid too coarse to separate the requested quantiles")
    return x


# -- velocities -----------------------------------------------------------------


def _diffusion(x, m, eps):
    gaps = np.diff(x)
    inv2 = gaps**-2
    left = np.concatenate(([0.0], inv2))
    right = np.concatenate((inv2, [0.0]))
    return 0.5 * eps * m * (left - right)


def _mollifier_d1(d, h):
    return -d / (h**3 * kn.SQRT_2PI) * np.exp(-0.5 * (d / h) ** 2)


def _pair_sum(fn, a, b):
    return fn(a[:, None] - b[None, :]).sum(axis=1)


@njit(cache=True, fastmath=True)
def _gaussian_velocities(u, v, m1, m2, eps, h, a_s1, w_s1, a_s2, w_s2, a_k, w_k):
    # all-Gaussian kernels; each pair evaluated once, fixed summation order
    n = u.size
    du = np.zeros(n)
    dv = np.zeros(n)
    root = np.sqrt(2 * np.pi)
    c_h = eps / (h**3 * root)
    c_s1 = a_s1 / (w_s1**3 * root)
    c_s2 = a_s2 / (w_s2**3 * root)
    c_k = a_k / (w_k**3 * root)
    for i in range(n):
        for j in range(i + 1, n):
            d = u[i] - u[j]
            f = c_s1 * d * np.exp(-0.5 * (d / w_s1) ** 2)
            du[i] -= m1 * f
            du[j] += m1 * f
            d = v[i] - v[j]
            f = c_s2 * d * np.exp(-0.5 * (d / w_s2) ** 2)
            dv[i] -= m2 * f
            dv[j] += m2 * f
    for i in range(n):
        for j in range(n):
            d = u[i] - v[j]
            f = c_k * d * np.exp(-0.5 * (d / w_k) ** 2) - c_h * d * np.exp(-0.5 * (d / h) ** 2)
            du[i] -= m2 * f
            dv[j] += m1 * f
    return du, dv


def _all_gaussian(triple):
    return all(g.family == kn.GAUSSIAN for g in (triple.s1, triple.s2, triple.k))


def rhs(state: ParticleState, triple: kn.KernelTriple, eps, params: ReconstructionParams, gap_min=GAP_MIN):
    """Velocities ``(du/dt, dv/dt)``."""
    u, v = state.u, state.v
    if min(np.diff(u).min(), np.diff(v).min()) <= gap_min:
        raise NumericalFailure("particle-collision", "adjacent particles coincide", state)
    m1, m2 = state.m1, state.m2
    h = params.h
    du = _diffusion(u, m1, eps)
    dv = _diffusion(v, m2, eps)
    if _all_gaussian(triple):
        s1, s2, k = triple.s1, triple.s2, triple.k
        fu, fv = _gaussian_velocities(
            u, v, m1, m2, float(eps), h, s1.amplitude, s1.width, s2.amplitude, s2.width, k.amplitude, k.width
        )
        return du + fu, dv + fv
    if eps != 0:
        du -= eps * m2 * _pair_sum(lambda d: _mollifier_d1(d, h), u, v)
        dv -= eps * m1 * _pair_sum(lambda d: _mollifier_d1(d, h), v, u)
    du += m1 * _pair_sum(lambda d: kn.eval_d1(triple.s1, d), u, u)
    du += m2 * _pair_sum(lambda d: kn.eval_d1(triple.k, d), u, v)
    dv += m2 * _pair_sum(lambda d: kn.eval_d1(triple.s2, d), v, v)
    dv += m1 * _pair_sum(lambda d: kn.eval_d1(triple.k, d), v, u)
    return du, dv


def stable_dt(state: ParticleState, triple: kn.KernelTriple, eps, params: ReconstructionParams, safety=0.9):
    """Largest step inside the RK4 stability region, from a Jacobian bound."""
    gu = np.diff(state.u).min()
    gv = np.diff(state.v).min()
    m1, m2 = state.m1, state.m2
    # diffusion chain (Gershgorin) + mollified cross term + kernel curvature
    lam = 4.0 * eps * max(m1 / gu**3, m2 / gv**3)
    lam += eps * max(m1 / gu, m2 / gv) / params.h**2
    curv = [abs(float(kn.eval_d2(g, 0.0))) for g in (triple.s1, triple.s2, triple.k)]
    lam += (state.mass1 + state.mass2) * max(curv)
    return RK4_REAL_STABILITY * safety / lam if lam > 0 else np.inf


def step(state, triple, eps, params, dt, dt_min=DT_MIN, gap_min=GAP_MIN):
    """One classical RK4 step; halves ``dt`` until the result stays ordered.

    Returns ``(new_state, dt_used)``.
    """
    if not dt > 0:
        raise InputError("domain", "dt must be positive")
    while dt >= dt_min:
        try:
            k1 = rhs(state, triple, eps, params, gap_min)
            s2 = state.moved(0.5 * dt * k1[0], 0.5 * dt * k1[1], 0.5 * dt)
            k2 = rhs(s2, triple, eps, params, gap_min)
            s3 = state.moved(0.5 * dt * k2[0], 0.5 * dt * k2[1], 0.5 * dt)
            k3 = rhs(s3, triple, eps, params, gap_min)
            s4 = state.moved(dt * k3[0], dt * k3[1], dt)
            k4 = rhs(s4, triple, eps, params, gap_min)
        except NumericalFailure:
            dt *= 0.5
            continue
        du = dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dv = dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        new = state.moved(du, dv, dt)
        if new.is_ordered(gap_min):
            return new, dt
        dt *= 0.5
    raise NumericalFailure("stiff-blowup", f"step size fell below {dt_min} at t={state.t}", state)


@dataclass
class Trajectory:
    """Snapshots plus a per-accepted-step log."""

    snapshots: List[ParticleState] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    dts: List[float] = field(default_factory=list)
    energies: List[float] = field(default_factory=list)
    ordered: List[bool] = field(default_factory=list)
    params: Optional[ReconstructionParams] = None

    @property
    def final(self):
        return self.snapshots[-1]

    @property
    def initial(self):
        return self.snapshots[0]


def integrate(
    state: ParticleState,
    triple: kn.KernelTriple,
    eps,
    T,
    dt=1e-3,
    params: Optional[ReconstructionParams] = None,
    snapshot_every=None,
    record_energy=True,
    dt_min=DT_MIN,
    gap_min=GAP_MIN,
    on_snapshot: Optional[Callable[[ParticleState], None]] = None,
):
    """Run the particle system from ``state.t`` to ``T``.

    The step is ``min(dt, stable_dt)``, clipped so that snapshot times and ``T``
    are hit exactly.  ``params`` defaults to :meth:`ReconstructionParams.default_for`
    evaluated on the initial state and is then kept fixed.
    """
    from .energy import discrete_energy

    state.check_ordered(gap_min)
    params = params or ReconstructionParams.default_for(state)
    traj = Trajectory(params=params)
    t_end = float(T)
    snap_dt = snapshot_every if snapshot_every else max(t_end - state.t, 0.0)
    next_snap = state.t + snap_dt if snap_dt > 0 else np.inf

    def record_snapshot(s):
        traj.snapshots.append(s)
        if on_snapshot is not None:
            on_snapshot(s)

    record_snapshot(state)
    if record_energy:
        traj.energies.append(discrete_energy(state, triple, eps, params))
    traj.times.append(state.t)
    traj.ordered.append(True)
    while state.t < t_end - 1e-14 * max(1.0, t_end):
        h = min(dt, stable_dt(state, triple, eps, params), t_end - state.t, next_snap - state.t)
        state, used = step(state, triple, eps, params, h, dt_min, gap_min)
        traj.times.append(state.t)
        traj.dts.append(used)
        traj.ordered.append(state.is_ordered(gap_min))
        if record_energy:
            traj.energies.append(discrete_energy(state, triple, eps, params))
        if state.t >= next_snap - 1e-12 * max(1.0, abs(next_snap)):
            state = replace(state, t=next_snap)
            record_snapshot(state)
            next_snap += snap_dt
    if traj.snapshots[-1] is not state:
        record_snapshot(state)
    return traj


def simulate(config, on_snapshot=None):
    """Build the initial state from an :class:`ExperimentConfig` and integrate."""
    state = initial_state(config)
    params = ReconstructionParams(config.bandwidth) if config.bandwidth else None
    return integrate(
        state,
        config.triple,
        config.eps,
        config.T,
        dt=config.dt,
        params=params,
        snapshot_every=config.snapshot_every,
        on_snapshot=on_snapshot,
    )


def initial_state(config):
    u = atomize(config.rho1_0, config.N, config.atomization)
    v = atomize(config.rho2_0, config.N, config.atomization)
    return ParticleState(u, v, config.m1, config.m2, 0.0)


# -- reconstruction -------------------------------------------------------------


def block_edges(x):
    """Edges of the piecewise-constant blocks around each particle.

    Interior edges are neighbour midpoints; the outer blocks get the same
    half-width on both sides of their particle.
    """
    mid = 0.5 * (x[1:] + x[:-1])
    left = x[0] - 0.5 * (x[1] - x[0])
    right = x[-1] + 0.5 * (x[-1] - x[-2])
    return np.concatenate(([left], mid, [right]))


def block_density(x, m):
    """``(edges, heights)``: particle i spreads mass ``m`` over its block."""
    edges = block_edges(x)
    return edges, m / np.diff(edges)


def species_positions(state, species):
    if species in (1, "1", "rho1", "u"):
        return state.u, state.m1
    if species in (2, "2", "rho2", "v"):
        return state.v, state.m2
    raise InputError("domain", f"unknown species {species!r}")


def reconstruct(state: ParticleState, species, grid=None) -> GridDensity:
    """Piecewise-constant density of one species, cell-averaged onto ``grid``.

    ``grid`` is ``(x0, dx, n)``; node k represents the cell
    ``[x_k - dx/2, x_k + dx/2]``.  When the blocks lie inside the grid's
    interior the trapezoid mass equals ``N m`` to rounding.
    """
    state.check_ordered(0.0)
    x, m = species_positions(state, species)
    edges, heights = block_density(x, m)
    if grid is None:
        grid = snapshot_grid(state)
    x0, dx, n = grid
    nodes = x0 + dx * np.arange(n)
    cell_lo = nodes - 0.5 * dx
    cell_hi = nodes + 0.5 * dx
    cum = np.concatenate(([0.0], np.cumsum(heights * np.diff(edges))))

    def mass_below(y):
        j = np.clip(np.searchsorted(edges, y, side="right") - 1, 0, heights.size - 1)
        inside = (y > edges[0]) & (y < edges[-1])
        val = cum[j] + heights[j] * (y - edges[j])
        return np.where(y <= edges[0], 0.0, np.where(y >= edges[-1], cum[-1], np.where(inside, val, 0.0)))

    vals = (mass_below(cell_hi) - mass_below(cell_lo)) / dx
    return GridDensity(x0, dx, np.maximum(vals, 0.0))


def snapshot_grid(state: ParticleState, n=801, pad=0.1):
    """A uniform grid covering both species' blocks with a margin."""
    eu = block_edges(state.u)
    ev = block_edges(state.v)
    lo = min(eu[0], ev[0])
    hi = max(eu[-1], ev[-1])
    margin = pad * (hi - lo)
    lo -= margin
    hi += margin
    return lo, (hi - lo) / (n - 1), n


def reconstruct_pair(state, grid=None):
    grid = grid or snapshot_grid(state)
    return reconstruct(state, 1, grid), reconstruct(state, 2, grid)


def zeta_transform(rho1: GridDensity, rho2: GridDensity, w_floor=None):
    """``(w, zeta)`` with ``w = rho1 + rho2`` and ``zeta = (rho1 - rho2) / w``.

    ``zeta`` is set to 0 where ``w <= w_floor`` (default ``1e-8 * max w``) and
    returned as a plain array since it takes negative values.
    """
    from .grid import check_grids

    check_grids(rho1, rho2)
    w = rho1.values + rho2.values
    if w_floor is None:
        w_floor = 1e-8 * w.max() if w.size else 0.0
    live = w > w_floor
    zeta = np.zeros_like(w)
    zeta[live] = (rho1.values[live] - rho2.values[live]) / w[live]
    return rho1.with_values(w), np.clip(zeta, -1.0, 1.0)
