"""Symmetric segregated steady states as principal eigenvectors.

With supports ``[-L1, L1]`` (species 1) and ``L1 <= |x| <= L2`` (species 2)
fixed, the negative slopes ``p = -rho1'`` on ``[0, L1]``, ``q = -rho2'`` on
``[L1, L2]`` and the interface value ``w = rho1(L1)`` satisfy

    eps (p, q; w) = T (p, q; w)

for a positive integral operator T built from the odd-symmetrised kernels
``G(x - y) - G(x + y)``.  The diffusion constant is its principal eigenvalue.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import energy
from . import kernels as kn
from .errors import InputError, NumericalFailure
from .grid import GridDensity

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-14


@dataclass(frozen=True)
class OperatorGrid:
    """Trapezoid nodes on ``[0, L1]`` and ``[L1, L2]``."""

    L1: float
    L2: float
    n1: int = 64
    n2: int = 64

    def __post_init__(self):
        if not 0 < self.L1 < self.L2:
            raise InputError("domain", f"need 0 < L1 < L2, got L1={self.L1}, L2={self.L2}")
        if self.n1 < 8 or self.n2 < 8:
            raise InputError("domain", "need at least 8 nodes per interval")

    @property
    def x1(self):
        return np.linspace(0.0, self.L1, self.n1)

    @property
    def x2(self):
        return np.linspace(self.L1, self.L2, self.n2)

    @property
    def w1(self):
        return _trap(self.n1, self.L1 / (self.n1 - 1))

    @property
    def w2(self):
        return _trap(self.n2, (self.L2 - self.L1) / (self.n2 - 1))

    @property
    def size(self):
        return self.n1 + self.n2 + 1

    def refined(self, factor=2):
        return OperatorGrid(self.L1, self.L2, factor * (self.n1 - 1) + 1, factor * (self.n2 - 1) + 1)


def _trap(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True)
class ConeVector:
    p: np.ndarray
    q: np.ndarray
    w: float

    def flat(self):
        return np.concatenate((self.p, self.q, [self.w]))

    @classmethod
    def from_flat(cls, vec, grid: OperatorGrid):
        vec = np.asarray(vec, dtype=float)
        return cls(vec[: grid.n1].copy(), vec[grid.n1 : grid.n1 + grid.n2].copy(), float(vec[-1]))

    def in_cone(self, tol=0.0):
        return bool(np.all(self.p >= -tol) and np.all(self.q >= -tol) and self.w >= -tol)

    def max_norm(self):
        return float(max(np.abs(self.p).max(), np.abs(self.q).max(), abs(self.w)))


# -- preconditions --------------------------------------------------------------


@dataclass(frozen=True)
class PreconditionVerdict:
    ok: bool
    failed: Optional[str] = None
    node: Optional[float] = None

    def __bool__(self):
        return self.ok


def check_preconditions(triple: kn.KernelTriple, L1, L2, grid: Optional[OperatorGrid] = None):
    """Strict inequalities making T strongly positive, checked at interior nodes.

    (a) S1-bar(x, L1) > K-bar(x, L1) on (0, L1)
    (b) S2-bar(x, L1) < K-bar(x, L1) on (L1, L2)
    (c) S1'(L1) < K'(L1)
    """
    grid = grid or OperatorGrid(L1, L2)
    x1 = grid.x1[1:-1]
    x2 = grid.x2[1:-1]
    a = kn.symmetrized_minus(triple.s1, x1, L1) - kn.symmetrized_minus(triple.k, x1, L1)
    bad = np.nonzero(~(a > 0))[0]
    if bad.size:
        return PreconditionVerdict(False, "a", float(x1[bad[0]]))
    b = kn.symmetrized_minus(triple.k, x2, L1) - kn.symmetrized_minus(triple.s2, x2, L1)
    bad = np.nonzero(~(b > 0))[0]
    if bad.size:
        return PreconditionVerdict(False, "b", float(x2[bad[0]]))
    if not kn.eval_d1(triple.s1, L1) < kn.eval_d1(triple.k, L1):
        return PreconditionVerdict(False, "c", float(L1))
    return PreconditionVerdict(True)


# -- the operator ---------------------------------------------------------------


def boundary_terms(triple: kn.KernelTriple, grid: OperatorGrid):
    """A1 on the [0, L1] nodes and A2 on the [L1, L2] nodes, clamped at 0.

    A1(x) = S1(x-L1) - S1(x+L1) + K(x+L1) - K(x-L1)
    A2(x) = K(x-L1) - K(x+L1) + S2(x+L1) - S2(x-L1)
    """
    L1 = grid.L1
    x1, x2 = grid.x1, grid.x2
    a1 = kn.eval(triple.s1, x1 - L1) - kn.eval(triple.s1, x1 + L1) + kn.eval(triple.k, x1 + L1) - kn.eval(triple.k, x1 - L1)
    a2 = kn.eval(triple.k, x2 - L1) - kn.eval(triple.k, x2 + L1) + kn.eval(triple.s2, x2 + L1) - kn.eval(triple.s2, x2 - L1)
    for name, arr in (("A1", a1), ("A2", a2)):
        tiny = (arr < 0) & (arr > -CLAMP_TOL)
        if np.any(tiny):
            log.info("clamping %d marginal %s values to 0", int(tiny.sum()), name)
    return np.where(np.abs(a1) < CLAMP_TOL, 0.0, a1), np.where(np.abs(a2) < CLAMP_TOL, 0.0, a2)


def assemble(triple: kn.KernelTriple, grid: OperatorGrid):
    """Dense matrix of T acting on ``(p, q, w)`` flattened."""
    x1, x2 = grid.x1, grid.x2
    w1, w2 = grid.w1, grid.w2
    s1 = kn.symmetrized_minus(triple.s1, x1[:, None], x1[None, :]) * w1[None, :]
    k12 = kn.symmetrized_minus(triple.k, x1[:, None], x2[None, :]) * w2[None, :]
    s2 = kn.symmetrized_minus(triple.s2, x2[:, None], x2[None, :]) * w2[None, :]
    k21 = kn.symmetrized_minus(triple.k, x2[:, None], x1[None, :]) * w1[None, :]
    a1, a2 = boundary_terms(triple, grid)
    n1, n2 = grid.n1, grid.n2
    M = np.zeros((grid.size, grid.size))
    M[:n1, :n1] = s1
    M[:n1, n1 : n1 + n2] = k12
    M[:n1, -1] = a1
    M[n1 : n1 + n2, :n1] = k21
    M[n1 : n1 + n2, n1 : n1 + n2] = s2
    M[n1 : n1 + n2, -1] = a2
    # w' = int_{L1}^{L2} g(x) dx
    M[-1, :] = w2 @ M[n1 : n1 + n2, :]
    return M


def apply_T(vec: ConeVector, triple: kn.KernelTriple, grid: OperatorGrid, check=True) -> ConeVector:
    if check:
        verdict = check_preconditions(triple, grid.L1, grid.L2, grid)
        if not verdict:
            raise InputError("not-strongly-positive", f"condition ({verdict.failed}) fails at x={verdict.node}")
    return ConeVector.from_flat(assemble(triple, grid) @ vec.flat(), grid)


# -- principal eigenpair --------------------------------------------------------


@dataclass(frozen=True)
class Eigenpair:
    eps: float
    vec: ConeVector
    iterations: int
    residual: float
    grid: OperatorGrid


def principal_eigenpair(triple: kn.KernelTriple, grid: OperatorGrid, tol=1e-10, max_iter=10_000, check=True):
    """Power iteration, max-norm normalised, from the all-ones cone vector.

    Converged when the relative change of the eigenvalue estimate drops below
    ``tol`` and the max-norm residual ``|T v - eps v| / |v|`` is below ``10 tol``.
    """
    if check:
        verdict = check_preconditions(triple, grid.L1, grid.L2, grid)
        if not verdict:
            raise InputError("not-strongly-positive", f"condition ({verdict.failed}) fails at x={verdict.node}")
    M = assemble(triple, grid)
    v = np.ones(grid.size)
    v[0] = 0.0  # p(0) = 0
    lam_old = None
    for it in range(1, max_iter + 1):
        Mv = M @ v
        k = int(np.argmax(np.abs(v)))
        lam = Mv[k] / v[k]
        norm = np.abs(Mv).max()
        if not norm > 0:
            raise NumericalFailure("not-positive", "operator annihilated the iterate")
        v_new = Mv / norm
        if lam_old is not None and abs(lam - lam_old) <= tol * abs(lam):
            resid = np.abs(M @ v_new - lam * v_new).max() / np.abs(v_new).max()
            if resid < 10 * tol:
                if lam <= 0:
                    raise NumericalFailure("not-positive", f"eigenvalue estimate {lam}")
                return Eigenpair(float(lam), ConeVector.from_flat(v_new, grid), it, float(resid), grid)
        lam_old = lam
        v = v_new
    raise NumericalFailure("no-convergence", f"power iteration did not converge in {max_iter} sweeps")


def dense_spectrum(triple: kn.KernelTriple, grid: OperatorGrid):
    """All eigenvalues of the assembled matrix, sorted by decreasing modulus."""
    ev = np.linalg.eigvals(assemble(triple, grid))
    return ev[np.argsort(-np.abs(ev))]


# -- profiles -------------------------------------------------------------------


@dataclass(frozen=True)
class SteadyProfilePair:
    rho1: GridDensity
    rho2: GridDensity
    L1: float
    L2: float
    eps: float
    scale: float

    @property
    def w(self):
        return self.rho1.with_values(self.rho1.values + self.rho2.values)

    @property
    def mass1(self):
        return self.rho1.mass

    @property
    def mass2(self):
        return self.rho2.mass


def _cumtrapz_from_right(vals, h):
    seg = 0.5 * h * (vals[1:] + vals[:-1])
    out = np.zeros_like(vals)
    out[:-1] = np.cumsum(seg[::-1])[::-1]
    return out


def profiles_on_nodes(vec: ConeVector, grid: OperatorGrid):
    """rho2 on the [L1, L2] nodes and rho1 on the [0, L1] nodes (unscaled)."""
    h1 = grid.L1 / (grid.n1 - 1)
    h2 = (grid.L2 - grid.L1) / (grid.n2 - 1)
    rho2 = _cumtrapz_from_right(vec.q, h2)
    wbar = vec.w
    rho1 = wbar + _cumtrapz_from_right(vec.p, h1)
    return rho1, rho2


def reconstruct_profiles(vec: ConeVector, grid: OperatorGrid, mass_total=1.0, eps=float("nan"), out_cells=None):
    """Even profiles on a uniform grid over ``[-L2, L2]``, scaled to ``mass_total``.

    ``rho2(x) = int_x^L2 q``, ``rho1(x) = w + int_x^L1 p``; node values come
    from piecewise-linear interpolation of those integrals.  ``out_cells`` is
    the number of cells across ``[-L2, L2]`` (default ``4 * (n1 + n2)``).
    """
    r1_nodes, r2_nodes = profiles_on_nodes(vec, grid)
    out_cells = out_cells or 4 * (grid.n1 + grid.n2)
    if out_cells % 2:
        out_cells += 1
    x = np.linspace(-grid.L2, grid.L2, out_cells + 1)
    ax = np.abs(x)
    r1 = np.where(ax <= grid.L1, np.interp(ax, grid.x1, r1_nodes), 0.0)
    r2 = np.where((ax >= grid.L1) & (ax <= grid.L2), np.interp(ax, grid.x2, r2_nodes), 0.0)
    # species 2 takes the interface node; species 1 owns the interior
    r1[ax >= grid.L1] = 0.0
    r2[ax < grid.L1] = 0.0
    dx = x[1] - x[0]
    raw = GridDensity(x[0], dx, r1).mass + GridDensity(x[0], dx, r2).mass
    scale = mass_total / raw
    return SteadyProfilePair(GridDensity(x[0], dx, scale * r1), GridDensity(x[0], dx, scale * r2), grid.L1, grid.L2, eps, scale)


def steady_state(triple: kn.KernelTriple, L1, L2, n1=64, n2=64, mass_total=1.0, tol=1e-10):
    grid = OperatorGrid(L1, L2, n1, n2)
    pair = principal_eigenpair(triple, grid, tol)
    return pair, reconstruct_profiles(pair.vec, grid, mass_total, pair.eps)


def stationarity_residual(profile: SteadyProfilePair, triple: kn.KernelTriple, pad_cells=0):
    """Relative spread of ``eps w - S1*rho1 - K*rho2`` on (-L1, L1) and of the
    species-2 analogue on ``L1 < |x| < L2``.

    The profiles are extended by zeros so that the convolutions see the full
    supports; each spread is divided by the absolute mean of its potential.
    """
    r1, r2 = profile.rho1, profile.rho2
    if pad_cells:
        z = np.zeros(pad_cells)
        r1 = GridDensity(r1.x0 - pad_cells * r1.dx, r1.dx, np.concatenate((z, r1.values, z)))
        r2 = GridDensity(r2.x0 - pad_cells * r2.dx, r2.dx, np.concatenate((z, r2.values, z)))
    x = r1.x
    ax = np.abs(x)
    tol = 1e-9 * profile.L2
    inner = ax < profile.L1 - tol
    outer = (ax > profile.L1 + tol) & (ax < profile.L2 - tol)
    pot1 = energy.potential(r1, r2, triple, profile.eps, 1)[inner]
    pot2 = energy.potential(r1, r2, triple, profile.eps, 2)[outer]
    return float(np.ptp(pot1) / abs(pot1.mean())), float(np.ptp(pot2) / abs(pot2.mean()))


# -- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class EpsMapRow:
    L1: float
    L2: float
    eps: float


def eps_map(triple: kn.KernelTriple, L2_values, L1_fraction=0.5, n1=64, n2=64, tol=1e-10) -> List[EpsMapRow]:
    rows = []
    for L2 in L2_values:
        L1 = L1_fraction * L2
        pair = principal_eigenpair(triple, OperatorGrid(L1, L2, n1, n2), tol)
        rows.append(EpsMapRow(L1, L2, pair.eps))
    return rows


def monotone_increasing(rows: List[EpsMapRow]):
    eps = [r.eps for r in sorted(rows, key=lambda r: r.L2)]
    return all(b > a for a, b in zip(eps, eps[1:]))
