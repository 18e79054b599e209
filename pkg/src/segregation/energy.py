"""Free energy of a density pair, its Gateaux derivatives, and the
Fourier-side coercivity test.

    F[rho1, rho2] = eps/2 int (rho1 + rho2)^2 - 1/2 int rho1 S1*rho1
                    - 1/2 int rho2 S2*rho2 - int rho1 K*rho2

All integrals use the trapezoid rule on the shared grid; convolutions are
direct O(n^2) sums (``numpy.convolve``), so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels as kn
from .errors import InputError
from .grid import trapezoid_weights

MASS_NEUTRAL_TOL = 1e-10
MARGINAL_TOL = 1e-12


def _grid_ok(*fs):
    first = fs[0]
    for f in fs[1:]:
        if not first.same_grid(f):
            raise InputError("grid-mismatch", "functions live on different grids")


def _integral(values, dx):
    v = np.asarray(values, dtype=float)
    return float(np.dot(trapezoid_weights(v.size, dx), v))


def convolve(kernel: kn.Kernel, f):
    """``(G * f)(x_k) = sum_l w_l G(x_k - x_l) f_l`` with trapezoid weights ``w``."""
    vals = np.asarray(f.values, dtype=float)
    n = vals.size
    offsets = f.dx * np.arange(-(n - 1), n)
    g = kn.eval(kernel, offsets)
    full = np.convolve(vals * trapezoid_weights(n, f.dx), g)
    return full[n - 1 : 2 * n - 1]


def interaction(kernel: kn.Kernel, a, b):
    """``int a (G * b) dx``."""
    _grid_ok(a, b)
    return _integral(np.asarray(a.values) * convolve(kernel, b), a.dx)


def free_energy(rho1, rho2, triple: kn.KernelTriple, eps):
    _grid_ok(rho1, rho2)
    r1 = np.asarray(rho1.values, dtype=float)
    r2 = np.asarray(rho2.values, dtype=float)
    dx = rho1.dx
    diffusion = 0.5 * eps * _integral((r1 + r2) ** 2, dx)
    return (
        diffusion
        - 0.5 * interaction(triple.s1, rho1, rho1)
        - 0.5 * interaction(triple.s2, rho2, rho2)
        - interaction(triple.k, rho1, rho2)
    )


def potential(rho1, rho2, triple: kn.KernelTriple, eps, which=1):
    """First variation ``eps (rho1 + rho2) - S_i * rho_i - K * rho_j`` on the grid."""
    _grid_ok(rho1, rho2)
    w = np.asarray(rho1.values) + np.asarray(rho2.values)
    if which == 1:
        return eps * w - convolve(triple.s1, rho1) - convolve(triple.k, rho2)
    if which == 2:
        return eps * w - convolve(triple.s2, rho2) - convolve(triple.k, rho1)
    raise InputError("domain", f"species must be 1 or 2, got {which!r}")


def _check_neutral(*fs):
    for f in fs:
        if abs(f.mass) > MASS_NEUTRAL_TOL:
            raise InputError("not-mass-neutral", f"direction carries mass {f.mass:.3e}")


def gateaux_first(rho1, rho2, triple, eps, direction, which=1):
    """``dF/drho_i [rho1, rho2](direction)`` for a mass-neutral direction."""
    _grid_ok(rho1, rho2, direction)
    _check_neutral(direction)
    pot = potential(rho1, rho2, triple, eps, which)
    return _integral(np.asarray(direction.values) * pot, rho1.dx)


@dataclass(frozen=True)
class HessianQuad:
    h11: float
    h12: float
    h22: float

    @property
    def h21(self):
        return self.h12

    @property
    def det(self):
        return self.h11 * self.h22 - self.h12**2

    def as_matrix(self):
        return np.array([[self.h11, self.h12], [self.h12, self.h22]])


def gateaux_second(triple: kn.KernelTriple, eps, mu, nu) -> HessianQuad:
    """Second variation; independent of the base point since F is quadratic."""
    _grid_ok(mu, nu)
    _check_neutral(mu, nu)
    a = np.asarray(mu.values, dtype=float)
    b = np.asarray(nu.values, dtype=float)
    dx = mu.dx
    h11 = eps * _integral(a * a, dx) - interaction(triple.s1, mu, mu)
    h12 = eps * _integral(a * b, dx) - interaction(triple.k, mu, nu)
    h22 = eps * _integral(b * b, dx) - interaction(triple.s2, nu, nu)
    return HessianQuad(h11, h12, h22)


# -- coercivity -----------------------------------------------------------------


@dataclass(frozen=True)
class CoercivityVerdict:
    """``coercive`` plus the first failing frequency, if any.

    ``condition`` is ``"i"`` or ``"ii"`` for a violation; ``lhs``/``rhs`` are
    the two sides of that condition at ``witness`` (for a coercive verdict,
    condition (ii) at the frequency of smallest margin).
    """

    coercive: bool
    witness: Optional[float]
    lhs: float
    rhs: float
    condition: Optional[str] = None
    marginal: bool = False

    @property
    def label(self):
        return "coercive" if self.coercive else "not-coercive"

    def csv_line(self):
        xi = "" if self.witness is None else f"{self.witness:.12g}"
        tag = self.label + ("(marginal)" if self.marginal else "")
        return f"{tag},{xi},{self.lhs:.12g},{self.rhs:.12g}"


def coercivity_check(triple: kn.KernelTriple, eps, xi_max=None, n_xi=2001) -> CoercivityVerdict:
    """Check (i) eps > max(S1^, S2^) and (ii) (eps-S1^)(eps-S2^) > (eps-K^)^2 on [0, xi_max].

    (ii) is evaluated in the expanded form
    ``eps (2K^ - S1^ - S2^) + S1^ S2^ - K^2``, which stays accurate where all
    transforms are tiny.  A difference within ``1e-12`` of the size of its
    terms counts as equality, i.e. a (marginal) violation.
    """
    if xi_max is None:
        xi_max = 10.0 / triple.min_width
    if not xi_max > 0 or n_xi < 2:
        raise InputError("domain", "need xi_max > 0 and n_xi >= 2")
    xi = np.linspace(0.0, xi_max, n_xi)
    s1 = kn.fourier(triple.s1, xi)
    s2 = kn.fourier(triple.s2, xi)
    kh = kn.fourier(triple.k, xi)
    lhs = (eps - s1) * (eps - s2)
    rhs = (eps - kh) ** 2

    bad_i = np.nonzero(~(eps > np.maximum(s1, s2)))[0]
    if bad_i.size:
        j = bad_i[0]
        return CoercivityVerdict(False, float(xi[j]), float(eps), float(max(s1[j], s2[j])), "i")

    terms = [eps * 2 * kh, eps * s1, eps * s2, s1 * s2, kh * kh]
    diff = eps * (2 * kh - s1 - s2) + s1 * s2 - kh * kh
    scale = np.sum(np.abs(terms), axis=0)
    marginal = np.abs(diff) <= MARGINAL_TOL * scale
    bad_ii = np.nonzero((diff <= 0) | marginal)[0]
    if bad_ii.size:
        j = bad_ii[0]
        return CoercivityVerdict(False, float(xi[j]), float(lhs[j]), float(rhs[j]), "ii", bool(marginal[j]))
    j = int(np.argmin(diff / np.where(scale > 0, scale, 1.0)))
    return CoercivityVerdict(True, float(xi[j]), float(lhs[j]), float(rhs[j]))


# -- particle energy ------------------------------------------------------------


def discrete_energy(state, triple: kn.KernelTriple, eps, params=None):
    """Energy whose particle gradient flow is :func:`segregation.transport.rhs`.

    Diffusion: ``eps/2`` times the exact integral of the squared
    piecewise-constant density ``m / gap`` between consecutive particles of each
    species, plus ``eps m1 m2 sum_ij phi_h(u_i - v_j)`` for the mixed part of
    ``(rho1 + rho2)^2`` (``phi_h`` the Gaussian mollifier of the cross term).
    Interaction: the usual double sums, self-pairs included.
    """
    from .transport import ReconstructionParams

    state.check_ordered(0.0)
    params = params or ReconstructionParams.default_for(state)
    u, v = state.u, state.v
    m1, m2 = state.m1, state.m2
    h = params.h
    diff_u = m1 * m1 * np.sum(1.0 / np.diff(u))
    diff_v = m2 * m2 * np.sum(1.0 / np.diff(v))
    duv = u[:, None] - v[None, :]
    mixed = m1 * m2 * np.sum(np.exp(-0.5 * (duv / h) ** 2)) / (h * kn.SQRT_2PI)
    e_diff = 0.5 * eps * (diff_u + diff_v) + eps * mixed
    e_s1 = 0.5 * m1 * m1 * np.sum(kn.eval(triple.s1, u[:, None] - u[None, :]))
    e_s2 = 0.5 * m2 * m2 * np.sum(kn.eval(triple.s2, v[:, None] - v[None, :]))
    e_k = m1 * m2 * np.sum(kn.eval(triple.k, duv))
    return float(e_diff - e_s1 - e_s2 - e_k)
