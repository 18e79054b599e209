"""Segregation, support and conservation metrics."""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from . import energy
from .grid import GridDensity, check_grids, trapezoid

ZETA_LEVEL = 0.9
OVERLAP_FRACTION = 0.05
ZETA_FRACTION = 0.9


def overlap(rho1: GridDensity, rho2: GridDensity) -> float:
    """Trapezoid integral of ``min(rho1, rho2)``."""
    check_grids(rho1, rho2)
    return trapezoid(np.minimum(rho1.values, rho2.values), rho1.dx)


def support_components(rho: GridDensity, floor=None, rel_floor=1e-8):
    """Connected pieces of ``{rho > floor}``.

    ``floor`` defaults to ``rel_floor * max(rho)``.  Runs separated by a single
    sub-floor cell are merged.  Returns ``(count, total_length, intervals)``
    where each interval is ``(x_left, x_right)`` of the outermost nodes in the run.
    """
    vals = rho.values
    peak = float(vals.max()) if vals.size else 0.0
    if peak <= 0:
        return 0, 0.0, []
    if floor is None:
        floor = rel_floor * peak
    above = vals > floor
    idx = np.flatnonzero(above)
    runs = []
    start = prev = idx[0]
    for k in idx[1:]:
        if k - prev > 2:
            runs.append((start, prev))
            start = k
        prev = k
    runs.append((start, prev))
    x = rho.x
    intervals = [(float(x[a]), float(x[b])) for a, b in runs]
    length = float(sum((b - a + 1) * rho.dx for a, b in runs))
    return len(runs), length, intervals


def center_of_mass(rho: GridDensity) -> float:
    return trapezoid(rho.x * rho.values, rho.dx) / rho.mass


def zeta_mass_fraction(rho1: GridDensity, rho2: GridDensity, level=ZETA_LEVEL) -> float:
    """Fraction of the mass of ``w`` sitting where ``|zeta| > level``."""
    from .transport import zeta_transform

    w, zeta = zeta_transform(rho1, rho2)
    if w.mass <= 0:
        return 0.0
    return trapezoid(w.values * (np.abs(zeta) > level), w.dx) / w.mass


@dataclass(frozen=True)
class MetricsRow:
    t: float
    mass1: float
    mass2: float
    com: float
    variance: float
    overlap: float
    support_len_w: float
    n_components_w: int
    zeta_mass_fraction: float
    energy: float

    @classmethod
    def header(cls):
        return [f.name for f in fields(cls)]

    def values(self):
        return astuple(self)

    @property
    def segregated(self):
        return is_segregated(self)


def metrics(rho1: GridDensity, rho2: GridDensity, triple, eps, t=0.0, energy_value=None) -> MetricsRow:
    """All metrics for one pair of grid densities.

    ``energy_value`` overrides the grid free energy (the particle energy is
    used for trajectory summaries).
    """
    check_grids(rho1, rho2)
    w = rho1.with_values(rho1.values + rho2.values)
    com = center_of_mass(w)
    var = trapezoid((w.x - com) ** 2 * w.values, w.dx) / w.mass
    count, length, _ = support_components(w)
    e = energy.free_energy(rho1, rho2, triple, eps) if energy_value is None else energy_value
    return MetricsRow(
        float(t),
        rho1.mass,
        rho2.mass,
        float(com),
        float(var),
        overlap(rho1, rho2),
        length,
        count,
        zeta_mass_fraction(rho1, rho2),
        float(e),
    )


def is_segregated(row: MetricsRow) -> bool:
    """Overlap below 5% of the smaller mass and > 90% of w where |zeta| > 0.9."""
    return row.overlap < OVERLAP_FRACTION * min(row.mass1, row.mass2) and row.zeta_mass_fraction > ZETA_FRACTION


def is_mixing(row: MetricsRow) -> bool:
    return row.overlap > 0.5 * min(row.mass1, row.mass2)


def verdict(row: MetricsRow) -> str:
    if is_segregated(row):
        return "segregated"
    if is_mixing(row):
        return "mixing"
    return "partial"


def adjacent_intervals(rho1: GridDensity, rho2: GridDensity, tol_cells=2):
    """True when each species occupies one interval, the two are disjoint up to
    ``tol_cells`` of shared edge, and their union is connected within ``tol_cells``."""
    n1, _, iv1 = support_components(rho1)
    n2, _, iv2 = support_components(rho2)
    if n1 != 1 or n2 != 1:
        return False
    (a1, b1), (a2, b2) = iv1[0], iv2[0]
    if a1 > a2:
        (a1, b1), (a2, b2) = (a2, b2), (a1, b1)
    tol = tol_cells * rho1.dx
    disjoint_enough = b1 - a2 <= tol
    connected = a2 - b1 <= tol
    return bool(disjoint_enough and connected)
