import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from segregation import diagnostics as dg
from segregation import kernels as kn
from segregation.grid import GridDensity

from conftest import triangle


def g(vals, dx=0.1):
    return GridDensity(0.0, dx, np.asarray(vals, dtype=float))


def test_overlap_with_itself_is_mass():
    r = triangle()
    assert dg.overlap(r, r) == pytest.approx(r.mass, abs=1e-15)


@given(st.lists(st.floats(0, 5), min_size=3, max_size=30))
def test_overlap_symmetric_and_bounded(vals):
    a = g(vals)
    b = g(vals[::-1])
    assert dg.overlap(a, b) == dg.overlap(b, a)
    assert dg.overlap(a, b) <= min(a.mass, b.mass) + 1e-12


def test_disjoint_overlap_zero():
    assert dg.overlap(g([1, 1, 0, 0, 0]), g([0, 0, 0, 1, 1])) == 0.0


def test_two_separated_bumps():
    vals = np.concatenate([np.ones(5), np.zeros(10), np.ones(5)])
    count, length, iv = dg.support_components(g(vals))
    assert count == 2 and length == pytest.approx(1.0)
    assert iv[0] == pytest.approx((0.0, 0.4)) and iv[1] == pytest.approx((1.5, 1.9))


def test_single_cell_gap_merged():
    vals = [1, 1, 0, 1, 1]
    assert dg.support_components(g(vals))[0] == 1


@given(st.floats(1e-3, 1e3))
def test_support_scale_invariant(c):
    vals = np.array([0, 1, 2, 0, 0, 0, 3, 1e-9, 0])
    a = dg.support_components(g(vals))
    b = dg.support_components(g(c * vals))
    assert a[0] == b[0] and a[2] == b[2]


def test_empty_support():
    assert dg.support_components(g(np.zeros(5))) == (0, 0.0, [])


def test_center_of_mass():
    assert dg.center_of_mass(triangle(0.7)) == pytest.approx(0.7, abs=1e-12)


def test_zeta_fraction_extremes():
    a, b = g([0, 1, 1, 0, 0, 0]), g([0, 0, 0, 0, 1, 0])
    assert dg.zeta_mass_fraction(a, b) == 1.0
    assert dg.zeta_mass_fraction(a, a) == 0.0


def test_metrics_row_and_verdicts():
    t = kn.KernelTriple.multiples(1.0, 1.0)
    a, b = g([0, 1, 1, 0, 0, 0, 0]), g([0, 0, 0, 1, 1, 0, 0])
    row = dg.metrics(a, b, t, 1.0, t=0.5)
    assert row.header() == ["t", "mass1", "mass2", "com", "variance", "overlap", "support_len_w", "n_components_w", "zeta_mass_fraction", "energy"]
    assert len(row.values()) == len(row.header())
    assert row.t == 0.5 and row.n_components_w == 1
    assert dg.verdict(row) == "segregated"
    assert dg.verdict(dg.metrics(a, a, t, 1.0)) == "mixing"
    assert dg.adjacent_intervals(a, b)


def test_adjacent_intervals_rejects_gap():
    a, b = g([1, 1, 0, 0, 0, 0, 0, 0]), g([0, 0, 0, 0, 0, 0, 1, 1])
    assert not dg.adjacent_intervals(a, b)
