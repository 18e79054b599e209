import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segregation import asymptotic as asy
from segregation import kernels as kn
from segregation.errors import InputError


def test_pinned_case():
    mu, lam = asy.solve_mu_lambda(1.5, 1.5, 0.5)
    roots = np.roots([1.0, 0.0, -3.0, 1.0])
    oracle = min(r.real for r in roots if 0 < r.real < 1)
    assert mu == pytest.approx(0.347296, abs=1e-6)
    assert mu == pytest.approx(oracle, abs=1e-12)
    assert lam == pytest.approx(1.0, abs=1e-12)


def test_constants_closed_form():
    t = kn.KernelTriple.multiples(2.0, 0.5)
    c1, c2 = asy.constants(t, 0.5)
    k2 = 1 / np.sqrt(2 * np.pi)
    assert c1 == pytest.approx(k2 * (2 * 0.5 + 0.5), rel=1e-14)
    assert c2 == pytest.approx(k2 * (0.5 * 0.5 + 0.5), rel=1e-14)


def test_flat_kernel_rejected():
    z = kn.Kernel(amplitude=0.0)
    with pytest.raises(InputError) as e:
        asy.constants(kn.KernelTriple(z, z, z), 0.5)
    assert e.value.code == "flat-kernel"


@pytest.mark.parametrize("z1", [0.0, 1.0, -0.1])
def test_z1_domain(z1):
    with pytest.raises(InputError):
        asy.solve_mu_lambda(1.0, 1.0, z1)


@settings(max_examples=64, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0), st.floats(0.02, 0.98))
def test_cubic_residuals_small(c1, c2, z1):
    mu, lam = asy.solve_mu_lambda(c1, c2, z1)
    r1, r2 = asy.cubic_residuals(mu, lam, c1, c2, z1)
    assert 0 < mu < lam
    assert abs(r1) < 1e-12 and abs(r2) < 1e-12


def test_lambda_tilde_real_cube_root():
    # negative radicand stays real
    assert asy.lambda_tilde(2.0, 10.0, 1.0) == pytest.approx(-np.cbrt(-(1.5 + -9 * 8)), rel=1e-14)


@pytest.fixture(scope="module")
def sol():
    return asy.solve(kn.KernelTriple.multiples(2.0, 0.5), 0.5, 1e-3)


def test_masses(sol):
    assert sol.rho1.mass == pytest.approx(0.5, abs=1e-6)
    assert sol.rho2.mass == pytest.approx(0.5, abs=1e-6)


def test_continuity_at_interface(sol):
    x = sol.interface
    assert sol.rho1_at(x) == pytest.approx(sol.rho2_at(x), rel=1e-14)
    m, lam = sol.mu, sol.lam
    assert asy.rho1_scaled(m, sol.C1, sol.C2, m, lam) == asy.rho2_scaled(m, sol.C2, m, lam)


def test_profiles_even_and_disjoint(sol):
    assert np.allclose(sol.rho1.values, sol.rho1.values[::-1], atol=1e-12)
    ax = np.abs(sol.rho1.x)
    assert np.all(sol.rho2.values[ax + 0.5 * sol.rho1.dx < sol.interface] == 0)
    assert np.all(sol.rho1.values[ax - 0.5 * sol.rho1.dx > sol.interface] == 0)


def test_support_scaling(sol):
    assert sol.delta == pytest.approx(0.1, rel=1e-12)
    assert sol.outer_edge == pytest.approx(0.1 * sol.lam, rel=1e-12)


def test_grid_too_coarse():
    c1, c2 = 1.5, 1.5
    mu, lam = asy.solve_mu_lambda(c1, c2, 0.5)
    with pytest.raises(InputError) as e:
        asy.build_profiles(c1, c2, 0.5, mu, lam, 1e-3, grid=(-0.2, 0.01, 41))
    assert e.value.code == "grid-resolution"


def test_inner_species_has_larger_constant():
    c1, c2 = asy.constants(kn.KernelTriple.multiples(2.0, 0.5), 0.5)
    assert c2 < c1


def test_criticality_small_eps():
    t = kn.KernelTriple.multiples(2.0, 0.5)
    rep = asy.criticality_check(asy.solve(t, 0.5, 1e-4), t, 1e-4)
    assert rep.asserted and rep.ok
