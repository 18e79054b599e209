import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segregation import energy
from segregation import kernels as kn
from segregation import transport as tr
from segregation.errors import InputError, NumericalFailure
from segregation.grid import GridDensity

from conftest import triangle


def uniform01(n=1001):
    return GridDensity(0.0, 1.0 / (n - 1), np.ones(n))


# -- atomization ---------------------------------------------------------------


def test_atomize_sup_uniform():
    assert np.allclose(tr.atomize(uniform01(), 4), [0.25, 0.5, 0.75, 1.0], atol=1e-12)


def test_atomize_sup_triangle():
    x = tr.atomize(triangle(0.0, 1.0, n=2001), 2)
    assert np.allclose(x, [0.0, 1.0], atol=1e-3)


def test_atomize_midpoint_uniform():
    assert np.allclose(tr.atomize(uniform01(), 4, "midpoint"), [0.125, 0.375, 0.625, 0.875], atol=1e-12)


def test_atomize_midpoint_keeps_symmetry():
    x = tr.atomize(triangle(0.0, 1.0), 50, "midpoint")
    assert np.allclose(x, -x[::-1], atol=1e-9)


def test_atomize_errors():
    with pytest.raises(InputError) as e:
        tr.atomize(GridDensity(0.0, 0.1, np.zeros(11)), 4)
    assert e.value.code == "empty-density"
    with pytest.raises(InputError):
        tr.atomize(uniform01(), 1)


@given(st.integers(2, 200))
def test_atomize_quantiles_of_uniform(n):
    rho = uniform01(2001)
    x = tr.atomize(rho, n, "midpoint")
    assert np.all(np.diff(x) > 0)
    assert np.allclose(x, (np.arange(1, n + 1) - 0.5) / n, atol=rho.dx)


# -- reconstruction ---------------------------------------------------------------


def test_equispaced_reconstruction_is_constant():
    n = 11
    x = np.linspace(0, 1, n)
    st_ = tr.ParticleState(x, x + 5.0)
    edges, heights = tr.block_density(st_.u, st_.m1)
    assert np.allclose(heights, st_.m1 / 0.1)
    assert np.sum(heights * np.diff(edges)) == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=40, unique=True), st.floats(0.2, 3.0))
def test_reconstruction_conserves_mass(pts, mass):
    u = np.sort(np.asarray(pts))
    if np.diff(u).min() < 1e-3:
        return
    st_ = tr.ParticleState(u, u, mass, mass)
    rho = tr.reconstruct(st_, 1, tr.snapshot_grid(st_, n=1601))
    assert rho.mass == pytest.approx(mass, abs=1e-12)


def test_atomize_reconstruct_roundtrip():
    rho = uniform01(2001)
    x = tr.atomize(rho, 20, "midpoint")
    st_ = tr.ParticleState(x, x)
    back = tr.reconstruct(st_, 1, (rho.x0, rho.dx, rho.n))
    assert np.allclose(tr.atomize(back, 20, "midpoint"), x, atol=rho.dx)


def test_zeta_bounds_and_segregated_values():
    a = GridDensity(0.0, 0.1, [0, 1, 1, 0, 0, 0])
    b = GridDensity(0.0, 0.1, [0, 0, 0, 0, 2, 0])
    w, z = tr.zeta_transform(a, b)
    assert np.allclose(w.values, [0, 1, 1, 0, 2, 0])
    assert np.allclose(z, [0, 1, 1, 0, -1, 0])


# -- velocities --------------------------------------------------------------------


def random_state(seed, n=8):
    rng = np.random.default_rng(seed)
    u = np.sort(rng.uniform(-1, 1, n)) + np.arange(n) * 0.05
    v = np.sort(rng.uniform(-1, 1, n)) + np.arange(n) * 0.05
    return tr.ParticleState(u, v, 1.0, 0.7)


@pytest.mark.parametrize("tabulated", [False, True])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_rhs_is_gradient_of_discrete_energy(seed, tabulated, fig1_triple):
    triple = fig1_triple
    if tabulated:
        triple = kn.KernelTriple(*(kn.tabulate(g, n=8001) for g in (triple.s1, triple.s2, triple.k)))
    st_ = random_state(seed)
    p = tr.ReconstructionParams(0.3)
    eps = 0.8
    du, dv = tr.rhs(st_, triple, eps, p)
    h = 1e-6
    for which, vel, m in ((0, du, st_.m1), (1, dv, st_.m2)):
        for i in range(st_.n):
            e = np.zeros(st_.n)
            e[i] = h
            dd = (e, 0 * e) if which == 0 else (0 * e, e)
            ep = energy.discrete_energy(st_.moved(*dd, 0.0), triple, eps, p)
            em = energy.discrete_energy(st_.moved(-dd[0], -dd[1], 0.0), triple, eps, p)
            grad = (ep - em) / (2 * h)
            assert vel[i] == pytest.approx(-grad / m, rel=1e-5, abs=1e-6)


def test_momentum_balance(fig1_triple):
    st_ = random_state(3, n=30)
    du, dv = tr.rhs(st_, fig1_triple, 1.0, tr.ReconstructionParams(0.1))
    assert abs(st_.m1 * du.sum() + st_.m2 * dv.sum()) < 1e-10


def test_diffusion_only_interior_formula():
    x = np.array([0.0, 0.1, 0.3, 0.6])
    st_ = tr.ParticleState(x, x + 100.0)
    z = kn.Kernel(amplitude=0.0)
    du, _ = tr.rhs(st_, kn.KernelTriple(z, z, z), 2.0, tr.ReconstructionParams(0.01))
    m = 0.25
    g = np.diff(x)
    expect = [-g[0] ** -2, g[0] ** -2 - g[1] ** -2, g[1] ** -2 - g[2] ** -2, g[2] ** -2]
    assert np.allclose(du, 2.0 * m / 2 * np.array(expect), rtol=1e-12)


def test_collision_detected(fig1_triple):
    st_ = tr.ParticleState(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 2.0]))
    with pytest.raises(NumericalFailure) as e:
        tr.rhs(st_, fig1_triple, 1.0, tr.ReconstructionParams(0.1))
    assert e.value.code == "particle-collision"


def test_step_stiff_blowup(fig1_triple):
    st_ = tr.ParticleState(np.array([0.0, 1e-9, 1.0]), np.array([0.0, 1.0, 2.0]))
    with pytest.raises(NumericalFailure) as e:
        tr.step(st_, fig1_triple, 1.0, tr.ReconstructionParams(0.1), 1e-3, dt_min=1e-6, gap_min=1e-10)
    assert e.value.code == "stiff-blowup"


def test_step_rejects_nonpositive_dt(fig1_triple):
    with pytest.raises(InputError):
        tr.step(random_state(0), fig1_triple, 1.0, tr.ReconstructionParams(0.1), 0.0)


def test_default_bandwidth():
    st_ = tr.ParticleState(np.linspace(0, 1, 11), np.linspace(0, 2, 11))
    assert tr.ReconstructionParams.default_for(st_).h == pytest.approx(2 * 0.5 * (0.1 + 0.2))


# -- trajectories -------------------------------------------------------------------


@pytest.fixture(scope="module")
def short_run():
    triple = kn.KernelTriple.multiples(10.0, 1.5)
    u = tr.atomize(triangle(-1.0, 1.0), 20, "midpoint")
    v = tr.atomize(triangle(1.0, 1.0), 20, "midpoint")
    return triple, tr.integrate(tr.ParticleState(u, v), triple, 1.0, 0.3, snapshot_every=0.1)


def test_snapshots_hit_requested_times(short_run):
    _, traj = short_run
    assert [s.t for s in traj.snapshots] == pytest.approx([0.0, 0.1, 0.2, 0.3], abs=1e-12)


def test_ordering_and_energy_along_run(short_run):
    _, traj = short_run
    assert all(traj.ordered)
    e = np.diff(traj.energies)
    assert np.all(e <= 1e-10)


def test_center_of_mass_conserved(short_run):
    _, traj = short_run
    com = [s.m1 * s.u.sum() + s.m2 * s.v.sum() for s in traj.snapshots]
    assert np.ptp(com) < 1e-10


def test_symmetric_data_stay_symmetric():
    triple = kn.KernelTriple.multiples(10.0, 1.5)
    x = tr.atomize(triangle(), 16, "midpoint")
    traj = tr.integrate(tr.ParticleState(x, x), triple, 1.0, 0.1)
    s = traj.final
    assert np.allclose(s.u, -s.u[::-1], atol=1e-10)
    assert np.allclose(s.v, -s.v[::-1], atol=1e-10)


def test_zero_time_is_identity(fig1_triple):
    st_ = random_state(5)
    traj = tr.integrate(st_, fig1_triple, 1.0, 0.0)
    assert traj.final is st_
