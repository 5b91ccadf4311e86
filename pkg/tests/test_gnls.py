import warnings

import numpy as np
import pytest

from smframe import geometry as geo
from smframe import presets
from smframe.errors import CFLViolation, InvalidStep, SmframeError
from smframe.field import Grid, integrate, spectral_derivative
from smframe.gnls import (GnlsState, check_cfl, connection_from_coordinates,
                          gnls_dissipation, gnls_mass, gnls_state_from_map,
                          gnls_step, nls1d_energy, nls1d_mass, nls1d_step,
                          parabolic_gnls_step)
from smframe.gauge import best_reference_frame, compatibility_residual


def test_check_cfl():
    g = Grid((64,), (2 * np.pi,))
    with pytest.raises(InvalidStep):
        check_cfl(g, 0.0)
    with pytest.warns(CFLViolation):
        check_cfl(g, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_cfl(g, 1e-5)


def test_nls1d_plane_wave_closed_form():
    # constant data has no dispersion: q(t) = c exp(i kappa c^2 t / 2)
    g = Grid((64,), (2 * np.pi,))
    for kappa in (1, -1):
        q = presets.plane_wave(g, 1.5)
        for _ in range(100):
            q = nls1d_step(g, q, 1e-3, kappa)
        expect = 1.5 * np.exp(1j * kappa * 1.5**2 * 0.1 / 2.0)
        assert np.max(np.abs(q - expect)) < 1e-12


def test_nls1d_soliton_and_mass_exactness():
    g = Grid((256,), (20 * np.pi,))
    q = presets.soliton(g, 2.0)
    m0 = nls1d_mass(g, q)
    e0 = nls1d_energy(g, q, 1)
    t = 0.0
    for _ in range(100):
        q = nls1d_step(g, q, 1e-3, 1)
        t += 1e-3
    exact = presets.soliton(g, 2.0) * np.exp(1j * t)
    # limited by the spatial truncation of the sech tail at N = 256
    assert np.max(np.abs(q - exact)) < 1e-8
    assert abs(nls1d_mass(g, q) - m0) < 1e-12 * m0
    assert abs(nls1d_energy(g, q, 1) - e0) < 1e-9


def test_nls1d_rejects_bad_step():
    g = Grid((64,), (2 * np.pi,))
    with pytest.raises(InvalidStep):
        nls1d_step(g, np.zeros(64, complex), -1e-3, 1)


def test_connection_is_zero_in_1d():
    g = Grid((64,), (2 * np.pi,))
    a = connection_from_coordinates(geo.SPHERE, g, (np.ones(64, complex),))
    assert np.max(np.abs(a[0])) == 0.0


def test_connection_solves_curl_equation_2d():
    g = Grid((128, 128), (8 * np.pi, 8 * np.pi))
    u = presets.sphere_bump_2d(g, 0.5, 1.0)
    st = gnls_state_from_map(geo.SPHERE, g, u, best_reference_frame(geo.SPHERE, u))
    a = st.connection()
    f12 = geo.curvature_f(geo.SPHERE, st.q[0], st.q[1])
    curl = spectral_derivative(g, a[1], 0) - spectral_derivative(g, a[0], 1)
    assert np.max(np.abs(curl - f12)) < 1e-10
    div = spectral_derivative(g, a[0], 0) + spectral_derivative(g, a[1], 1)
    assert np.max(np.abs(div)) < 1e-12
    for ak in a:
        assert abs(np.mean(ak)) < 1e-14


def test_gnls_1d_matches_scalar_nls():
    # in the 1D zero-connection gauge the system must reduce to cubic NLS
    g = Grid((256,), (20 * np.pi,))
    q0 = presets.soliton(g, 2.0)
    state = GnlsState(grid=g, target=geo.SPHERE, time=0.0, q=(q0,))
    qs = q0.copy()
    dt = 1e-4
    for _ in range(50):
        state = gnls_step(state, dt, use_dealias=False)
        qs = nls1d_step(g, qs, dt, 1)
    assert np.max(np.abs(state.q[0] - qs)) < 1e-9


def test_gnls_conserves_mass_2d():
    g = Grid((64, 64), (8 * np.pi, 8 * np.pi))
    u = presets.sphere_bump_2d(g, 0.5, 1.4)
    st = gnls_state_from_map(geo.SPHERE, g, u, best_reference_frame(geo.SPHERE, u))
    m0 = gnls_mass(st)
    for _ in range(20):
        st = gnls_step(st, 5e-5)
    assert abs(gnls_mass(st) - m0) < 1e-10 * m0
    assert st.time == pytest.approx(20 * 5e-5)


def test_parabolic_step_is_exact_on_linear_part():
    # with the coupling terms disabled the scheme must integrate
    # dq/dt = mu q_xx exactly (integrating-factor property)
    g = Grid((64,), (2 * np.pi,))
    eps = 0.3
    mu = (eps + 1j) / (1.0 + eps**2)
    x = g.axis_coord(0)
    q = np.exp(2j * x) + 0.5 * np.exp(-3j * x)
    st = GnlsState(grid=g, target=geo.HYPERBOLIC, time=0.0, q=(q,))
    dt = 1e-2
    st = parabolic_gnls_step(st, dt, eps, include_nonlinear=False)
    expect = (np.exp(2j * x) * np.exp(-mu * 4 * dt)
              + 0.5 * np.exp(-3j * x) * np.exp(-mu * 9 * dt))
    assert np.max(np.abs(st.q[0] - expect)) < 1e-13


def test_parabolic_energy_never_increases():
    g = Grid((64,), (8 * np.pi,))
    q = presets.random_bandlimited(g, 6, 0.3, 11)
    st = GnlsState(grid=g, target=geo.HYPERBOLIC, time=0.0, q=(q,))
    masses = [gnls_mass(st)]
    for _ in range(50):
        st = parabolic_gnls_step(st, 1e-4, 0.1)
        masses.append(gnls_mass(st))
    assert all(b <= a for a, b in zip(masses, masses[1:]))
    assert gnls_dissipation(st) >= 0.0


def test_parabolic_step_validates_arguments():
    g = Grid((64,), (2 * np.pi,))
    st = GnlsState(grid=g, target=geo.HYPERBOLIC, time=0.0,
                   q=(np.zeros(64, complex),))
    with pytest.raises(InvalidStep):
        parabolic_gnls_step(st, -1.0, 0.1)
    with pytest.raises(InvalidStep):
        parabolic_gnls_step(st, 1e-4, 0.0)
    with pytest.raises(InvalidStep):
        parabolic_gnls_step(st, 1e-4, 2.0)


def test_seeding_from_map_is_compatible():
    g = Grid((128, 128), (8 * np.pi, 8 * np.pi))
    u = presets.sphere_bump_2d(g, 0.5, 1.0)
    st = gnls_state_from_map(geo.SPHERE, g, u, best_reference_frame(geo.SPHERE, u))
    rep = compatibility_residual(geo.SPHERE, g, st.coordinates(),
                                 st.connection_field())
    assert rep.max() < 1e-9
    # mass of the coordinates equals the map's Dirichlet energy (halved)
    energy = 0.0
    for k in range(2):
        du = spectral_derivative(g, u, k)
        energy += integrate(g, geo.inner(geo.SPHERE, du, du))
    assert abs(2.0 * gnls_mass(st) - energy) < 1e-10
