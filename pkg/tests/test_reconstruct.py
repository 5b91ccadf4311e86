import warnings

import numpy as np
import pytest

from smframe import geometry as geo
from smframe import presets
from smframe.errors import InvalidStep, MeanHolonomy
from smframe.field import Grid
from smframe.gauge import (Connection, Coordinates, best_reference_frame,
                           coulomb_fix, extract_coordinates,
                           frame_from_reference, remove_mean_connection,
                           rotate_frame)
from smframe.reconstruct import (BasePointData, Nls1dTrajectory,
                                 initial_data_sweep, reconstruct_trajectory,
                                 sm_residual, time_evolve_point,
                                 uniqueness_gap)


def test_base_point_validation():
    BasePointData(np.array([0.0, 0.0, 1.0]),
                  np.array([1.0, 0.0, 0.0])).validate(geo.SPHERE)
    with pytest.raises(Exception):
        BasePointData(np.array([0.0, 0.0, 1.5]),
                      np.array([1.0, 0.0, 0.0])).validate(geo.SPHERE)
    with pytest.raises(ValueError):
        BasePointData(np.array([0.0, 0.0, 1.0]),
                      np.array([0.0, 0.0, 1.0])).validate(geo.SPHERE)
    with pytest.raises(ValueError):
        BasePointData(np.array([0.0, 0.0, 1.0]),
                      np.array([2.0, 0.0, 0.0])).validate(geo.SPHERE)


def test_zero_data_gives_constant_map():
    g = Grid((64,), (2 * np.pi,))
    base = BasePointData(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    st = initial_data_sweep(geo.SPHERE, g,
                            Coordinates(q=(np.zeros(64, complex),)),
                            Connection(a=(np.zeros(64),)), base)
    assert np.max(np.abs(st.u - base.m)) < 1e-14
    assert np.max(np.abs(st.e - base.v0)) < 1e-14
    assert st.periodicity_defect < 1e-14


def test_sweep_recovers_great_circle():
    g = Grid((512,), (16 * np.pi,))
    u = presets.great_circle(g, turns=8)
    e = frame_from_reference(geo.SPHERE, u, np.array([0.0, 0.0, 1.0]))
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    c = g.center_index[0]
    st = initial_data_sweep(geo.SPHERE, g, coords, conn,
                            BasePointData(u[c], e[c]))
    assert np.max(geo.geodesic_distance(geo.SPHERE, st.u, u)) < 1e-8
    assert np.max(np.abs(st.e - e)) < 1e-8
    assert st.periodicity_defect < 1e-8


def _hyperbolic_roundtrip_error(n):
    g = Grid((n,), (8 * np.pi,))
    x = g.axis_coord(0)
    chi = 0.6 * np.exp(-0.5 * (x / 1.2) ** 2)
    u = np.stack([np.cosh(chi), np.sinh(chi) * np.cos(x / 4.0),
                  np.sinh(chi) * np.sin(x / 4.0)], axis=-1)
    u = geo.retract(geo.HYPERBOLIC, u)
    e = best_reference_frame(geo.HYPERBOLIC, u)
    coords, conn = extract_coordinates(geo.HYPERBOLIC, g, u, e)
    c = g.center_index[0]
    st = initial_data_sweep(geo.HYPERBOLIC, g, coords, conn,
                            BasePointData(u[c], e[c]))
    return np.max(geo.geodesic_distance(geo.HYPERBOLIC, st.u, u))


def test_sweep_converges_at_fourth_order():
    err_c = _hyperbolic_roundtrip_error(128)
    err_f = _hyperbolic_roundtrip_error(256)
    order = np.log2(err_c / err_f)
    assert err_f < err_c
    assert 3.5 < order < 4.5


def test_sweep_recovers_2d_map_and_frame():
    g = Grid((64, 64), (8 * np.pi, 8 * np.pi))
    u = presets.sphere_bump_2d(g, 0.5, 1.4)
    e = best_reference_frame(geo.SPHERE, u)
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    coords, conn, theta = coulomb_fix(g, coords, conn)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MeanHolonomy)
        coords, conn, ramp = remove_mean_connection(g, coords, conn)
    e = rotate_frame(geo.SPHERE, u, e, theta + ramp)
    c = g.center_index
    st = initial_data_sweep(geo.SPHERE, g, coords, conn,
                            BasePointData(u[c], e[c]))
    assert np.max(geo.geodesic_distance(geo.SPHERE, st.u, u)) < 1e-6
    # the mean-removal ramp is not periodic, so the frame mismatch piles up
    # at the wrap seam; the interior recovery is clean and the seam error is
    # exactly what periodicity_defect reports
    sl = (slice(16, 48), slice(16, 48))
    assert np.max(np.abs(st.e[sl] - e[sl])) < 1e-6
    assert st.periodicity_defect < 0.05


def test_time_evolve_point_plane_wave_precession():
    # constant q = c in the parallel gauge: q_t = 0, a_t = -c^2/2, so the
    # frame precesses about u at rate c^2/2 while u stays fixed
    c = 1.0
    u = np.array([[0.0, 0.0, 1.0]])
    e = np.array([[1.0, 0.0, 0.0]])
    q0 = np.zeros(1, complex)
    a0 = np.full(1, -0.5 * c**2)
    stages = [(q0, a0)] * 3
    n_steps = 6283
    dt = 4 * np.pi / n_steps  # one full revolution at rate 1/2
    en = e.copy()
    for _ in range(n_steps):
        u2, en = time_evolve_point(geo.SPHERE, u, en, stages, dt)
        assert np.max(np.abs(u2 - u)) < 1e-12
    assert np.max(np.abs(en - e)) < 1e-8


def test_time_evolve_point_rejects_bad_step():
    u = np.array([[0.0, 0.0, 1.0]])
    e = np.array([[1.0, 0.0, 0.0]])
    stages = [(np.zeros(1, complex), np.zeros(1))] * 3
    with pytest.raises(InvalidStep):
        time_evolve_point(geo.SPHERE, u, e, stages, 0.0)


def _soliton_run(g, base, n_steps, dt):
    provider = Nls1dTrajectory(grid=g, q=presets.soliton(g, 2.0), dt=dt)
    return reconstruct_trajectory(provider, base, n_steps)


def test_reconstruction_is_deterministic_and_stable_in_base():
    g = Grid((128,), (10 * np.pi,))
    base = BasePointData(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    run_a = _soliton_run(g, base, 10, 1e-3)
    run_b = _soliton_run(g, base, 10, 1e-3)
    assert uniqueness_gap(geo.SPHERE, run_a, run_b) == 0.0

    delta = 1e-6
    m2 = geo.retract(geo.SPHERE, base.m + np.array([delta, 0.0, 0.0]))
    v2 = geo.orthonormalize_frame(geo.SPHERE, m2, base.v0)
    run_c = _soliton_run(g, BasePointData(m2, v2), 10, 1e-3)
    gap = uniqueness_gap(geo.SPHERE, run_a, run_c)
    assert 0.0 < gap < 50 * delta

    with pytest.raises(ValueError):
        uniqueness_gap(geo.SPHERE, run_a, run_c[:-1])


def test_reconstructed_trajectory_satisfies_map_equation():
    g = Grid((256,), (10 * np.pi,))
    base = BasePointData(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    states = _soliton_run(g, base, 4, 5e-4)
    res = sm_residual(geo.SPHERE, g, tuple(states[1:4]), 5e-4)
    assert res < 5e-4
    assert states[0].time == 0.0
    assert states[-1].time == pytest.approx(4 * 5e-4)


def test_snapshot_every_thins_output():
    g = Grid((64,), (10 * np.pi,))
    base = BasePointData(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    provider = Nls1dTrajectory(grid=g, q=presets.soliton(g, 2.0), dt=1e-3)
    states = reconstruct_trajectory(provider, base, 6, snapshot_every=3)
    assert len(states) == 3
    assert [s.time for s in states] == pytest.approx([0.0, 3e-3, 6e-3])
