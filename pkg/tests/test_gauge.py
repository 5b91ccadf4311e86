import warnings

import numpy as np
import pytest

from smframe import geometry as geo
from smframe import presets
from smframe.errors import FrameInvalid, MeanHolonomy
from smframe.field import Grid, spectral_derivative
from smframe.gauge import (Connection, Coordinates, best_reference_frame,
                           compatibility_residual, coulomb_fix,
                           covariant_derivative, exponential_gauge_connection,
                           exponential_gauge_curl_residual,
                           extract_coordinates, frame_from_reference,
                           gauge_transform, parallel_gauge_sweep_1d,
                           remove_mean_connection, rotate_frame, validate_frame)


def _great_circle_setup(n=64, boxes=4):
    g = Grid((n,), (2 * np.pi * boxes,))
    u = presets.great_circle(g, turns=boxes)
    e = frame_from_reference(geo.SPHERE, u, np.array([0.0, 0.0, 1.0]))
    return g, u, e


def _bump_setup(n=64):
    # width 1.4 keeps both the spectral tail and the torus seam below 1e-13
    # at n = 64 points over 8 pi
    g = Grid((n, n), (8 * np.pi, 8 * np.pi))
    u = presets.sphere_bump_2d(g, 0.5, 1.4)
    e = best_reference_frame(geo.SPHERE, u)
    return g, u, e


def test_validate_frame_accepts_and_rejects():
    g, u, e = _great_circle_setup()
    validate_frame(geo.SPHERE, u, e)
    with pytest.raises(FrameInvalid):
        validate_frame(geo.SPHERE, u, 1.1 * e)
    with pytest.raises(FrameInvalid):
        validate_frame(geo.SPHERE, u, np.roll(u, 1, axis=-1) * 0 + u)


def test_extract_coordinates_great_circle_closed_form():
    # u = (cos x, sin x, 0), e = z-hat: d_x u = -Je so q = -i, a = 0
    g, u, e = _great_circle_setup()
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    assert np.max(np.abs(coords.q[0] + 1j)) < 1e-12
    assert np.max(np.abs(conn.a[0])) < 1e-12


def test_extraction_is_isometric():
    g, u, e = _bump_setup()
    coords, _ = extract_coordinates(geo.SPHERE, g, u, e)
    for axis in range(2):
        du = spectral_derivative(g, u, axis)
        assert np.max(np.abs(np.abs(coords.q[axis]) ** 2
                             - geo.inner(geo.SPHERE, du, du))) < 1e-12


def test_rotate_frame_matches_gauge_transform():
    g, u, e = _great_circle_setup()
    theta = 0.3 * np.sin(g.axis_coord(0) / 4.0)
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    e2 = rotate_frame(geo.SPHERE, u, e, theta)
    coords2, conn2 = extract_coordinates(geo.SPHERE, g, u, e2)
    qhat, ahat = gauge_transform(g, coords, conn, theta)
    assert np.max(np.abs(coords2.q[0] - qhat.q[0])) < 1e-10
    assert np.max(np.abs(conn2.a[0] - ahat.a[0])) < 1e-10


def test_gauge_transform_group_law_and_modulus():
    g, u, e = _great_circle_setup()
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    x = g.axis_coord(0)
    th1, th2 = 0.2 * np.sin(x / 4.0), -0.7 * np.cos(x / 2.0)
    one = gauge_transform(g, *gauge_transform(g, coords, conn, th1), th2)
    both = gauge_transform(g, coords, conn, th1 + th2)
    assert np.max(np.abs(one[0].q[0] - both[0].q[0])) < 1e-12
    assert np.max(np.abs(one[1].a[0] - both[1].a[0])) < 1e-12
    assert np.max(np.abs(np.abs(one[0].q[0]) - np.abs(coords.q[0]))) < 1e-12
    # inverse transform restores the input
    back = gauge_transform(g, *both, -(th1 + th2))
    assert np.max(np.abs(back[0].q[0] - coords.q[0])) < 1e-12


def test_covariant_derivative_transforms_covariantly():
    g, u, e = _bump_setup()
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    x1, _ = g.coords()
    theta = 0.4 * np.sin(x1 / 4.0)
    qhat, ahat = gauge_transform(g, coords, conn, theta)
    for axis in range(2):
        d = covariant_derivative(g, coords.q[0], conn.a[axis], axis)
        dhat = covariant_derivative(g, qhat.q[0], ahat.a[axis], axis)
        # limited by pseudospectral aliasing of the phase product at n = 64
        assert np.max(np.abs(dhat - np.exp(-1j * theta) * d)) < 5e-7


def test_coulomb_fix_divergence_free_and_idempotent():
    g, u, e = _bump_setup()
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    q1, a1, th1 = coulomb_fix(g, coords, conn)
    div = sum(spectral_derivative(g, ak, axis) for axis, ak in enumerate(a1.a))
    # floor set by the Nyquist content of the seeded data
    assert np.max(np.abs(div)) < 1e-8
    assert a1.gauge == "coulomb"
    q2, a2, th2 = coulomb_fix(g, q1, a1)
    assert np.max(np.abs(th2)) < 1e-9
    assert np.max(np.abs(q2.q[0] - q1.q[0])) < 1e-9
    assert np.max(np.abs(np.abs(q1.q[0]) - np.abs(coords.q[0]))) < 1e-13


def test_remove_mean_connection():
    g, u, e = _bump_setup()
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    coords, conn, _ = coulomb_fix(g, coords, conn)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MeanHolonomy)
        q2, a2, theta = remove_mean_connection(g, coords, conn)
    for ak in a2.a:
        assert abs(np.mean(ak)) < 1e-15
    assert np.max(np.abs(np.abs(q2.q[0]) - np.abs(coords.q[0]))) < 1e-13
    # the returned angle is the ramp that was applied
    assert np.max(np.abs(q2.q[0] - np.exp(-1j * theta) * coords.q[0])) < 1e-13


def test_parallel_gauge_zeroes_connection_and_warns_on_holonomy():
    g, u, e = _great_circle_setup()
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    # inject a connection with a mean by rotating the frame with a ramp-free part
    theta = 0.5 * np.sin(g.axis_coord(0) / 4.0)
    coords, conn = gauge_transform(g, coords, conn, theta)
    qp, ap, theta = parallel_gauge_sweep_1d(g, coords, conn)
    assert np.max(np.abs(ap.a[0])) < 1e-14
    assert ap.gauge == "parallel-1d"
    assert np.max(np.abs(np.abs(qp.q[0]) - np.abs(coords.q[0]))) < 1e-12
    assert np.max(np.abs(qp.q[0] - np.exp(-1j * theta) * coords.q[0])) < 1e-12

    biased = Connection(a=(conn.a[0] + 0.3,))
    with pytest.warns(MeanHolonomy):
        parallel_gauge_sweep_1d(g, coords, biased)


def test_compatibility_residual_small_for_extracted_data():
    g, u, e = _bump_setup()
    coords, conn = extract_coordinates(geo.SPHERE, g, u, e)
    coords, conn, _ = coulomb_fix(g, coords, conn)
    coords, conn, _ = remove_mean_connection(g, coords, conn)
    rep = compatibility_residual(geo.SPHERE, g, coords, conn)
    assert rep.max() < 1e-6
    assert rep.as_tuple() == (rep.div_a, rep.dq_symmetry, rep.curl_minus_curvature)
    # breaking the pair breaks the report
    broken = Coordinates(q=(coords.q[0], 2.0 * coords.q[1]))
    rep2 = compatibility_residual(geo.SPHERE, g, broken, conn)
    assert rep2.dq_symmetry > 1e-3


def test_exponential_gauge_radial_identity_and_curl():
    g, u, e = _bump_setup()
    coords, _ = extract_coordinates(geo.SPHERE, g, u, e)
    f12 = geo.curvature_f(geo.SPHERE, coords.q[0], coords.q[1])
    conn = exponential_gauge_connection(g, f12)
    assert conn.gauge == "exponential"
    x1, x2 = g.coords()
    assert np.max(np.abs(x1 * conn.a[0] + x2 * conn.a[1])) < 1e-12
    assert exponential_gauge_curl_residual(g, conn, f12) < 5e-3


def test_best_reference_frame_picks_nondegenerate_axis():
    g, u, _ = _great_circle_setup()
    e = best_reference_frame(geo.SPHERE, u)
    validate_frame(geo.SPHERE, u, e)
    # the equatorial circle only admits the z-axis reference
    assert np.max(np.abs(e - np.array([0.0, 0.0, 1.0]))) < 1e-12
