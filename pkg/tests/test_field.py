import numpy as np
import pytest

from smframe import geometry as geo
from smframe.errors import FormatError, NonZeroMean
from smframe.field import (Grid, dealias, fractional_shift, half_shift,
                           integrate, laplacian, poisson_solve, sample_line,
                           spectral_derivative)
from smframe.snapshot import read_snapshot, write_snapshot


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid((12,), (1.0,))  # too small
    with pytest.raises(ValueError):
        Grid((48,), (1.0,))  # not a power of two
    with pytest.raises(ValueError):
        Grid((32,), (-1.0,))
    with pytest.raises(ValueError):
        Grid((32, 32, 32), (1.0, 1.0, 1.0))


def test_grid_geometry():
    g = Grid((64, 32), (2.0, 4.0))
    assert g.dim == 2
    assert g.spacing == (2.0 / 64, 4.0 / 32)
    assert g.center_index == (32, 16)
    x = g.axis_coord(0)
    assert x[g.center_index[0]] == 0.0  # box center is an exact grid point
    assert abs(g.cell_volume - (2.0 / 64) * (4.0 / 32)) < 1e-15


def test_spectral_derivative_exact_on_modes():
    g = Grid((64,), (2 * np.pi,))
    x = g.axis_coord(0)
    f = np.sin(3 * x)
    assert np.max(np.abs(spectral_derivative(g, f, 0) - 3 * np.cos(3 * x))) < 1e-12


def test_spectral_derivative_2d_vector_fields():
    g = Grid((32, 32), (2 * np.pi, 2 * np.pi))
    x1, x2 = g.coords()
    v = np.stack([np.sin(x1), np.cos(2 * x2), np.sin(x1) * np.sin(x2)], axis=-1)
    d1 = spectral_derivative(g, v, 0)
    assert np.max(np.abs(d1[..., 0] - np.cos(x1))) < 1e-12
    assert np.max(np.abs(d1[..., 1])) < 1e-12


def test_laplacian_and_poisson_roundtrip():
    g = Grid((32, 32), (2 * np.pi, 2 * np.pi))
    x1, x2 = g.coords()
    phi = np.sin(x1) * np.cos(2 * x2)
    rhs = laplacian(g, phi)
    back = poisson_solve(g, rhs)
    assert np.max(np.abs(back - phi)) < 1e-12  # phi is mean-zero already


def test_poisson_rejects_nonzero_mean():
    g = Grid((32,), (2 * np.pi,))
    with pytest.raises(NonZeroMean):
        poisson_solve(g, np.ones(g.shape))


def test_integrate_constant_and_vector():
    g = Grid((32, 32), (2.0, 3.0))
    assert abs(integrate(g, np.ones(g.shape)) - 6.0) < 1e-12
    v = np.ones(g.shape + (3,))
    assert np.allclose(integrate(g, v), [6.0, 6.0, 6.0])


def test_dealias_removes_top_third():
    g = Grid((32,), (2 * np.pi,))
    x = g.axis_coord(0)
    low = np.sin(3 * x)
    high = np.sin(14 * x)
    out = dealias(g, low + high)
    assert np.max(np.abs(out - low)) < 1e-12


def test_fractional_shift_is_exact_on_bandlimited_data():
    g = Grid((64,), (2 * np.pi,))
    x = g.axis_coord(0)
    f = np.sin(5 * x) + 0.3 * np.cos(2 * x)
    h = g.spacing[0]
    for frac in (0.0, 0.25, 0.5, 1.0):
        shifted = fractional_shift(g, f, 0, frac)
        expect = np.sin(5 * (x + frac * h)) + 0.3 * np.cos(2 * (x + frac * h))
        assert np.max(np.abs(shifted - expect)) < 1e-12
    assert np.allclose(half_shift(g, f, 0), fractional_shift(g, f, 0, 0.5))
    # frac = 1 is a plain circular roll
    assert np.max(np.abs(fractional_shift(g, f, 0, 1.0) - np.roll(f, -1))) < 1e-12


def test_sample_line():
    g = Grid((16, 32), (1.0, 1.0))
    f = np.arange(16 * 32).reshape(16, 32)
    line = sample_line(f, 0, {1: 5})
    assert line.shape == (16,)
    assert np.all(line == f[:, 5])


def test_snapshot_roundtrip(tmp_path):
    g = Grid((16, 16), (2.0, 3.0))
    rng = np.random.default_rng(0)
    fields = {
        "scalar": rng.standard_normal(g.shape),
        "cplx": rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape),
        "vec": rng.standard_normal(g.shape + (3,)),
    }
    path = tmp_path / "state.smfs"
    write_snapshot(path, g, geo.HYPERBOLIC, 1.25, fields)
    snap = read_snapshot(path)
    assert snap.grid == g
    assert snap.target.kind == "hyperbolic"
    assert snap.time == 1.25
    for name, arr in fields.items():
        assert np.array_equal(snap.fields[name], arr)


def test_snapshot_bad_magic_reports_offset(tmp_path):
    path = tmp_path / "bad.smfs"
    path.write_bytes(b"XXXX" + b"\x00" * 40)
    with pytest.raises(FormatError) as err:
        read_snapshot(path)
    assert err.value.offset == 0


def test_snapshot_truncation_reports_offset(tmp_path):
    g = Grid((16,), (1.0,))
    path = tmp_path / "trunc.smfs"
    write_snapshot(path, g, geo.SPHERE, 0.0, {"f": np.zeros(g.shape)})
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(FormatError) as err:
        read_snapshot(path)
    assert err.value.offset > 0
