"""Frames, connections, and gauge fixing.

A frame along a map u is a unit tangent field e; the second leg is always
Je.  Writing a tangent section as v = Re(z) e + Im(z) Je packs it into one
complex scalar z per point.  The frame coordinates of the map are

    q_l = <d_l u, e> + i <d_l u, Je>        (target metric)
    a_l = <D_l e, Je>

so that d_l u = q_l . e and D_l e = a_l Je.  Rotating the frame by an angle
field theta, e -> cos(theta) e + sin(theta) Je, transforms

    q -> exp(-i theta) q,       a -> a + grad theta,

which is the U(1) transformation law implemented by `gauge_transform` (the
two sides are tied together: this is the unique pairing under which the
covariant derivative D_l = d_l + i a_l transforms covariantly).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.ndimage import map_coordinates

from . import geometry as geo
from .errors import FrameInvalid, MeanHolonomy
from .field import Grid, half_shift, integrate, poisson_solve, sample_line, spectral_derivative

FRAME_TOL = 1e-8


@dataclass
class Coordinates:
    """Complex frame coordinates q_1..q_d (and q_0 when a solver derives it)."""

    q: tuple[np.ndarray, ...]
    q0: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.q)


@dataclass
class Connection:
    """Real U(1) connection components a_1..a_d (and a_0) in a tagged gauge."""

    a: tuple[np.ndarray, ...]
    a0: np.ndarray | None = None
    gauge: str = "other"  # coulomb | parallel-1d | exponential | other

    @property
    def dim(self) -> int:
        return len(self.a)


def validate_frame(target: geo.Target, u: np.ndarray, e: np.ndarray,
                   tol: float = FRAME_TOL) -> None:
    """Check the pointwise frame invariants: unit norm and tangency."""
    geo.check_on_manifold(target, u, tol)
    norm_defect = np.max(np.abs(geo.inner(target, e, e) - 1.0))
    tangency_defect = np.max(np.abs(geo.inner(target, e, u)))
    if norm_defect > tol or tangency_defect > tol:
        raise FrameInvalid(
            f"frame defects: |<e,e>-1| = {norm_defect:.3e}, |<e,u>| = {tangency_defect:.3e}"
        )


def frame_from_reference(target: geo.Target, u: np.ndarray,
                         reference: np.ndarray) -> np.ndarray:
    """Smooth frame from projecting a constant ambient reference vector.

    Valid wherever the reference is nowhere (anti)parallel to the normal.
    """
    ref = np.broadcast_to(np.asarray(reference, dtype=float), u.shape)
    return geo.orthonormalize_frame(target, u, ref)


def best_reference_frame(target: geo.Target, u: np.ndarray) -> np.ndarray:
    """Frame from the ambient basis vector whose projection is best
    conditioned across the whole grid (largest worst-case tangent norm)."""
    best, best_score = None, -np.inf
    for i in range(3):
        ref = np.zeros(3)
        ref[i] = 1.0
        p = geo.project_tangent(target, u, np.broadcast_to(ref, u.shape))
        score = float(np.min(geo.inner(target, p, p)))
        if score > best_score:
            best, best_score = ref, score
    if best_score <= FRAME_TOL:
        raise FrameInvalid(
            "no constant reference vector yields a frame on this map")
    return frame_from_reference(target, u, best)


def rotate_frame(target: geo.Target, u: np.ndarray, e: np.ndarray,
                 theta: np.ndarray) -> np.ndarray:
    """Rotate the frame by theta in the (e, Je) plane."""
    th = np.asarray(theta)[..., np.newaxis]
    return np.cos(th) * e + np.sin(th) * geo.j_apply(target, u, e)


def extract_coordinates(target: geo.Target, grid: Grid, u: np.ndarray,
                        e: np.ndarray) -> tuple[Coordinates, Connection]:
    """Forward construction: read (q, a) off a map and its frame.

    Spatial components only; a_0 and q_0 belong to the evolution solvers.
    """
    validate_frame(target, u, e)
    je = geo.j_apply(target, u, e)
    q = []
    a = []
    for axis in range(grid.dim):
        du = spectral_derivative(grid, u, axis)
        q.append(geo.inner(target, du, e) + 1j * geo.inner(target, du, je))
        de = geo.project_tangent(target, u, spectral_derivative(grid, e, axis))
        a.append(geo.inner(target, de, je))
    return Coordinates(q=tuple(q)), Connection(a=tuple(a), gauge="other")


def gauge_transform(grid: Grid, coords: Coordinates, conn: Connection,
                    theta: np.ndarray) -> tuple[Coordinates, Connection]:
    """Apply the U(1) gauge change of a frame rotation by theta."""
    phase = np.exp(-1j * theta)
    q = tuple(phase * qk for qk in coords.q)
    a = tuple(ak + spectral_derivative(grid, theta, axis)
              for axis, ak in enumerate(conn.a))
    return Coordinates(q=q), Connection(a=a, gauge="other")


def coulomb_fix(grid: Grid, coords: Coordinates,
                conn: Connection) -> tuple[Coordinates, Connection, np.ndarray]:
    """Gauge-fix to the Coulomb gauge div a = 0 via Delta theta = -div a."""
    div = sum(spectral_derivative(grid, ak, axis) for axis, ak in enumerate(conn.a))
    theta = poisson_solve(grid, -div)
    q, a = gauge_transform(grid, coords, conn, theta)
    a.gauge = "coulomb"
    return q, a, theta


def parallel_gauge_sweep_1d(grid: Grid, coords: Coordinates, conn: Connection
                            ) -> tuple[Coordinates, Connection, np.ndarray]:
    """1D parallel gauge: theta = -int a_1, leaving a_1 identically zero.

    The mean part of a_1 produces a linear (non-periodic) phase ramp; it is
    applied pointwise and its holonomy around the torus is reported as a
    MeanHolonomy warning when it exceeds round-off scale.  Returns the
    rotation angle along with the transformed pair so a frame can be kept
    in register via `rotate_frame`.
    """
    if grid.dim != 1:
        raise ValueError("parallel gauge sweep is a 1D construction")
    a1 = conn.a[0]
    mean = float(np.mean(a1))
    holonomy = mean * grid.length[0]
    if abs(holonomy) > 2.0 * np.pi * 1e-8:
        warnings.warn(
            f"mean connection gives torus holonomy {holonomy:.3e}; "
            "the parallel gauge is not periodic", MeanHolonomy)
    # fluctuating part: spectral antiderivative
    k = grid.wavenumber(0).copy()
    k[0] = 1.0
    k[grid.n[0] // 2] = 1.0
    ah = np.fft.fft(a1 - mean)
    th = ah / (1j * k)
    th[0] = 0.0
    th[grid.n[0] // 2] = 0.0
    theta = -np.fft.ifft(th).real - mean * grid.axis_coord(0)
    phase = np.exp(-1j * theta)
    q = tuple(phase * qk for qk in coords.q)
    a = (np.zeros_like(a1),)
    return Coordinates(q=q), Connection(a=a, gauge="parallel-1d"), theta


def remove_mean_connection(grid: Grid, coords: Coordinates, conn: Connection
                           ) -> tuple[Coordinates, Connection, np.ndarray]:
    """Gauge away the constant (harmonic) part of the spatial connection.

    On the torus the Coulomb condition fixes a only up to constants; this
    applies the linear ramp theta = -sum_k mean(a_k) x_k pointwise so the
    result matches the decay normalization mean(a) = 0.  The ramp is not
    periodic; its holonomy is reported as a MeanHolonomy warning when it
    exceeds round-off scale.  Returns the ramp angle as the third value.
    """
    means = [float(np.mean(ak)) for ak in conn.a]
    theta = np.zeros(grid.shape)
    for axis, m in enumerate(means):
        holonomy = m * grid.length[axis]
        if abs(holonomy) > 2.0 * np.pi * 1e-8:
            warnings.warn(
                f"mean connection on axis {axis} gives torus holonomy "
                f"{holonomy:.3e}; the mean-zero gauge is not periodic",
                MeanHolonomy)
        shape = [1] * grid.dim
        shape[axis] = grid.n[axis]
        theta = theta - m * grid.axis_coord(axis).reshape(shape)
    phase = np.exp(-1j * theta)
    q = tuple(phase * qk for qk in coords.q)
    a = tuple(ak - m for ak, m in zip(conn.a, means))
    return Coordinates(q=q), Connection(a=a, gauge=conn.gauge), theta


def exponential_gauge_connection(grid: Grid, f12: np.ndarray,
                                 samples_per_ray: int | None = None) -> Connection:
    """Radial-transport (exponential) gauge from the curvature two-form.

    Reconstructs a_k(x) = int_0^1 x^l F_lk(s x) s ds about the box center,
    so x^1 a_1 + x^2 a_2 = 0 pointwise.  The ray integral is composite
    Simpson; off-lattice curvature values come from periodic cubic
    interpolation, so the construction is meaningful for curvature
    supported in the box interior.
    """
    if grid.dim != 2:
        raise ValueError("exponential gauge reconstruction needs d = 2")
    if samples_per_ray is None:
        samples_per_ray = 4 * max(grid.n)
    m = samples_per_ray + (samples_per_ray % 2)  # Simpson needs an even count
    s = np.linspace(0.0, 1.0, m + 1)
    weights = np.ones(m + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    weights *= (1.0 / m) / 3.0

    x1, x2 = grid.coords()
    h1, h2 = grid.spacing
    c1, c2 = grid.center_index
    radial = np.zeros(grid.shape)  # int_0^1 f12(s x) s ds
    for si, wi in zip(s, weights):
        if si == 0.0:
            continue  # integrand carries a factor s
        idx1 = si * x1 / h1 + c1
        idx2 = si * x2 / h2 + c2
        vals = map_coordinates(f12, [idx1, idx2], order=3, mode="grid-wrap")
        radial += wi * si * vals
    a1 = -x2 * radial
    a2 = x1 * radial
    return Connection(a=(a1, a2), gauge="exponential")


def exponential_gauge_curl_residual(grid: Grid, conn: Connection,
                                    f12: np.ndarray,
                                    interior_fraction: float = 0.5) -> float:
    """max |curl a - f12| over the central part of the box.

    The radial-transport connection is not periodic (it decays only like
    1/|x|), so its curl is formed with local fourth-order centered
    differences and checked away from the torus seam, where the
    construction is meaningful.
    """
    def fd(f, axis):
        h = grid.spacing[axis]
        return (8.0 * (np.roll(f, -1, axis) - np.roll(f, 1, axis))
                - (np.roll(f, -2, axis) - np.roll(f, 2, axis))) / (12.0 * h)

    curl = fd(conn.a[1], 0) - fd(conn.a[0], 1)
    x1, x2 = grid.coords()
    half1 = 0.5 * interior_fraction * grid.length[0]
    half2 = 0.5 * interior_fraction * grid.length[1]
    interior = (np.abs(x1) < half1) & (np.abs(x2) < half2)
    return float(np.max(np.abs((curl - f12)[interior])))


def covariant_derivative(grid: Grid, q: np.ndarray, a: np.ndarray,
                         axis: int) -> np.ndarray:
    """D_axis q = (d_axis + i a_axis) q."""
    return spectral_derivative(grid, q, axis) + 1j * a * q


@dataclass
class CompatReport:
    """Max-norm residuals of the three compatibility conditions."""

    div_a: float
    dq_symmetry: float
    curl_minus_curvature: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.div_a, self.dq_symmetry, self.curl_minus_curvature)

    def max(self) -> float:
        return max(self.as_tuple())


def compatibility_residual(target: geo.Target, grid: Grid, coords: Coordinates,
                           conn: Connection) -> CompatReport:
    """Measure how far (q, a) is from being realizable as frame coordinates."""
    q, a = coords.q, conn.a
    div = sum(spectral_derivative(grid, ak, axis) for axis, ak in enumerate(a))
    r1 = float(np.max(np.abs(div)))
    r2 = 0.0
    r3 = 0.0
    for l in range(grid.dim):
        for k in range(l + 1, grid.dim):
            sym = covariant_derivative(grid, q[l], a[k], k) \
                - covariant_derivative(grid, q[k], a[l], l)
            r2 = max(r2, float(np.max(np.abs(sym))))
            curl = spectral_derivative(grid, a[k], l) - spectral_derivative(grid, a[l], k)
            r3 = max(r3, float(np.max(np.abs(curl - geo.curvature_f(target, q[l], q[k])))))
    return CompatReport(div_a=r1, dq_symmetry=r2, curl_minus_curvature=r3)
