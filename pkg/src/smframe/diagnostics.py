"""Conserved and dissipated functionals, residual reports, CSV logging.

All functionals are evaluated in ambient coordinates; the Killing
potentials of both targets are globally smooth ambient components, so the
coordinate singularity of (chi, theta) at the base point never enters.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field, fields as dc_fields
from pathlib import Path

import numpy as np

from . import geometry as geo
from .direct import MapState, map_moment
from .errors import CadenceMismatch, NegativeEnergy
from .field import Grid, integrate, spectral_derivative


def killing_functionals(state: MapState) -> np.ndarray:
    """Integrals of the Killing-field potentials.

    Sphere: (int u1, int u2, int u3), the potentials of the three ambient
    rotations.  Hyperboloid: (int (u0 - 1), int u1, int u2) - the moment
    plus the two boost potentials sinh(chi)cos(theta), sinh(chi)sin(theta)
    written as ambient components.
    """
    u = state.u
    if state.target.kind == "sphere":
        vals = [integrate(state.grid, u[..., i]) for i in range(3)]
    else:
        vals = [integrate(state.grid, u[..., 0] - 1.0),
                integrate(state.grid, u[..., 1]),
                integrate(state.grid, u[..., 2])]
    return np.asarray(vals)


def energy_map(state: MapState) -> float:
    """Dirichlet energy int sum_k <d_k u, d_k u> in the target metric.

    Nonnegative for states on the constraint set; a Lorentz value below
    -1e-10 means the state has left the hyperboloid and raises
    NegativeEnergy instead of silently returning garbage.
    """
    density = np.zeros(state.grid.shape)
    for k in range(state.grid.dim):
        du = spectral_derivative(state.grid, state.u, k)
        density += geo.inner(state.target, du, du)
    value = float(integrate(state.grid, density))
    if value < -1e-10:
        raise NegativeEnergy(
            f"Lorentz gradient energy {value:.3e} < 0: constraint breach")
    return value


def lorentz_weighted_energy(state: MapState) -> float:
    """int <grad u, grad u> u0 dx, the dissipation-rate weight of the
    parabolic hyperbolic flow (u0 = cosh chi)."""
    density = np.zeros(state.grid.shape)
    for k in range(state.grid.dim):
        du = spectral_derivative(state.grid, state.u, k)
        density += geo.inner(state.target, du, du)
    return float(integrate(state.grid, density * state.u[..., 0]))


@dataclass
class DiagnosticsRow:
    """One logged observation of a run.

    Vector entries are flattened into numbered CSV columns; absent values
    are logged as NaN (e.g. mass for map-side runs).
    """

    time: float
    mass: float = math.nan
    energy: float = math.nan
    moment: tuple[float, float, float] = (math.nan,) * 3
    killing: tuple[float, float, float] = (math.nan,) * 3
    residual_compat: tuple[float, float, float] = (math.nan,) * 3
    residual_sm: float = math.nan
    constraint_max: float = math.nan
    periodicity_defect: float = math.nan

    def validate(self) -> None:
        if not math.isfinite(self.time):
            raise ValueError("row time is not finite")


_VECTOR_FIELDS = ("moment", "killing", "residual_compat")


def _csv_header() -> list[str]:
    cols: list[str] = []
    for f in dc_fields(DiagnosticsRow):
        if f.name in _VECTOR_FIELDS:
            cols.extend(f"{f.name}_{i + 1}" for i in range(3))
        else:
            cols.append(f.name)
    return cols


def _row_values(row: DiagnosticsRow) -> list[float]:
    vals: list[float] = []
    for f in dc_fields(DiagnosticsRow):
        v = getattr(row, f.name)
        if f.name in _VECTOR_FIELDS:
            vals.extend(float(x) for x in v)
        else:
            vals.append(float(v))
    return vals


class DiagnosticsLog:
    """Append-only per-run CSV log named <run-id>.diag.csv."""

    def __init__(self, directory, run_id: str):
        self.path = Path(directory) / f"{run_id}.diag.csv"
        self._last_time: float | None = None
        with open(self.path, "w", newline="") as fh:
            csv.writer(fh).writerow(_csv_header())

    def append(self, row: DiagnosticsRow) -> None:
        row.validate()
        if self._last_time is not None and row.time <= self._last_time:
            raise ValueError(
                f"time must increase: {row.time} after {self._last_time}")
        self._last_time = row.time
        with open(self.path, "a", newline="") as fh:
            csv.writer(fh).writerow(f"{v!r}" for v in _row_values(row))


def read_diagnostics(path) -> list[DiagnosticsRow]:
    rows: list[DiagnosticsRow] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            kwargs = {}
            for f in dc_fields(DiagnosticsRow):
                if f.name in _VECTOR_FIELDS:
                    kwargs[f.name] = tuple(
                        float(rec[f"{f.name}_{i + 1}"]) for i in range(3))
                else:
                    kwargs[f.name] = float(rec[f.name])
            rows.append(DiagnosticsRow(**kwargs))
    return rows


@dataclass
class EquivalenceReport:
    """Gap between a direct map-side run and a reconstructed run."""

    times: list[float]
    geodesic_gap: list[float]
    max_gap: float
    slope: float | None = None  # convergence order when two resolutions given


def equivalence_report(direct_run, reconstructed_run,
                       time_tol: float = 1e-9,
                       coarse: "EquivalenceReport | None" = None,
                       refinement: float = 2.0) -> EquivalenceReport:
    """Compare two trajectories of the same map at matching times.

    Accepts any state objects carrying (grid, target, time, u).  When a
    coarse-resolution report is supplied the convergence order of max_gap
    is attached.
    """
    if len(direct_run) != len(reconstructed_run):
        raise CadenceMismatch(
            f"runs log {len(direct_run)} vs {len(reconstructed_run)} states")
    times = []
    gaps = []
    for sa, sb in zip(direct_run, reconstructed_run):
        if abs(sa.time - sb.time) > time_tol:
            raise CadenceMismatch(f"times {sa.time} and {sb.time} differ")
        times.append(sa.time)
        gaps.append(float(np.max(geo.geodesic_distance(sa.target, sa.u, sb.u))))
    report = EquivalenceReport(times=times, geodesic_gap=gaps, max_gap=max(gaps))
    if coarse is not None:
        report.slope = convergence_order(coarse.max_gap, report.max_gap, refinement)
    return report


def convergence_order(err_coarse: float, err_fine: float,
                      refinement: float = 2.0) -> float:
    """Observed order log(err_coarse / err_fine) / log(refinement)."""
    if err_fine <= 0.0:
        return math.inf
    return math.log(err_coarse / err_fine) / math.log(refinement)
