"""Experiment execution behind the command-line front-end.

Each experiment advances its solver, appends diagnostics rows at the
snapshot cadence, writes state snapshots, and leaves a JSON manifest
(config echo, code version, wall time) next to the outputs.
"""

from __future__ import annotations

import json
import time as _time
from importlib.metadata import PackageNotFoundError, version as _pkg_version
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import gnls, presets
from .config import RunConfig
from .direct import (MapState, heisenberg_step, hyperbolic_sm_step, map_moment,
                     parabolic_sm_step)
from .errors import ConfigError
from .gauge import best_reference_frame, compatibility_residual
from .geometry import SPHERE
from .reconstruct import (BasePointData, GnlsTrajectory, Nls1dTrajectory,
                          reconstruct_trajectory, sm_residual)
from .snapshot import read_snapshot, write_snapshot

FIELD_PRESETS = {
    "soliton": presets.soliton,
    "plane-wave": presets.plane_wave,
    "random-bandlimited": presets.random_bandlimited,
}
MAP_PRESETS = {
    "great-circle": presets.great_circle,
    "perturbed-great-circle": presets.perturbed_great_circle,
    "gaussian-bump-chi": presets.gaussian_bump_chi,
    "sphere-bump": presets.sphere_bump_2d,
}


def package_version() -> str:
    try:
        return _pkg_version("smframe")
    except PackageNotFoundError:
        return "unknown"


def _preset_kwargs(cfg: RunConfig) -> dict:
    kwargs = dict(cfg.preset_params)
    if cfg.preset == "random-bandlimited":
        kwargs.setdefault("seed", cfg.seed)
        if "kmax" in kwargs:
            kwargs["kmax"] = int(kwargs["kmax"])
        if "seed" in kwargs:
            kwargs["seed"] = int(kwargs["seed"])
    return kwargs


def initial_field(cfg: RunConfig) -> np.ndarray:
    """Complex coordinate seed for nls1d-style runs."""
    if cfg.snapshot_path:
        snap = read_snapshot(cfg.snapshot_path)
        return snap.fields["q"]
    if cfg.preset not in FIELD_PRESETS:
        raise ConfigError("initial.preset",
                          f"{cfg.preset!r} is not a field preset "
                          f"(expected one of {', '.join(FIELD_PRESETS)})")
    return FIELD_PRESETS[cfg.preset](cfg.grid, **_preset_kwargs(cfg))


def initial_map(cfg: RunConfig) -> np.ndarray:
    """Ambient map seed for map-side and gauge-extraction runs."""
    if cfg.snapshot_path:
        snap = read_snapshot(cfg.snapshot_path)
        return snap.fields["u"]
    if cfg.preset not in MAP_PRESETS:
        raise ConfigError("initial.preset",
                          f"{cfg.preset!r} is not a map preset "
                          f"(expected one of {', '.join(MAP_PRESETS)})")
    return MAP_PRESETS[cfg.preset](cfg.grid, **_preset_kwargs(cfg))


def _write_manifest(outdir: Path, cfg: RunConfig, config_text: str,
                    wall_time: float, extra: dict | None = None) -> None:
    manifest = {
        "run_id": cfg.run_id,
        "experiment": cfg.experiment,
        "version": package_version(),
        "wall_time_seconds": wall_time,
        "config": config_text,
    }
    if extra:
        manifest.update(extra)
    with open(outdir / f"{cfg.run_id}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


def _run_nls1d(cfg: RunConfig, outdir: Path, log: diag.DiagnosticsLog) -> None:
    kappa = cfg.target.kappa
    q = initial_field(cfg)
    for step in range(1, cfg.n_steps + 1):
        q = gnls.nls1d_step(cfg.grid, q, cfg.dt, kappa)
        if step % cfg.snapshot_every == 0:
            log.append(diag.DiagnosticsRow(
                time=step * cfg.dt,
                mass=gnls.nls1d_mass(cfg.grid, q),
                energy=gnls.nls1d_energy(cfg.grid, q, kappa)))
    write_snapshot(outdir / f"{cfg.run_id}.final.smfs", cfg.grid, cfg.target,
                   cfg.n_steps * cfg.dt, {"q": q})


def _run_gnls(cfg: RunConfig, outdir: Path, log: diag.DiagnosticsLog) -> None:
    u = initial_map(cfg)
    e = best_reference_frame(cfg.target, u)
    state = gnls.gnls_state_from_map(cfg.target, cfg.grid, u, e)
    parabolic = cfg.experiment == "parabolic-gnls"
    for step in range(1, cfg.n_steps + 1):
        if parabolic:
            state = gnls.parabolic_gnls_step(state, cfg.dt, cfg.epsilon)
        else:
            state = gnls.gnls_step(state, cfg.dt)
        if step % cfg.snapshot_every == 0:
            compat = compatibility_residual(cfg.target, cfg.grid,
                                            state.coordinates(),
                                            state.connection_field())
            log.append(diag.DiagnosticsRow(
                time=state.time, mass=gnls.gnls_mass(state),
                residual_compat=compat.as_tuple()))
    fields = {f"q{l + 1}": qi for l, qi in enumerate(state.q)}
    write_snapshot(outdir / f"{cfg.run_id}.final.smfs", cfg.grid, cfg.target,
                   state.time, fields)


def _map_row(state: MapState, **kwargs) -> diag.DiagnosticsRow:
    return diag.DiagnosticsRow(
        time=state.time,
        energy=diag.energy_map(state),
        moment=tuple(map_moment(state)),
        killing=tuple(diag.killing_functionals(state)),
        constraint_max=state.constraint_max(),
        **kwargs)


def _run_direct(cfg: RunConfig, outdir: Path, log: diag.DiagnosticsLog) -> None:
    state = MapState(grid=cfg.grid, target=cfg.target, time=0.0, u=initial_map(cfg))
    for step in range(1, cfg.n_steps + 1):
        if cfg.experiment == "parabolic-sm":
            state = parabolic_sm_step(state, cfg.dt, cfg.epsilon)
        elif cfg.target.kind == "sphere":
            state = heisenberg_step(state, cfg.dt)
        else:
            state = hyperbolic_sm_step(state, cfg.dt)
        if step % cfg.snapshot_every == 0:
            log.append(_map_row(state))
    write_snapshot(outdir / f"{cfg.run_id}.final.smfs", cfg.grid, cfg.target,
                   state.time, {"u": state.u})


def _make_provider(cfg: RunConfig):
    if cfg.preset in FIELD_PRESETS:
        if cfg.grid.dim != 1 or cfg.target is not SPHERE:
            raise ConfigError("initial.preset",
                              "field presets reconstruct 1D sphere maps only")
        return Nls1dTrajectory(grid=cfg.grid, q=initial_field(cfg), dt=cfg.dt)
    u = initial_map(cfg)
    e = best_reference_frame(cfg.target, u)
    state = gnls.gnls_state_from_map(cfg.target, cfg.grid, u, e)
    return GnlsTrajectory(state=state, dt=cfg.dt)


def _base(cfg: RunConfig) -> BasePointData:
    return BasePointData(m=cfg.base_m, v0=cfg.base_v0)


def _run_reconstruct(cfg: RunConfig, outdir: Path, log: diag.DiagnosticsLog) -> None:
    provider = _make_provider(cfg)
    states = reconstruct_trajectory(provider, _base(cfg), cfg.n_steps,
                                    cfg.snapshot_every)
    gap_dt = cfg.dt * cfg.snapshot_every
    for i, st in enumerate(states):
        if i == 0:
            continue  # log starts after t=0 (strictly increasing time column)
        res = np.nan
        if 0 < i < len(states) - 1:
            res = sm_residual(cfg.target, cfg.grid,
                              (states[i - 1], st, states[i + 1]), gap_dt)
        log.append(diag.DiagnosticsRow(
            time=st.time, residual_sm=res,
            constraint_max=float(np.max(np.abs(
                np.sum(st.u * st.u * cfg.target.metric_diag, axis=-1)
                - cfg.target.kappa))),
            periodicity_defect=states[0].periodicity_defect))
    last = states[-1]
    write_snapshot(outdir / f"{cfg.run_id}.final.smfs", cfg.grid, cfg.target,
                   last.time, {"u": last.u, "e": last.e})


def _run_roundtrip(cfg: RunConfig, outdir: Path, log: diag.DiagnosticsLog) -> None:
    """Direct map flow vs gauge-side evolution + reconstruction of one seed."""
    u0 = initial_map(cfg)
    direct_states = [MapState(grid=cfg.grid, target=cfg.target, time=0.0, u=u0)]
    state = direct_states[0]
    for step in range(1, cfg.n_steps + 1):
        if cfg.target.kind == "sphere":
            state = heisenberg_step(state, cfg.dt)
        else:
            state = hyperbolic_sm_step(state, cfg.dt)
        if step % cfg.snapshot_every == 0:
            direct_states.append(state)
            log.append(_map_row(state))

    e0 = best_reference_frame(cfg.target, u0)
    gstate, e_fixed = gnls.gnls_seed_from_map(cfg.target, cfg.grid, u0, e0)
    provider = GnlsTrajectory(state=gstate, dt=cfg.dt)
    center = cfg.grid.center_index
    base = BasePointData(m=u0[center], v0=e_fixed[center])
    recon = reconstruct_trajectory(provider, base, cfg.n_steps, cfg.snapshot_every)
    report = diag.equivalence_report(direct_states, recon)
    summary = {
        "times": report.times,
        "geodesic_gap": report.geodesic_gap,
        "max_gap": report.max_gap,
        "periodicity_defect": recon[0].periodicity_defect,
    }
    with open(outdir / f"{cfg.run_id}.roundtrip.json", "w") as fh:
        json.dump(summary, fh, indent=2)


_RUNNERS = {
    "nls1d": _run_nls1d,
    "gnls": _run_gnls,
    "parabolic-gnls": _run_gnls,
    "direct-sm": _run_direct,
    "parabolic-sm": _run_direct,
    "reconstruct": _run_reconstruct,
    "roundtrip": _run_roundtrip,
}


def execute(cfg: RunConfig, config_text: str, output_override: str | None = None,
            threads: int | None = None) -> Path:
    """Run one configured experiment; returns the output directory."""
    outdir = Path(output_override or cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    log = diag.DiagnosticsLog(outdir, cfg.run_id)
    start = _time.perf_counter()
    _RUNNERS[cfg.experiment](cfg, outdir, log)
    _write_manifest(outdir, cfg, config_text, _time.perf_counter() - start,
                    extra={"threads": threads})
    return outdir


def diagnose_snapshot(path) -> diag.DiagnosticsRow:
    """Recompute every functional a snapshot supports from its fields alone."""
    snap = read_snapshot(path)
    kwargs: dict = {}
    if "u" in snap.fields:
        state = MapState(grid=snap.grid, target=snap.target, time=snap.time,
                         u=snap.fields["u"])
        kwargs.update(energy=diag.energy_map(state),
                      moment=tuple(map_moment(state)),
                      killing=tuple(diag.killing_functionals(state)),
                      constraint_max=state.constraint_max())
    qnames = sorted(name for name in snap.fields if name in ("q", "q1", "q2"))
    if qnames:
        from .field import integrate
        total = sum(integrate(snap.grid, np.abs(snap.fields[n]) ** 2)
                    for n in qnames)
        kwargs["mass"] = 0.5 * total
    return diag.DiagnosticsRow(time=snap.time, **kwargs)
