"""Run configuration: flat INI files parsed into a validated RunConfig.

Layout::

    [run]
    experiment = nls1d        ; nls1d | gnls | parabolic-gnls | direct-sm |
                              ; parabolic-sm | reconstruct | roundtrip
    target = sphere           ; sphere | hyperbolic
    dt = 1e-3
    t_end = 1.0
    snapshot_every = 100      ; steps between logged rows (cadence)
    epsilon = 0.1             ; required iff the experiment is parabolic
    seed = 0
    output = out
    run_id = soliton          ; optional; defaults to the experiment name

    [grid]
    n = 1024                  ; comma-separated per axis for 2D
    length = 125.663706

    [initial]
    preset = soliton          ; or  snapshot = state.smfs
    b = 2.0                   ; remaining keys are preset parameters

    [base]                    ; reconstruct/roundtrip only
    m = 1, 0, 0
    v0 = 0, 1, 0
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigError
from .field import Grid
from .geometry import Target, target_from_name

EXPERIMENTS = ("nls1d", "gnls", "parabolic-gnls", "direct-sm",
               "parabolic-sm", "reconstruct", "roundtrip")
_PARABOLIC = ("parabolic-gnls", "parabolic-sm")


@dataclass
class RunConfig:
    experiment: str
    target: Target
    grid: Grid
    dt: float
    t_end: float
    snapshot_every: int
    output: str
    run_id: str
    seed: int = 0
    epsilon: float | None = None
    preset: str | None = None
    preset_params: dict[str, float] = dc_field(default_factory=dict)
    snapshot_path: str | None = None
    base_m: np.ndarray | None = None
    base_v0: np.ndarray | None = None

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def _get(section, key: str, cast, field: str, default=None):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(field, "missing required key")
    raw = section[key]
    try:
        return cast(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(field, f"cannot parse {raw!r}: {exc}") from exc


def _vector3(raw: str) -> np.ndarray:
    parts = [float(p) for p in raw.split(",")]
    if len(parts) != 3:
        raise ValueError("expected three comma-separated components")
    return np.asarray(parts)


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError("config", f"cannot read {path}")
    if "run" not in parser or "grid" not in parser:
        raise ConfigError("config", "sections [run] and [grid] are required")
    run = parser["run"]
    gridsec = parser["grid"]

    experiment = _get(run, "experiment", str, "run.experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError("run.experiment",
                          f"unknown experiment {experiment!r}; "
                          f"expected one of {', '.join(EXPERIMENTS)}")
    target = _get(run, "target", str, "run.target", default="sphere")
    try:
        target = target_from_name(target)
    except ValueError as exc:
        raise ConfigError("run.target", str(exc)) from exc

    dt = _get(run, "dt", float, "run.dt")
    if dt <= 0:
        raise ConfigError("run.dt", f"must be positive, got {dt}")
    t_end = _get(run, "t_end", float, "run.t_end")
    if t_end < 0:
        raise ConfigError("run.t_end", f"must be nonnegative, got {t_end}")
    snapshot_every = _get(run, "snapshot_every", int, "run.snapshot_every", default=1)
    if snapshot_every < 1:
        raise ConfigError("run.snapshot_every",
                          f"must be a positive step count, got {snapshot_every}")

    epsilon = None
    if experiment in _PARABOLIC:
        epsilon = _get(run, "epsilon", float, "run.epsilon")
        if epsilon <= 0:
            raise ConfigError("run.epsilon", f"must be positive, got {epsilon}")
    elif "epsilon" in run:
        raise ConfigError("run.epsilon",
                          f"only parabolic experiments take epsilon, not {experiment}")

    try:
        n = tuple(int(p) for p in gridsec.get("n", "").split(","))
        length = tuple(float(p) for p in gridsec.get("length", "").split(","))
        if len(length) == 1 and len(n) > 1:
            length = length * len(n)
        grid = Grid(n, length)
    except (ValueError, KeyError) as exc:
        raise ConfigError("grid", str(exc)) from exc

    preset = None
    preset_params: dict[str, float] = {}
    snapshot_path = None
    if "initial" in parser:
        init = parser["initial"]
        if "snapshot" in init:
            snapshot_path = init["snapshot"]
        elif "preset" in init:
            preset = init["preset"]
            for key in init:
                if key != "preset":
                    preset_params[key] = _get(init, key, float, f"initial.{key}")
        else:
            raise ConfigError("initial", "needs either 'preset' or 'snapshot'")
    else:
        raise ConfigError("initial", "section [initial] is required")

    base_m = base_v0 = None
    if "base" in parser:
        base_m = _get(parser["base"], "m", _vector3, "base.m")
        base_v0 = _get(parser["base"], "v0", _vector3, "base.v0")
    elif experiment in ("reconstruct", "roundtrip"):
        raise ConfigError("base", f"experiment {experiment} needs a [base] section")

    return RunConfig(
        experiment=experiment, target=target, grid=grid, dt=dt, t_end=t_end,
        snapshot_every=snapshot_every,
        output=_get(run, "output", str, "run.output", default="."),
        run_id=_get(run, "run_id", str, "run.run_id", default=experiment),
        seed=_get(run, "seed", int, "run.seed", default=0),
        epsilon=epsilon, preset=preset, preset_params=preset_params,
        snapshot_path=snapshot_path, base_m=base_m, base_v0=base_v0)
