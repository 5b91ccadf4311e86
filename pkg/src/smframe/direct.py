"""Direct geometric integrators on the map side.

The Heisenberg flow on S^2 and the divergence-form flow on H^2,

    du/dt = d_k ( u x d_k u )          (sphere)
    du/dt = eta d_k ( u x d_k u )      (hyperboloid)

are stepped with classical RK4 on the divergence form (whose integral is
killed exactly by the spectral derivative, so int u is conserved to the
retraction error), followed by a retraction onto the constraint set.

The parabolic perturbation of the hyperbolic flow,

    du/dt = (eta d_k (u x d_k u) + eps (Lap u - <grad u, eta grad u> u)) / (1 + eps^2),

uses a Lawson integrating-factor Heun step: the dissipative linear part
eps Lap / (1 + eps^2) is exact in Fourier space, everything else explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import geometry as geo
from .errors import DegenerateRetraction, InvalidStep
from .field import Grid, integrate, spectral_derivative
from .gnls import check_cfl


@dataclass(frozen=True)
class MapState:
    """Immutable map-valued state u(t, x)."""

    grid: Grid
    target: geo.Target
    time: float
    u: np.ndarray

    def constraint_max(self) -> float:
        return float(np.max(np.abs(geo.constraint_defect(self.target, self.u))))


def flux_divergence(target: geo.Target, grid: Grid, u: np.ndarray) -> np.ndarray:
    """sum_k d_k J(u x d_k u): the divergence-form right-hand side."""
    out = np.zeros_like(u)
    for k in range(grid.dim):
        flux = geo.j_apply(target, u, spectral_derivative(grid, u, k))
        out += spectral_derivative(grid, flux, k)
    return out


def _rk4_map(target: geo.Target, grid: Grid, u: np.ndarray, dt: float) -> np.ndarray:
    k1 = flux_divergence(target, grid, u)
    k2 = flux_divergence(target, grid, u + 0.5 * dt * k1)
    k3 = flux_divergence(target, grid, u + 0.5 * dt * k2)
    k4 = flux_divergence(target, grid, u + dt * k3)
    return u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def heisenberg_step(state: MapState, dt: float) -> MapState:
    """RK4 step of the Heisenberg model du/dt = d_k(u x d_k u) on S^2."""
    if state.target.kind != "sphere":
        raise ValueError("heisenberg_step needs a sphere target")
    check_cfl(state.grid, dt)
    u = _rk4_map(state.target, state.grid, state.u, dt)
    return replace(state, time=state.time + dt, u=geo.retract(state.target, u))


def hyperbolic_sm_step(state: MapState, dt: float, _retried: bool = False) -> MapState:
    """RK4 step of du/dt = eta d_k(u x d_k u) on H^2.

    A failed Lorentz retraction signals instability: the step is retried
    once with two half steps, then the failure propagates.
    """
    if state.target.kind != "hyperbolic":
        raise ValueError("hyperbolic_sm_step needs a hyperbolic target")
    check_cfl(state.grid, dt)
    try:
        u = _rk4_map(state.target, state.grid, state.u, dt)
        u = geo.retract(state.target, u)
    except DegenerateRetraction:
        if _retried:
            raise
        half = hyperbolic_sm_step(state, dt / 2.0, _retried=True)
        return hyperbolic_sm_step(half, dt / 2.0, _retried=True)
    return replace(state, time=state.time + dt, u=u)


def parabolic_sm_step(state: MapState, dt: float, epsilon: float) -> MapState:
    """Lawson-Heun step of the parabolically perturbed hyperbolic flow."""
    if state.target.kind != "hyperbolic":
        raise ValueError("parabolic_sm_step needs a hyperbolic target")
    if dt <= 0:
        raise InvalidStep(f"dt must be positive, got {dt}")
    if epsilon <= 0:
        raise InvalidStep(f"epsilon must be positive, got {epsilon}")
    tg, grid = state.target, state.grid
    nu = epsilon / (1.0 + epsilon**2)
    propagator = np.exp(-nu * grid.k_squared * dt)[..., np.newaxis]
    axes = tuple(range(grid.dim))

    def apply_linear(v):
        return np.fft.ifftn(np.fft.fftn(v, axes=axes) * propagator, axes=axes).real

    def nonlinear(v):
        grad_sq = np.zeros(grid.shape)
        for k in range(grid.dim):
            dv = spectral_derivative(grid, v, k)
            grad_sq += geo.inner(tg, dv, dv)
        return (flux_divergence(tg, grid, v) / (1.0 + epsilon**2)
                - nu * grad_sq[..., np.newaxis] * v)

    u = state.u
    n0 = nonlinear(u)
    predictor = apply_linear(u + dt * n0)
    n1 = nonlinear(predictor)
    u_new = apply_linear(u + 0.5 * dt * n0) + 0.5 * dt * n1
    return replace(state, time=state.time + dt, u=geo.retract(tg, u_new))


def hyperbolic_view(state: MapState, sinh_floor: float = 1e-6
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Derived hyperbolic coordinates (chi, theta, theta_defined_mask).

    theta is meaningless at the coordinate singularity chi = 0; the mask
    flags where sinh(chi) is large enough for it to be trusted.
    """
    if state.target.kind != "hyperbolic":
        raise ValueError("hyperbolic coordinates need a hyperbolic target")
    u = state.u
    chi = np.arccosh(np.clip(u[..., 0], 1.0, None))
    mask = np.sinh(chi) >= sinh_floor
    theta = np.where(mask, np.arctan2(u[..., 2], u[..., 1]), 0.0)
    return chi, theta, mask


def map_moment(state: MapState) -> np.ndarray:
    """int u dx for S^2; int (u - base point) dx for H^2 (first entry is
    the conserved moment int (u0 - 1))."""
    if state.target.kind == "sphere":
        return np.asarray(integrate(state.grid, state.u))
    return np.asarray(integrate(state.grid, state.u - state.target.base_point))
