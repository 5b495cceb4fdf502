"""Explicit finite-difference solver for the damped 1D wave equation.

Domain (0, L) with homogeneous Dirichlet boundaries, uniform grid of
interior nodes, unit wave speed.  The solver advances the first-order
system (z, w = dz/dt) with a kick-drift-kick (velocity-Verlet) step so the
velocity field, which the triggering rule and the controllers sample, is
an explicit state rather than a reconstructed difference.  The forcing
term is held constant across one step.

Discrete functionals follow summation-by-parts conventions: L2 norms by
the rectangle rule over interior nodes, the gradient norm by forward
differences over all cell edges including both boundary edges (ghost
values zero), so the semi-discrete energy balance matches the continuous
one to second order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform space-time grid.  courant = dt/dx must not exceed 1 (CFL
    bound for unit wave speed)."""

    length: float = math.pi
    n_interior: int = 255
    courant: float = 0.5

    def __post_init__(self) -> None:
        if not self.length > 0.0:
            raise ValueError(f"length must be positive, got {self.length!r}")
        if self.n_interior < 1:
            raise ValueError(f"n_interior must be >= 1, got {self.n_interior!r}")
        if not 0.0 < self.courant <= 1.0:
            raise ValueError(
                f"courant number must lie in (0, 1], got {self.courant!r}"
            )

    @property
    def dx(self) -> float:
        return self.length / (self.n_interior + 1)

    @property
    def dt(self) -> float:
        return self.courant * self.dx

    @property
    def x(self) -> np.ndarray:
        """Interior node coordinates (boundaries excluded)."""
        return self.dx * np.arange(1, self.n_interior + 1)


@dataclass(frozen=True)
class WaveState:
    """Position and velocity fields over the interior nodes at time t.
    Boundary values are identically zero and never stored."""

    t: float
    z: np.ndarray
    w: np.ndarray

    def __post_init__(self) -> None:
        if self.z.shape != self.w.shape or self.z.ndim != 1:
            raise ValueError("z and w must be 1D arrays of identical length")


def laplacian(z: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Three-point second difference with zero Dirichlet ghost values."""
    if len(z) != grid.n_interior:
        raise ValueError(
            f"field length {len(z)} does not match grid ({grid.n_interior})"
        )
    padded = np.zeros(len(z) + 2)
    padded[1:-1] = z
    return (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / (grid.dx * grid.dx)


def step(state: WaveState, control: np.ndarray, grid: Grid1D) -> WaveState:
    """Advance one time step with the forcing field held constant.

    Kick-drift-kick: half-step velocity update, full-step position,
    half-step velocity with the new position's Laplacian.  Second order in
    dt for a forcing that is constant over the step.
    """
    if len(control) != grid.n_interior:
        raise ValueError(
            f"control length {len(control)} does not match grid ({grid.n_interior})"
        )
    dt = grid.dt
    w_half = state.w + 0.5 * dt * (laplacian(state.z, grid) + control)
    z_new = state.z + dt * w_half
    w_new = w_half + 0.5 * dt * (laplacian(z_new, grid) + control)
    return WaveState(t=state.t + dt, z=z_new, w=w_new)


def energy(state: WaveState, grid: Grid1D) -> float:
    """Discrete energy: half the squared L2 norms of velocity and spatial
    gradient (edge differences, boundary edges included)."""
    dx = grid.dx
    kinetic = 0.5 * dx * float(np.dot(state.w, state.w))
    edges = np.diff(np.concatenate(([0.0], state.z, [0.0])))
    potential = 0.5 * float(np.dot(edges, edges)) / dx
    return kinetic + potential


def lyapunov(state: WaveState, grid: Grid1D, alpha: float, epsilon: float) -> float:
    """Lyapunov functional: energy plus the certificate's cross terms
    (alpha*epsilon/2)*|z|^2 + epsilon*<z, w>.  epsilon = 0 recovers the
    energy exactly."""
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon!r}")
    dx = grid.dx
    zz = float(np.dot(state.z, state.z))
    zw = float(np.dot(state.z, state.w))
    return energy(state, grid) + 0.5 * alpha * epsilon * dx * zz + epsilon * dx * zw


def laplacian_norm(state: WaveState, grid: Grid1D) -> float:
    """Discrete L2 norm of the Laplacian of the position field; its
    running maximum bounds the hold-error growth in the dwell-time
    estimate."""
    lap = laplacian(state.z, grid)
    return math.sqrt(grid.dx * float(np.dot(lap, lap)))
