"""Event-triggering rule and the controller policies of the closed loop.

The feedback is a distributed damping term -alpha * velocity; policies
differ only in when the velocity snapshot feeding the controller is
refreshed:

  continuous       every step (the idealized continuous-time controller)
  event_triggered  when the squared hold error exceeds 2*gamma*E
  periodic         at multiples of a fixed period tau
  fixed            never (the initial velocity is held forever)
  open_loop        no control at all

Updates are quantized to the solver time grid: the rule is evaluated once
per step on the freshly advanced state, and a refreshed snapshot acts from
the following step.  The dwell-time constants of the Zeno analysis are
computed here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .wave1d import Grid1D, WaveState, energy

POLICY_KINDS = ("continuous", "event_triggered", "periodic", "fixed", "open_loop")


@dataclass(frozen=True)
class ControllerPolicy:
    """Feedback policy; gamma is required for event_triggered, tau for
    periodic, alpha must be positive for every kind that actually acts."""

    kind: str
    alpha: float = 1.0
    gamma: float | None = None
    tau: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if self.kind != "open_loop" and not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive for {self.kind!r}, got {self.alpha!r}")
        if self.kind == "event_triggered":
            if self.gamma is None or not self.gamma > 0.0:
                raise ValueError(f"event_triggered requires gamma > 0, got {self.gamma!r}")
        if self.kind == "periodic":
            if self.tau is None or not self.tau > 0.0:
                raise ValueError(f"periodic requires tau > 0, got {self.tau!r}")


@dataclass(frozen=True)
class EventRecord:
    """One control update: index, time, dwell since the previous update
    (nan for the initial one), and the trigger-side quantities at firing."""

    k: int
    t: float
    dwell: float
    error_norm_sq: float
    energy: float


@dataclass
class TriggerState:
    """Mutable per-run sampling state: the held velocity snapshot, the
    last update instant and the append-only update log."""

    held_w: np.ndarray
    t_last: float = 0.0
    k: int = 0
    events: list[EventRecord] = field(default_factory=list)
    immediate_retriggers: int = 0

    @classmethod
    def initial(cls, state: WaveState, grid: Grid1D) -> "TriggerState":
        """Sampling state at t0: the snapshot is the initial velocity and
        the log opens with the initial hold (dwell undefined)."""
        trig = cls(held_w=state.w.copy(), t_last=state.t, k=0)
        trig.events.append(
            EventRecord(
                k=0,
                t=state.t,
                dwell=math.nan,
                error_norm_sq=0.0,
                energy=energy(state, grid),
            )
        )
        return trig

    def refresh(self, state: WaveState, grid: Grid1D, err_sq: float, dt: float) -> None:
        """Take a new snapshot at state.t and log the update.  Update
        instants must strictly increase."""
        dwell = state.t - self.t_last
        if dwell <= 0.0:
            raise ValueError(f"update instants must strictly increase (dwell={dwell!r})")
        if dwell <= 1.5 * dt:  # immediate retrigger: fired on the very next step
            self.immediate_retriggers += 1
        self.k += 1
        self.held_w = state.w.copy()
        self.t_last = state.t
        self.events.append(
            EventRecord(
                k=self.k,
                t=state.t,
                dwell=dwell,
                error_norm_sq=err_sq,
                energy=energy(state, grid),
            )
        )


def error_norm_sq(state: WaveState, trig: TriggerState, grid: Grid1D) -> float:
    """Squared L2 norm of the hold error: current velocity minus the held
    snapshot."""
    if trig.held_w.shape != state.w.shape:
        raise ValueError("held snapshot does not match the state dimension")
    diff = state.w - trig.held_w
    return grid.dx * float(np.dot(diff, diff))


def check_trigger(
    state: WaveState, trig: TriggerState, gamma: float, grid: Grid1D
) -> bool:
    """Strict trigger test: squared hold error above 2*gamma*energy.

    Strictness matters twice: right after an update the error is exactly
    zero and must not refire, and a zero-energy state with a stale nonzero
    snapshot must fire.
    """
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    return error_norm_sq(state, trig, grid) > 2.0 * gamma * energy(state, grid)


def control_field(
    policy: ControllerPolicy, state: WaveState, trig: TriggerState, grid: Grid1D
) -> np.ndarray:
    """Control field in force from state.t on; refreshes the snapshot (and
    logs the update) when the policy calls for one at this instant."""
    if policy.kind == "open_loop":
        return np.zeros(grid.n_interior)
    if policy.kind == "continuous":
        return -policy.alpha * state.w
    if policy.kind == "event_triggered":
        err_sq = error_norm_sq(state, trig, grid)
        if err_sq > 2.0 * policy.gamma * energy(state, grid):
            trig.refresh(state, grid, err_sq, grid.dt)
    elif policy.kind == "periodic":
        # Sample at multiples of tau, each rounded to the nearest grid step.
        t_next = round((trig.k + 1) * policy.tau / grid.dt) * grid.dt
        if state.t >= t_next - 0.5 * grid.dt and state.t > trig.t_last:
            trig.refresh(state, grid, error_norm_sq(state, trig, grid), grid.dt)
    # 'fixed' never refreshes: the initial snapshot acts forever.
    return -policy.alpha * trig.held_w


@dataclass(frozen=True)
class ZenoConstants:
    """Dwell-time bound ingredients.

    envelope_rate   C = alpha*(1 + sqrt(gamma)): |dE/dt| <= 2*C*E, so the
                    energy stays inside E(0)*exp(+-2*C*t).
    coeff_a         A = 2*alpha/sqrt(gamma) + alpha*(2 + sqrt(gamma))
    coeff_b         B = c1*sqrt(2/gamma), with c1 a bound on the L2 norm
                    of the Laplacian of the position field over the run.
    dwell_bound     1/(A + B*exp(C*horizon)/sqrt(e0)): every inter-update
                    interval on [0, horizon] is at least this long.
    """

    envelope_rate: float
    coeff_a: float
    coeff_b: float
    c1: float
    dwell_bound: float


def zeno_constants(
    alpha: float, gamma: float, c1: float, e0: float, horizon: float
) -> ZenoConstants:
    """Evaluate the dwell-time bound for a run with initial energy e0 over
    [0, horizon].  All inputs must be positive."""
    for name, value in (
        ("alpha", alpha), ("gamma", gamma), ("c1", c1), ("e0", e0), ("horizon", horizon),
    ):
        if not value > 0.0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    root = math.sqrt(gamma)
    envelope_rate = alpha * (1.0 + root)
    coeff_a = 2.0 * alpha / root + alpha * (2.0 + root)
    coeff_b = c1 * math.sqrt(2.0 / gamma)
    dwell_bound = 1.0 / (
        coeff_a + coeff_b * math.exp(envelope_rate * horizon) / math.sqrt(e0)
    )
    return ZenoConstants(
        envelope_rate=envelope_rate,
        coeff_a=coeff_a,
        coeff_b=coeff_b,
        c1=c1,
        dwell_bound=dwell_bound,
    )
