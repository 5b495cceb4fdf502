"""Post-hoc verification of certified properties on recorded traces.

Each check returns a result with a pass flag, the worst residual and
where it occurred.  Hard checks are the ones the certificate chain
actually guarantees:

  * Lyapunov decrease between updates at the certified rate,
  * the two-sided energy envelope with rate alpha*(1 + sqrt(gamma)),
  * the upper norm-equivalence bound V <= C_r * E,
  * the dwell-time lower bound and finiteness of the update count.

The lower norm-equivalence bound E <= V is asserted in the certificate's
derivation but does not hold pointwise along oscillatory trajectories
(the cross term epsilon*<z, w> turns negative whenever exp(alpha*t)*|z|^2
momentarily decreases).  It is therefore checked and reported as a
warning rather than enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .trace import TraceRecord
from .trigger import ZenoConstants, zeno_constants


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verification check."""

    name: str
    passed: bool
    worst_residual: float
    worst_time: float
    details: str = ""
    warnings: tuple[str, ...] = ()


@dataclass
class VerificationReport:
    """Collection of check results for one trace."""

    entries: list[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_text(self) -> str:
        lines = [
            f"{'check':<22} {'status':<6} {'worst residual':>16} {'at t':>10}  details",
            "-" * 88,
        ]
        for e in self.entries:
            status = "pass" if e.passed else "FAIL"
            t_txt = f"{e.worst_time:.4f}" if math.isfinite(e.worst_time) else "-"
            lines.append(
                f"{e.name:<22} {status:<6} {e.worst_residual:>16.6e} {t_txt:>10}  {e.details}"
            )
            for w in e.warnings:
                lines.append(f"{'':<22} warn   {w}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "checks": [
                {
                    "name": e.name,
                    "passed": e.passed,
                    "worst_residual": e.worst_residual,
                    "worst_time": e.worst_time,
                    "details": e.details,
                    "warnings": list(e.warnings),
                }
                for e in self.entries
            ],
        }


def _worst(values: np.ndarray, times: np.ndarray) -> tuple[float, float]:
    if len(values) == 0:
        return 0.0, math.nan
    i = int(np.argmax(values))
    return float(values[i]), float(times[i])


def verify_lyapunov_decrease(
    trace: TraceRecord,
    delta: float,
    tol_abs: float = 1e-12,
    tol_rel: float | None = None,
) -> CheckResult:
    """Check (V[n+1] - V[n])/dt + 2*delta*V[n] <= tol at every step whose
    endpoints are both update-free (the controller jumps at updates, so V
    is only piecewise smooth there).  The default relative tolerance
    1e-2*dt + 1e-6 absorbs the finite-difference discretization error."""
    if delta < 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    if len(trace.V) != len(trace.t) or not np.any(np.isfinite(trace.V)):
        raise ValueError("trace carries no Lyapunov column")
    dt = trace.meta.dt
    if tol_rel is None:
        tol_rel = 1e-2 * dt + 1e-6
    V = trace.V
    lhs = (V[1:] - V[:-1]) / dt + 2.0 * delta * V[:-1]
    allowance = tol_abs + tol_rel * V[:-1]
    between = ~(trace.event_flag[:-1] | trace.event_flag[1:])
    residuals = (lhs - allowance)[between]
    worst, worst_t = _worst(residuals, trace.t[:-1][between])
    return CheckResult(
        name="lyapunov_decrease",
        passed=bool(np.all(residuals <= 0.0)),
        worst_residual=worst,
        worst_time=worst_t,
        details=f"delta={delta!r}, {int(np.sum(between))} inter-update steps",
    )


def verify_envelope(
    trace: TraceRecord, alpha: float, gamma: float | None, rel_tol: float = 1e-6
) -> CheckResult:
    """Check E(0)*exp(-2Ct) <= E(t) <= E(0)*exp(+2Ct) with the envelope
    rate C = alpha*(1 + sqrt(gamma)); alpha = 0 degenerates to exact
    conservation."""
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha!r}")
    if alpha == 0.0:
        rate = 0.0
    else:
        if gamma is None or gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {gamma!r}")
        rate = alpha * (1.0 + math.sqrt(gamma))
    e0 = trace.E[0]
    lower = e0 * np.exp(-2.0 * rate * trace.t)
    upper = e0 * np.exp(2.0 * rate * trace.t)
    scale = np.maximum(np.maximum(lower, trace.E), 1e-300)
    viol = np.maximum((lower - trace.E) / scale, (trace.E - upper) / np.maximum(upper, 1e-300))
    worst, worst_t = _worst(viol, trace.t)
    return CheckResult(
        name="energy_envelope",
        passed=bool(worst <= rel_tol),
        worst_residual=worst,
        worst_time=worst_t,
        details=f"rate C={rate!r}",
    )


def equivalence_constant(epsilon: float, alpha: float, c_omega: float) -> float:
    """Upper norm-equivalence constant C_r = 1 + eps*c + eps*alpha*c^2."""
    return 1.0 + epsilon * c_omega + epsilon * alpha * c_omega * c_omega


def verify_norm_equivalence(
    trace: TraceRecord,
    epsilon: float,
    alpha: float,
    c_omega: float,
    rel_tol: float = 1e-9,
) -> CheckResult:
    """Check the equivalence band between E and V.

    The upper bound V <= C_r*E with C_r = 1 + epsilon*c_omega +
    epsilon*alpha*c_omega^2 follows from Cauchy-Schwarz, Young and
    Poincare and is enforced.  The lower bound E <= V is reported: see the
    module docstring for why it fails pointwise on oscillatory runs.
    """
    c_r = equivalence_constant(epsilon, alpha, c_omega)
    bound = c_r * trace.E
    upper_viol = (trace.V - bound) / np.maximum(bound, 1e-300)
    worst, worst_t = _worst(upper_viol, trace.t)
    lower_viol = (trace.E - trace.V) / np.maximum(trace.E, 1e-300)
    lworst, lworst_t = _worst(lower_viol, trace.t)
    warnings = ()
    if lworst > rel_tol:
        count = int(np.sum(lower_viol > rel_tol))
        warnings = (
            f"lower bound E <= V violated at {count} steps, "
            f"worst (E-V)/E = {lworst:.6e} at t = {lworst_t:.4f} "
            "(known gap in the pointwise lower bound; reported, not enforced)",
        )
    return CheckResult(
        name="norm_equivalence",
        passed=bool(worst <= rel_tol),
        worst_residual=worst,
        worst_time=worst_t,
        details=f"C_r={c_r!r}, lower-bound worst residual {lworst:.6e}",
        warnings=warnings,
    )


def fit_decay(trace: TraceRecord, window: tuple[float, float | None] = (2.0, None)) -> float:
    """Exponential decay rate estimate: least-squares slope of log E over
    the window, divided by -2.  Requires strictly positive energies there."""
    lo, hi = window
    hi = trace.t[-1] if hi is None else hi
    mask = (trace.t >= lo) & (trace.t <= hi)
    if int(np.sum(mask)) < 2:
        raise ValueError(f"window [{lo}, {hi}] selects fewer than two samples")
    E = trace.E[mask]
    if np.any(E <= 0.0):
        raise ValueError("non-positive energies in the fit window")
    slope = np.polyfit(trace.t[mask], np.log(E), 1)[0]
    return float(-0.5 * slope)


def zeno_report(
    trace: TraceRecord, constants: ZenoConstants | None = None
) -> CheckResult:
    """Dwell-time diagnostics: update count, dwell statistics and the
    lower bound when the constants are available.  An empty update log
    reports zero updates and passes vacuously."""
    n_up = trace.n_updates
    dwells = trace.dwells()
    if constants is None and trace.meta.gamma is not None and trace.meta.c1 > 0.0 and trace.meta.e0 > 0.0:
        constants = zeno_constants(
            trace.meta.alpha,
            trace.meta.gamma,
            trace.meta.c1,
            trace.meta.e0,
            trace.meta.horizon,
        )
    finite = n_up <= len(trace.t)  # at most one update per step by construction
    stats = (
        f"N_up={n_up}"
        if len(dwells) == 0
        else f"N_up={n_up}, dwell min/mean/max = "
        f"{np.min(dwells):.6f}/{np.mean(dwells):.6f}/{np.max(dwells):.6f}"
    )
    if trace.meta.immediate_retriggers:
        stats += f", immediate retriggers={trace.meta.immediate_retriggers}"
    if constants is None or len(dwells) == 0:
        return CheckResult(
            name="zeno_dwell",
            passed=finite,
            worst_residual=0.0,
            worst_time=math.nan,
            details=stats + (", bound not evaluated" if constants is None else ", bound vacuous"),
        )
    margin = constants.dwell_bound - float(np.min(dwells))
    return CheckResult(
        name="zeno_dwell",
        passed=finite and margin <= 0.0,
        worst_residual=margin,
        worst_time=float(trace.events[int(np.argmin(dwells)) + 1].t),
        details=stats + f", dwell_bound={constants.dwell_bound:.6e}",
    )


def verify_all(trace: TraceRecord) -> VerificationReport:
    """Run every check the trace metadata supports."""
    meta = trace.meta
    report = VerificationReport()
    if meta.delta is not None:
        report.entries.append(verify_lyapunov_decrease(trace, meta.delta))
    if meta.policy == "event_triggered" or meta.alpha == 0.0:
        report.entries.append(verify_envelope(trace, meta.alpha, meta.gamma))
    if meta.epsilon > 0.0:
        report.entries.append(
            verify_norm_equivalence(trace, meta.epsilon, meta.alpha, meta.c_omega)
        )
    report.entries.append(zeno_report(trace))
    return report
