"""Stability certificates for event-triggered damping of the 1D wave equation.

The closed loop is certified exponentially stable with decay rate ``delta``
when a 4x4 symmetric matrix, assembled from the damping gain, a Lyapunov
cross-term weight, two S-procedure multipliers, the trigger threshold and
the Poincare constant of the domain, is negative definite.  The quadratic
form acts on (position, velocity, hold error, gradient).

This module builds that matrix, tests definiteness, evaluates the
closed-form feasibility conditions available at zero decay rate, and
searches for feasible parameter tuples, including the largest certifiable
decay rate for a given damping gain.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

# Strict-definiteness threshold: margins above -NEG_DEF_TOL are treated as
# indefinite so the boolean is reproducible under floating-point noise.
NEG_DEF_TOL = 1e-9


@dataclass(frozen=True)
class CertificateParams:
    """One candidate stability certificate.

    alpha    -- damping gain of the velocity feedback (> 0)
    epsilon  -- weight of the position/velocity cross terms in the
                Lyapunov functional (> 0)
    delta    -- certified exponential decay rate (>= 0)
    lambda1  -- multiplier of the Poincare-inequality constraint (> 0)
    lambda2  -- multiplier of the trigger-rule constraint (> 0)
    gamma    -- trigger threshold: an update fires when the squared hold
                error exceeds 2*gamma*E (> 0)
    c_omega  -- Poincare constant of the spatial domain (> 0); L/pi for
                the interval (0, L)
    """

    alpha: float
    epsilon: float
    delta: float
    lambda1: float
    lambda2: float
    gamma: float
    c_omega: float = 1.0

    def __post_init__(self) -> None:
        for name in ("alpha", "epsilon", "lambda1", "lambda2", "gamma", "c_omega"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be nonnegative, got {self.delta!r}")

    @property
    def gamma_bar(self) -> float:
        """Combined trigger weight lambda2*gamma used by the search."""
        return self.lambda2 * self.gamma


def decompose_certificate_matrix(
    p: CertificateParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split the certificate matrix into dynamics + constraint terms.

    Returns (dynamics, poincare, trigger) with
    certificate_matrix(p) == dynamics + lambda1*poincare + lambda2*trigger
    exactly (same floating-point operation order on every entry).

    ``dynamics`` collects the terms of d/dt V + 2*delta*V along closed-loop
    trajectories; ``poincare`` encodes |z|^2 <= c_omega^2 |grad z|^2 and
    ``trigger`` encodes the inter-event bound |e|^2 <= gamma*(|z_t|^2 +
    |grad z|^2).
    """
    a, e, d = p.alpha, p.epsilon, p.delta
    dynamics = np.zeros((4, 4))
    dynamics[0, 0] = a * e * d
    dynamics[0, 1] = dynamics[1, 0] = d * e
    dynamics[0, 2] = dynamics[2, 0] = a * e / 2.0
    dynamics[1, 1] = e - a + d
    dynamics[1, 2] = dynamics[2, 1] = a / 2.0
    dynamics[3, 3] = d - e
    poincare = np.diag([-1.0, 0.0, 0.0, p.c_omega * p.c_omega])
    trigger = np.diag([0.0, p.gamma, -1.0, p.gamma])
    return dynamics, poincare, trigger


def certificate_matrix(p: CertificateParams) -> np.ndarray:
    """Assemble the 4x4 symmetric matrix whose negative definiteness
    certifies exponential decay at rate ``p.delta``."""
    a, e, d = p.alpha, p.epsilon, p.delta
    l1, l2, g = p.lambda1, p.lambda2, p.gamma
    cc = p.c_omega * p.c_omega
    m = np.zeros((4, 4))
    m[0, 0] = a * e * d + l1 * -1.0
    m[0, 1] = m[1, 0] = d * e
    m[0, 2] = m[2, 0] = a * e / 2.0
    m[1, 1] = e - a + d + l2 * g
    m[1, 2] = m[2, 1] = a / 2.0
    m[2, 2] = l2 * -1.0
    m[3, 3] = d - e + l1 * cc + l2 * g
    return m


def is_negative_definite(m: np.ndarray) -> tuple[bool, float]:
    """Test strict negative definiteness of a symmetric matrix.

    Returns (feasible, margin) where margin is the largest eigenvalue;
    feasible is True only when margin < -NEG_DEF_TOL.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix must be exactly symmetric")
    margin = float(np.linalg.eigvalsh(m)[-1])
    return margin < -NEG_DEF_TOL, margin


def cholesky_negative_definite(m: np.ndarray) -> bool:
    """Definiteness boolean via attempted Cholesky factorization of -m.

    Independent of the eigenvalue route; the two agree whenever the
    largest eigenvalue is away from the +-NEG_DEF_TOL band.
    """
    try:
        np.linalg.cholesky(-np.asarray(m, dtype=float))
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class ConditionReport:
    """Closed-form feasibility conditions at zero decay rate.

    With delta = 0 the negated certificate matrix is block diagonal; it is
    positive definite iff the multipliers are positive, two scalar margins
    are positive and a 2x2 Schur complement is positive definite.
    """

    multipliers_positive: bool
    velocity_residual: float  # alpha - epsilon - gamma_bar, must be > 0
    gradient_residual: float  # epsilon - lambda1*c^2 - gamma_bar, must be > 0
    schur_min_eig: float      # smallest eigenvalue of the 2x2 Schur complement
    all_satisfied: bool


def zero_decay_conditions(p: CertificateParams) -> ConditionReport:
    """Evaluate the scalar + Schur-complement conditions at delta = 0.

    Their conjunction is equivalent to negative definiteness of the
    certificate matrix built from the same tuple.
    """
    if p.delta != 0.0:
        raise ValueError(f"conditions apply at delta = 0 only, got delta={p.delta!r}")
    gb = p.gamma_bar
    multipliers_positive = p.lambda1 > 0.0 and p.lambda2 > 0.0
    velocity_residual = p.alpha - p.epsilon - gb
    gradient_residual = p.epsilon - p.lambda1 * p.c_omega * p.c_omega - gb
    a2 = p.alpha * p.alpha / (4.0 * p.lambda2)
    schur = np.array(
        [
            [p.lambda1 - a2 * p.epsilon * p.epsilon, -a2 * p.epsilon],
            [-a2 * p.epsilon, velocity_residual - a2],
        ]
    )
    schur_min_eig = float(np.linalg.eigvalsh(schur)[0])
    all_satisfied = (
        multipliers_positive
        and velocity_residual > 0.0
        and gradient_residual > 0.0
        and schur_min_eig > 0.0
    )
    return ConditionReport(
        multipliers_positive=multipliers_positive,
        velocity_residual=velocity_residual,
        gradient_residual=gradient_residual,
        schur_min_eig=schur_min_eig,
        all_satisfied=all_satisfied,
    )


def minimal_lambda2(
    alpha: float, epsilon: float, gamma_bar: float, lambda1: float
) -> float:
    """Smallest trigger multiplier closing the 2x2 Schur complement.

    The complement's determinant is linear in a = alpha^2/(4*lambda2):
    det = lambda1*q - a*(lambda1 + q*epsilon^2) with q = alpha - epsilon -
    gamma_bar, so positive definiteness amounts to a single threshold on a.
    Requires q > 0 and lambda1 > 0.
    """
    q = alpha - epsilon - gamma_bar
    if q <= 0.0 or lambda1 <= 0.0:
        raise ValueError("requires alpha - epsilon - gamma_bar > 0 and lambda1 > 0")
    a_max = lambda1 * q / (lambda1 + q * epsilon * epsilon)
    return alpha * alpha / (4.0 * a_max)


@dataclass(frozen=True)
class SearchOptions:
    """Deterministic grid for the feasibility search.

    lambda1_fractions are taken relative to alpha/c_omega^2, gamma_bar
    fractions relative to alpha, and epsilon_positions locate epsilon
    inside its admissible window (lambda1*c^2 + gamma_bar, alpha -
    gamma_bar).  lambda2 is the closed-form minimum inflated by
    lambda2_inflation.  delta_resolution is the bisection grid for the
    decay rate; find_feasible backs the rate off by delta_safety to keep a
    usable definiteness margin.
    """

    lambda1_fractions: tuple[float, ...] = (0.01, 0.02, 0.05, 0.1, 0.2, 0.4)
    gamma_bar_fractions: tuple[float, ...] = (0.02, 0.05, 0.1, 0.2, 0.3)
    epsilon_positions: tuple[float, ...] = (0.25, 0.5, 0.75)
    lambda2_inflation: float = 1.1
    delta_resolution: float = 1e-4
    delta_safety: float = 0.8


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a certificate search or audit."""

    params: CertificateParams
    max_eigenvalue: float
    feasible: bool
    search_iterations: int = 0

    def __post_init__(self) -> None:
        if self.feasible and not self.max_eigenvalue < 0.0:
            raise ValueError("feasible report requires a negative margin")

    def to_dict(self) -> dict:
        p = self.params
        return {
            "alpha": p.alpha,
            "epsilon": p.epsilon,
            "delta": p.delta,
            "lambda1": p.lambda1,
            "lambda2": p.lambda2,
            "gamma": p.gamma,
            "c_omega": p.c_omega,
            "margin": self.max_eigenvalue,
            "feasible": self.feasible,
            "search_iterations": self.search_iterations,
        }

    def to_kv(self) -> str:
        """Flat key=value block, one entry per line, full precision."""
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, bool):
                lines.append(f"{key}={'true' if value else 'false'}")
            else:
                lines.append(f"{key}={value!r}")
        return "\n".join(lines) + "\n"


def audit(p: CertificateParams) -> FeasibilityReport:
    """Report the definiteness margin of an explicitly given tuple."""
    feasible, margin = is_negative_definite(certificate_matrix(p))
    return FeasibilityReport(params=p, max_eigenvalue=margin, feasible=feasible)


def _max_feasible_delta(
    base: CertificateParams, resolution: float
) -> tuple[float, int]:
    """Largest delta on the resolution grid keeping the matrix negative
    definite with the remaining parameters frozen.

    The delta-dependent part of the matrix is positive semidefinite
    whenever epsilon <= alpha (always true for tuples from the
    constructive search), so feasibility is monotone in delta and
    bisection applies.  Returns (delta, evaluation count).
    """
    evals = 0

    def feasible_at(d: float) -> bool:
        nonlocal evals
        evals += 1
        ok, _ = is_negative_definite(
            certificate_matrix(dataclasses.replace(base, delta=d))
        )
        return ok

    if not feasible_at(0.0):
        return -1.0, evals
    # The (velocity, velocity) entry forces delta < alpha, so alpha is a
    # safe infeasible upper end.
    lo, hi = 0.0, base.alpha
    if feasible_at(hi):  # pragma: no cover - defensive, cannot happen
        return hi, evals
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if feasible_at(mid):
            lo = mid
        else:
            hi = mid
    return lo, evals


def _candidate_grid(
    alpha: float, c_omega: float, options: SearchOptions
) -> list[tuple[float, float, float]]:
    """Deterministic (lambda1, gamma_bar, epsilon) candidates honoring the
    zero-decay scalar conditions, in fixed lexicographic order."""
    cc = c_omega * c_omega
    grid = []
    for f1 in options.lambda1_fractions:
        lambda1 = f1 * alpha / cc
        for fg in options.gamma_bar_fractions:
            gamma_bar = fg * alpha
            lo = lambda1 * cc + gamma_bar
            hi = alpha - gamma_bar
            if lo >= hi:
                continue
            for fe in options.epsilon_positions:
                grid.append((lambda1, gamma_bar, lo + fe * (hi - lo)))
    return grid


def _search(
    alpha: float, c_omega: float, options: SearchOptions
) -> tuple[CertificateParams | None, float, int]:
    """Shared search: returns (best zero-decay tuple, its max delta on the
    bisection grid, total evaluations).  Ties on delta break
    lexicographically on (lambda1, gamma_bar, epsilon)."""
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    if not c_omega > 0.0:
        raise ValueError(f"c_omega must be positive, got {c_omega!r}")
    best: CertificateParams | None = None
    best_delta = -1.0
    iterations = 0
    for lambda1, gamma_bar, epsilon in _candidate_grid(alpha, c_omega, options):
        lambda2 = options.lambda2_inflation * minimal_lambda2(
            alpha, epsilon, gamma_bar, lambda1
        )
        candidate = CertificateParams(
            alpha=alpha,
            epsilon=epsilon,
            delta=0.0,
            lambda1=lambda1,
            lambda2=lambda2,
            gamma=gamma_bar / lambda2,
            c_omega=c_omega,
        )
        delta, evals = _max_feasible_delta(candidate, options.delta_resolution)
        iterations += evals
        if delta > best_delta:
            best, best_delta = candidate, delta
    return best, best_delta, iterations


def find_feasible(
    alpha: float, c_omega: float = 1.0, options: SearchOptions | None = None
) -> FeasibilityReport:
    """Search for a feasible certificate with a usable decay rate.

    Walks the deterministic candidate grid, lifts the decay rate of the
    best candidate by bisection and returns it backed off by
    options.delta_safety so the definiteness margin stays healthy.  A
    feasible tuple exists for every alpha > 0; an infeasible report from
    this search indicates an options grid that is too coarse.
    """
    options = options or SearchOptions()
    best, best_delta, iterations = _search(alpha, c_omega, options)
    if best is None or best_delta < 0.0:
        # Not reachable with the default grid; reported rather than raised.
        fallback = CertificateParams(
            alpha=alpha, epsilon=alpha / 2.0, delta=0.0,
            lambda1=alpha / 4.0, lambda2=1.0, gamma=alpha / 4.0, c_omega=c_omega,
        )
        return FeasibilityReport(
            params=fallback,
            max_eigenvalue=float(
                np.linalg.eigvalsh(certificate_matrix(fallback))[-1]
            ),
            feasible=False,
            search_iterations=iterations,
        )
    params = dataclasses.replace(best, delta=options.delta_safety * best_delta)
    feasible, margin = is_negative_definite(certificate_matrix(params))
    return FeasibilityReport(
        params=params,
        max_eigenvalue=margin,
        feasible=feasible,
        search_iterations=iterations,
    )


def max_decay_rate(
    alpha: float, c_omega: float = 1.0, options: SearchOptions | None = None
) -> tuple[float, CertificateParams]:
    """Largest certifiable decay rate over the search grid.

    Returns (delta_star, params) where params rebuilds to a negative
    definite matrix at delta_star (the lower end of the final bisection
    bracket, so the margin is strictly inside the feasible region).
    """
    options = options or SearchOptions()
    best, best_delta, _ = _search(alpha, c_omega, options)
    if best is None or best_delta < 0.0:
        raise RuntimeError(
            "no feasible certificate found; widen the search grid"
        )
    params = dataclasses.replace(best, delta=best_delta)
    feasible, _ = is_negative_definite(certificate_matrix(params))
    if not feasible:  # pragma: no cover - bisection keeps the lower end feasible
        raise RuntimeError("bisection returned an infeasible decay rate")
    return best_delta, params
