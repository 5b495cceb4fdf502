"""Command-line entry point.

Subcommands:

  certify    search certificate parameters for a damping gain, or audit an
             explicitly given tuple
  simulate   run one closed-loop simulation and write trace/event CSVs
  compare    run the four controller variants on one grid and write a
             combined energy CSV plus per-policy traces and field snapshots
  sweep      run a family of event-triggered (gamma) or periodically
             sampled (tau) loops and tabulate the outcomes
  verify     re-check certified properties on written trace files

Configuration is a plain-text key=value file; every key can be overridden
by the matching command-line flag.  Initial conditions are closed-form
profiles from a small grammar: sums of a*sin(k*x), a*x*(L-x) and constant
terms.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from . import certificate as cert
from .analysis import VerificationReport, fit_decay, verify_all
from .simulate import run_closed_loop
from .trace import (
    COMPARE_SCHEMA,
    SWEEP_SCHEMA,
    TraceRecord,
    read_events,
    read_trace,
    write_events,
    write_fields,
    write_trace,
)
from .trigger import ControllerPolicy
from .wave1d import Grid1D

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_SIN_TERM = re.compile(
    rf"^(?P<coef>{_NUMBER})?\s*\*?\s*sin\(\s*(?:(?P<freq>{_NUMBER})\s*\*\s*)?x\s*\)$"
)
_PARABOLA_TERM = re.compile(rf"^(?P<coef>{_NUMBER})?\s*\*?\s*x\s*\*\s*\(\s*L\s*-\s*x\s*\)$")
_CONST_TERM = re.compile(rf"^(?P<coef>{_NUMBER})$")


def _split_terms(expr: str) -> list[str]:
    """Split a sum at top-level +/- signs (keeping signs with the terms)."""
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(expr):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            prev = expr[:i].rstrip()
            if prev and prev[-1] not in "eE*(+-":
                terms.append(expr[start:i])
                start = i
    terms.append(expr[start:])
    return [t.strip() for t in terms if t.strip()]


def parse_profile(expr: str, grid: Grid1D) -> np.ndarray:
    """Sample an initial-condition expression at the interior nodes.

    Grammar: sum of terms, each one of  a*sin(k*x) | a*x*(L-x) | a
    with optional coefficient a and frequency k (defaults 1).
    """
    x = grid.x
    total = np.zeros(grid.n_interior)
    for term in _split_terms(expr):
        t = term.replace(" ", "")
        sign = 1.0
        if t.startswith("+"):
            t = t[1:]
        elif t.startswith("-") and not re.match(rf"^{_NUMBER}", t):
            sign, t = -1.0, t[1:]
        if m := _SIN_TERM.match(t):
            coef = float(m.group("coef")) if m.group("coef") else 1.0
            freq = float(m.group("freq")) if m.group("freq") else 1.0
            total += sign * coef * np.sin(freq * x)
        elif m := _PARABOLA_TERM.match(t):
            coef = float(m.group("coef")) if m.group("coef") else 1.0
            total += sign * coef * x * (grid.length - x)
        elif m := _CONST_TERM.match(t):
            total += sign * float(m.group("coef"))
        else:
            raise ValueError(
                f"unsupported initial-condition term {term!r}; "
                "expected a*sin(k*x), a*x*(L-x) or a constant"
            )
    return total


@dataclass
class ExperimentConfig:
    """Validated run configuration (config file keys match field names)."""

    length: float = math.pi
    n_interior: int = 255
    courant: float = 0.5
    horizon: float = 10.0
    alpha: float = 1.0
    z0: str = "sin(x)"
    z1: str = "sin(2*x)"
    policy: str = "event_triggered"
    gamma: float | None = None
    tau: float | None = None
    certificate: str = "auto"  # auto | explicit | none
    epsilon: float | None = None
    delta: float | None = None
    lambda1: float | None = None
    lambda2: float | None = None
    c_omega: float | None = None
    fields_stride: int = 0
    fit_window_start: float = 2.0
    out_prefix: str = "run"

    _FLOAT_KEYS = (
        "length", "courant", "horizon", "alpha", "gamma", "tau", "epsilon",
        "delta", "lambda1", "lambda2", "c_omega", "fit_window_start",
    )
    _INT_KEYS = ("n_interior", "fields_stride")
    _STR_KEYS = ("z0", "z1", "policy", "certificate", "out_prefix")

    def apply(self, key: str, value: str) -> None:
        if key in self._FLOAT_KEYS:
            setattr(self, key, float(value))
        elif key in self._INT_KEYS:
            setattr(self, key, int(value))
        elif key in self._STR_KEYS:
            setattr(self, key, value)
        else:
            raise ValueError(f"unknown configuration key {key!r}")


def load_config(path: str | None, overrides: list[str]) -> ExperimentConfig:
    config = ExperimentConfig()
    if path:
        with open(path) as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
                key, _, value = line.partition("=")
                try:
                    config.apply(key.strip(), value.strip())
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override must be key=value, got {item!r}")
        key, _, value = item.partition("=")
        config.apply(key.strip(), value.strip())
    return config


@dataclass
class ResolvedRun:
    grid: Grid1D
    z0: np.ndarray
    w0: np.ndarray
    policy: ControllerPolicy
    config: ExperimentConfig
    params: cert.CertificateParams | None


def resolve(config: ExperimentConfig) -> ResolvedRun:
    """Validate a configuration against the module preconditions and
    resolve the certificate source."""
    grid = Grid1D(length=config.length, n_interior=config.n_interior, courant=config.courant)
    z0 = parse_profile(config.z0, grid)
    w0 = parse_profile(config.z1, grid)
    if not config.horizon > 0.0:
        raise ValueError(f"horizon must be positive, got {config.horizon!r}")
    c_omega = config.c_omega if config.c_omega is not None else config.length / math.pi

    params: cert.CertificateParams | None = None
    if config.certificate == "explicit":
        missing = [k for k in ("epsilon", "delta", "lambda1", "lambda2", "gamma")
                   if getattr(config, k) is None]
        if missing:
            raise ValueError(f"certificate=explicit requires {', '.join(missing)}")
        params = cert.CertificateParams(
            alpha=config.alpha, epsilon=config.epsilon, delta=config.delta,
            lambda1=config.lambda1, lambda2=config.lambda2, gamma=config.gamma,
            c_omega=c_omega,
        )
    elif config.certificate == "auto":
        if config.policy == "event_triggered" and config.gamma is not None:
            params = None  # explicit trigger threshold, no certified tuple attached
        else:
            params = cert.find_feasible(config.alpha, c_omega).params
    elif config.certificate != "none":
        raise ValueError(f"certificate must be auto, explicit or none, got {config.certificate!r}")

    gamma = config.gamma
    if config.policy == "event_triggered" and gamma is None:
        if params is None:
            raise ValueError("event_triggered policy requires gamma or a certificate")
        gamma = params.gamma
    policy = ControllerPolicy(kind=config.policy, alpha=config.alpha, gamma=gamma, tau=config.tau)
    return ResolvedRun(grid=grid, z0=z0, w0=w0, policy=policy, config=config, params=params)


def _run(resolved: ResolvedRun, policy: ControllerPolicy | None = None):
    config, params = resolved.config, resolved.params
    epsilon = config.epsilon if config.epsilon is not None else (params.epsilon if params else 0.0)
    return run_closed_loop(
        resolved.grid,
        resolved.z0,
        resolved.w0,
        policy or resolved.policy,
        config.horizon,
        epsilon=epsilon,
        delta=params.delta if params else config.delta,
        lambda1=params.lambda1 if params else config.lambda1,
        lambda2=params.lambda2 if params else config.lambda2,
        c_omega=params.c_omega if params else (config.c_omega or config.length / math.pi),
        fields_stride=config.fields_stride,
    )


def cmd_certify(args: argparse.Namespace) -> int:
    explicit = [args.epsilon, args.delta, args.lambda1, args.lambda2, args.gamma]
    given = [v is not None for v in explicit]
    if any(given) and not all(given):
        raise ValueError("an explicit tuple needs all of epsilon, delta, lambda1, lambda2, gamma")
    document: dict
    if all(given):
        params = cert.CertificateParams(
            alpha=args.alpha, epsilon=args.epsilon, delta=args.delta,
            lambda1=args.lambda1, lambda2=args.lambda2, gamma=args.gamma,
            c_omega=args.c_omega,
        )
        report = cert.audit(params)
        entry_11 = float(cert.certificate_matrix(params)[0, 0])
        print(report.to_kv(), end="")
        print(f"matrix_entry_11={entry_11!r}")
        document = report.to_dict() | {"matrix_entry_11": entry_11}
        if not report.feasible:
            print(
                f"infeasible: largest eigenvalue {report.max_eigenvalue!r} is not "
                f"below {-cert.NEG_DEF_TOL}", file=sys.stderr,
            )
    else:
        report = cert.find_feasible(args.alpha, args.c_omega)
        delta_star, _ = cert.max_decay_rate(args.alpha, args.c_omega)
        print(report.to_kv(), end="")
        print(f"delta_star={delta_star!r}")
        document = report.to_dict() | {"delta_star": delta_star}
        if not report.feasible:  # pragma: no cover - search is universal
            print("search failed to find a feasible tuple", file=sys.stderr)
    if args.json:
        with open(args.json, "w") as f:
            json.dump(document, f, indent=2)
            f.write("\n")
    return 0 if report.feasible else 1


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.set or [])
    resolved = resolve(config)
    trace, history = _run(resolved)
    prefix = args.out_prefix or config.out_prefix
    write_trace(trace, f"{prefix}_trace.csv")
    write_events(trace.events, f"{prefix}_events.csv")
    if history is not None:
        write_fields(history.x, history.times, history.snapshots, f"{prefix}_fields.csv")
    print(f"policy={trace.meta.policy} steps={len(trace.t) - 1} n_updates={trace.n_updates}")
    print(f"E0={float(trace.E[0])!r} final_E={float(trace.E[-1])!r} c1={trace.meta.c1!r}")
    if resolved.params is not None:
        print("certificate:")
        print(cert.audit(resolved.params).to_kv(), end="")
    return 0


_COMPARE_POLICIES = ("continuous", "event_triggered", "fixed", "periodic")


def cmd_compare(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.set or [])
    config.policy = "event_triggered"
    resolved = resolve(config)
    prefix = args.out_prefix or config.out_prefix

    traces: dict[str, TraceRecord] = {}
    et_trace, et_history = _run(resolved)
    traces["event_triggered"] = et_trace
    if et_history is not None:
        write_fields(et_history.x, et_history.times, et_history.snapshots,
                     f"{prefix}_event_triggered_fields.csv")
    tau = config.horizon / et_trace.n_updates
    for kind in ("continuous", "fixed", "periodic"):
        policy = ControllerPolicy(
            kind=kind, alpha=config.alpha, tau=tau if kind == "periodic" else None
        )
        traces[kind], history = _run(resolved, policy=policy)
        if kind == "continuous" and history is not None:
            write_fields(history.x, history.times, history.snapshots,
                         f"{prefix}_continuous_fields.csv")

    for kind, trace in traces.items():
        write_trace(trace, f"{prefix}_{kind}_trace.csv")
        if kind == "event_triggered":
            write_events(trace.events, f"{prefix}_event_triggered_events.csv")

    path = f"{prefix}_compare.csv"
    with open(path, "w", newline="\n") as f:
        f.write(f"# schema={COMPARE_SCHEMA}\n")
        f.write(f"# n_up={et_trace.n_updates}\n")
        f.write(f"# tau={tau!r}\n")
        f.write("t," + ",".join(f"E_{k}" for k in _COMPARE_POLICIES) + "\n")
        for i in range(len(et_trace.t)):
            row = [repr(float(et_trace.t[i]))]
            row += [repr(float(traces[k].E[i])) for k in _COMPARE_POLICIES]
            f.write(",".join(row) + "\n")
    print(f"n_updates={et_trace.n_updates} tau={tau!r}")
    for kind in _COMPARE_POLICIES:
        print(f"final_E_{kind}={float(traces[kind].E[-1])!r}")
    print(f"wrote {path}")
    return 0


def _parse_list(text: str, flag: str) -> list[float]:
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError(f"{flag} must contain at least one value")
    return values


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.set or [])
    if (args.gamma_list is None) == (args.tau_list is None):
        raise ValueError("exactly one of --gamma-list or --tau-list is required")
    sweep_kind = "gamma" if args.gamma_list is not None else "tau"
    raw_list = args.gamma_list if args.gamma_list is not None else args.tau_list
    values = _parse_list(raw_list, f"--{sweep_kind}-list")

    comments = [f"# kind={sweep_kind}"]
    tau_reference = None
    e0 = None
    if sweep_kind == "tau":
        # Reference period horizon/N_up from the event-triggered run on the
        # same grid and initial data.
        resolved = resolve(dataclasses.replace(config, policy="event_triggered"))
        et_trace, _ = _run(resolved)
        tau_reference = config.horizon / et_trace.n_updates
        e0 = float(et_trace.E[0])
        comments.append(f"# tau_reference={tau_reference!r}")

    rows = []
    for value in values:
        if sweep_kind == "gamma":
            config_i = dataclasses.replace(config, policy="event_triggered",
                                           gamma=value, certificate="none")
        else:
            config_i = dataclasses.replace(config, policy="periodic",
                                           tau=value, certificate="none")
        resolved = resolve(config_i)
        trace, _ = _run(resolved)
        dwells = trace.dwells()
        min_dwell = float(np.min(dwells)) if len(dwells) else math.nan
        rate = fit_decay(trace, (config.fit_window_start, None))
        if e0 is None:
            e0 = float(trace.E[0])
        rows.append((value, trace.n_updates, min_dwell, float(trace.E[-1]), rate))

    if sweep_kind == "tau":
        decaying = [v for v, _, _, fe, _ in rows if fe < e0]
        growing = [v for v, _, _, fe, _ in rows if fe > e0]
        comments.append(
            f"# last_decaying_tau={max(decaying)!r}" if decaying else "# last_decaying_tau="
        )
        comments.append(
            f"# first_growing_tau={min(growing)!r}" if growing else "# first_growing_tau="
        )

    for line in comments:
        print(line.lstrip("# "))
    print(f"{sweep_kind:>10} {'n_updates':>10} {'min_dwell':>12} {'final_E':>14} {'decay_fit':>10}")
    for value, n_up, min_dwell, final_e, rate in rows:
        print(f"{value:>10.5f} {n_up:>10d} {min_dwell:>12.6f} {final_e:>14.6e} {rate:>10.4f}")

    if args.out:
        with open(args.out, "w", newline="\n") as f:
            f.write(f"# schema={SWEEP_SCHEMA}\n")
            for line in comments:
                f.write(line + "\n")
            f.write("value,n_updates,min_dwell,final_E,decay_fit\n")
            for value, n_up, min_dwell, final_e, rate in rows:
                f.write(f"{value!r},{n_up},{min_dwell!r},{final_e!r},{rate!r}\n")
        print(f"wrote {args.out}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    events = read_events(args.events) if args.events else None
    trace = read_trace(args.trace, events=events)
    meta = trace.meta
    updates = {}
    for name in ("alpha", "gamma", "epsilon", "delta", "c_omega"):
        value = getattr(args, name)
        if value is not None:
            updates[name] = value
    if updates:
        trace.meta = dataclasses.replace(meta, **updates)
    report: VerificationReport = verify_all(trace)
    print(report.to_text(), end="")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write("\n")
    return 0 if report.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etdwave",
        description="Event-triggered damping of the 1D wave equation: "
        "certificates, simulation, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="search or audit certificate parameters")
    p.add_argument("--alpha", type=float, required=True, help="damping gain (> 0)")
    p.add_argument("--c-omega", dest="c_omega", type=float, default=1.0,
                   help="Poincare constant of the domain (default 1 = interval of length pi)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--json", help="write the report as JSON to this path")
    p.set_defaults(func=cmd_certify)

    for name, help_text in (
        ("simulate", "run one closed-loop simulation"),
        ("compare", "run the four controller variants on one grid"),
        ("sweep", "sweep gamma or tau over a list of values"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one configuration key (repeatable)")
        p.add_argument("--out-prefix", dest="out_prefix",
                       help="output file prefix (default from config)")
        if name == "sweep":
            p.add_argument("--gamma-list", dest="gamma_list",
                           help="comma-separated trigger thresholds")
            p.add_argument("--tau-list", dest="tau_list",
                           help="comma-separated sampling periods")
            p.add_argument("--out", help="write the sweep table as CSV to this path")
        p.set_defaults(func={"simulate": cmd_simulate, "compare": cmd_compare,
                             "sweep": cmd_sweep}[name])

    p = sub.add_parser("verify", help="verify certified properties on a written trace")
    p.add_argument("--trace", required=True, help="trace CSV path")
    p.add_argument("--events", help="event-log CSV path")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--c-omega", dest="c_omega", type=float)
    p.add_argument("--json", help="write the report as JSON to this path")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        parser.exit(2, f"error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
