"""Per-run time series and their CSV serialization.

A trace holds one row per solver step: time, energy, Lyapunov value,
squared hold error, trigger threshold, control norm and an update flag,
plus run metadata.  CSV schemas are versioned in a leading comment line
and written in full double precision with locale-independent formatting,
so a written file re-reads bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .trigger import EventRecord

TRACE_SCHEMA = "etdwave-trace-v1"
EVENTS_SCHEMA = "etdwave-events-v1"
FIELDS_SCHEMA = "etdwave-fields-v1"
COMPARE_SCHEMA = "etdwave-compare-v1"
SWEEP_SCHEMA = "etdwave-sweep-v1"

TRACE_COLUMNS = ("t", "E", "V", "err_sq", "threshold", "control_norm", "event")
EVENT_COLUMNS = ("k", "t_k", "dwell", "error_norm_sq_at_trigger", "energy_at_trigger")


@dataclass(frozen=True)
class TraceMeta:
    """Run metadata embedded in the trace CSV header."""

    policy: str
    alpha: float
    gamma: float | None
    tau: float | None
    epsilon: float
    delta: float | None
    lambda1: float | None
    lambda2: float | None
    c_omega: float
    length: float
    n_interior: int
    courant: float
    dt: float
    horizon: float
    e0: float
    c1: float
    immediate_retriggers: int = 0


@dataclass
class TraceRecord:
    """Time series of one closed-loop run."""

    meta: TraceMeta
    t: np.ndarray
    E: np.ndarray
    V: np.ndarray
    err_sq: np.ndarray
    threshold: np.ndarray
    control_norm: np.ndarray
    event_flag: np.ndarray  # bool, True at update instants
    events: list[EventRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        n = len(self.t)
        for name in ("E", "V", "err_sq", "threshold", "control_norm", "event_flag"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} length mismatch")
        dts = np.diff(self.t)
        if n > 1 and (np.any(dts <= 0) or np.ptp(dts) > 1e-9 * dts[0]):
            raise ValueError("time must strictly increase with constant step")
        if np.any(self.E < 0):
            raise ValueError("energy rows must be nonnegative")

    @property
    def n_updates(self) -> int:
        """Number of control updates, the initial application included."""
        return len(self.events)

    def dwells(self) -> np.ndarray:
        """Observed inter-update intervals (initial hold excluded)."""
        return np.array([e.dwell for e in self.events if e.k > 0])


def _format(value: float | int | bool | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _parse_optional(text: str) -> float | None:
    return None if text == "" else float(text)


def write_trace(trace: TraceRecord, path: str) -> None:
    meta = trace.meta
    with open(path, "w", newline="\n") as f:
        f.write(f"# schema={TRACE_SCHEMA}\n")
        for fld in fields(TraceMeta):
            f.write(f"# {fld.name}={_format(getattr(meta, fld.name))}\n")
        f.write(",".join(TRACE_COLUMNS) + "\n")
        for i in range(len(trace.t)):
            row = (
                _format(trace.t[i]),
                _format(trace.E[i]),
                _format(trace.V[i]),
                _format(trace.err_sq[i]),
                _format(trace.threshold[i]),
                _format(trace.control_norm[i]),
                "1" if trace.event_flag[i] else "0",
            )
            f.write(",".join(row) + "\n")


def _read_commented_header(lines: list[str], schema: str) -> tuple[dict, int]:
    if not lines or lines[0].strip() != f"# schema={schema}":
        raise ValueError(f"not a {schema} file (missing schema line)")
    meta: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        if "=" in body:
            key, _, value = body.partition("=")
            meta[key.strip()] = value.strip()
        i += 1
    return meta, i


def read_trace(path: str, events: list[EventRecord] | None = None) -> TraceRecord:
    with open(path) as f:
        lines = f.read().splitlines()
    raw_meta, i = _read_commented_header(lines, TRACE_SCHEMA)
    if i >= len(lines) or lines[i].split(",") != list(TRACE_COLUMNS):
        raise ValueError(f"trace column header mismatch in {path}")
    rows = []
    for lineno, line in enumerate(lines[i + 1 :], start=i + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(TRACE_COLUMNS):
            raise ValueError(f"{path}:{lineno}: expected {len(TRACE_COLUMNS)} fields")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: unparsable value ({exc})") from None
    data = np.array(rows)
    if data.size == 0:
        raise ValueError(f"{path}: trace has no rows")
    try:
        meta = TraceMeta(
            policy=raw_meta["policy"],
            alpha=float(raw_meta["alpha"]),
            gamma=_parse_optional(raw_meta["gamma"]),
            tau=_parse_optional(raw_meta["tau"]),
            epsilon=float(raw_meta["epsilon"]),
            delta=_parse_optional(raw_meta["delta"]),
            lambda1=_parse_optional(raw_meta["lambda1"]),
            lambda2=_parse_optional(raw_meta["lambda2"]),
            c_omega=float(raw_meta["c_omega"]),
            length=float(raw_meta["length"]),
            n_interior=int(raw_meta["n_interior"]),
            courant=float(raw_meta["courant"]),
            dt=float(raw_meta["dt"]),
            horizon=float(raw_meta["horizon"]),
            e0=float(raw_meta["e0"]),
            c1=float(raw_meta["c1"]),
            immediate_retriggers=int(raw_meta.get("immediate_retriggers", "0")),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing metadata key {exc}") from None
    return TraceRecord(
        meta=meta,
        t=data[:, 0],
        E=data[:, 1],
        V=data[:, 2],
        err_sq=data[:, 3],
        threshold=data[:, 4],
        control_norm=data[:, 5],
        event_flag=data[:, 6] != 0.0,
        events=list(events) if events else [],
    )


def write_events(events: list[EventRecord], path: str) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(f"# schema={EVENTS_SCHEMA}\n")
        f.write(",".join(EVENT_COLUMNS) + "\n")
        for e in events:
            f.write(
                f"{e.k},{_format(e.t)},{_format(e.dwell)},"
                f"{_format(e.error_norm_sq)},{_format(e.energy)}\n"
            )


def read_events(path: str) -> list[EventRecord]:
    with open(path) as f:
        lines = f.read().splitlines()
    _, i = _read_commented_header(lines, EVENTS_SCHEMA)
    if i >= len(lines) or lines[i].split(",") != list(EVENT_COLUMNS):
        raise ValueError(f"event column header mismatch in {path}")
    events = []
    for lineno, line in enumerate(lines[i + 1 :], start=i + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(EVENT_COLUMNS):
            raise ValueError(f"{path}:{lineno}: expected {len(EVENT_COLUMNS)} fields")
        events.append(
            EventRecord(
                k=int(parts[0]),
                t=float(parts[1]),
                dwell=float(parts[2]),
                error_norm_sq=float(parts[3]),
                energy=float(parts[4]),
            )
        )
    return events


def write_fields(x: np.ndarray, times: np.ndarray, snapshots: np.ndarray, path: str) -> None:
    """Field snapshot CSV: first row the x coordinates, then one row per
    recorded time holding t followed by the nodal position values."""
    if snapshots.shape != (len(times), len(x)):
        raise ValueError("snapshot block must be (n_times, n_nodes)")
    with open(path, "w", newline="\n") as f:
        f.write(f"# schema={FIELDS_SCHEMA}\n")
        f.write(",".join(_format(v) for v in x) + "\n")
        for t, row in zip(times, snapshots):
            f.write(_format(t) + "," + ",".join(_format(v) for v in row) + "\n")


def read_fields(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    with open(path) as f:
        lines = [ln for ln in f.read().splitlines() if ln.strip()]
    _, i = _read_commented_header(lines, FIELDS_SCHEMA)
    x = np.array([float(v) for v in lines[i].split(",")])
    times, rows = [], []
    for line in lines[i + 1 :]:
        parts = line.split(",")
        if len(parts) != len(x) + 1:
            raise ValueError(f"{path}: field row width mismatch")
        times.append(float(parts[0]))
        rows.append([float(v) for v in parts[1:]])
    return x, np.array(times), np.array(rows)


