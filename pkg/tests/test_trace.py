import numpy as np
import pytest

from etdwave.simulate import run_closed_loop
from etdwave.trace import (
    TraceMeta,
    TraceRecord,
    read_events,
    read_fields,
    read_trace,
    write_events,
    write_fields,
    write_trace,
)
from etdwave.trigger import ControllerPolicy
from etdwave.wave1d import Grid1D


def small_run(policy_kind="event_triggered", horizon=2.0, fields_stride=0, **kwargs):
    grid = Grid1D(n_interior=63, courant=0.5)
    policy = ControllerPolicy(
        kind=policy_kind,
        alpha=kwargs.pop("alpha", 1.0),
        gamma=kwargs.pop("gamma", 0.02) if policy_kind == "event_triggered" else None,
        tau=kwargs.pop("tau", None),
    )
    return run_closed_loop(
        grid, np.sin(grid.x), np.sin(2 * grid.x), policy, horizon,
        fields_stride=fields_stride, **kwargs,
    )


class TestDeterminism:
    def test_repeated_runs_bit_identical(self):
        a, _ = small_run(epsilon=0.4, delta=0.02)
        b, _ = small_run(epsilon=0.4, delta=0.02)
        for name in ("t", "E", "V", "err_sq", "threshold", "control_norm"):
            assert np.array_equal(getattr(a, name), getattr(b, name))
        assert a.events == b.events


class TestTraceRoundTrip:
    def test_write_read_identical(self, tmp_path):
        trace, _ = small_run(epsilon=0.4, delta=0.02, lambda1=0.1, lambda2=1.0)
        path = tmp_path / "trace.csv"
        write_trace(trace, str(path))
        back = read_trace(str(path))
        for name in ("t", "E", "V", "err_sq", "threshold", "control_norm"):
            assert np.array_equal(getattr(trace, name), getattr(back, name), equal_nan=True)
        assert np.array_equal(trace.event_flag, back.event_flag)
        assert back.meta == trace.meta

    def test_rewrite_bit_identical(self, tmp_path):
        trace, _ = small_run()
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        write_trace(trace, str(first))
        write_trace(read_trace(str(first)), str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_missing_schema_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,E\n0,1\n")
        with pytest.raises(ValueError, match="schema"):
            read_trace(str(path))

    def test_corrupted_value_rejected(self, tmp_path):
        trace, _ = small_run()
        path = tmp_path / "trace.csv"
        write_trace(trace, str(path))
        lines = path.read_text().splitlines()
        lines[25] = lines[25].replace(",", ",oops", 1)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError):
            read_trace(str(path))

    def test_row_width_rejected(self, tmp_path):
        trace, _ = small_run()
        path = tmp_path / "trace.csv"
        write_trace(trace, str(path))
        with open(path, "a") as f:
            f.write("1.0,2.0\n")
        with pytest.raises(ValueError, match="fields"):
            read_trace(str(path))


class TestEventsRoundTrip:
    def test_write_read(self, tmp_path):
        trace, _ = small_run()
        path = tmp_path / "events.csv"
        write_events(trace.events, str(path))
        back = read_events(str(path))
        assert len(back) == len(trace.events)
        for a, b in zip(back, trace.events):
            assert a.k == b.k and a.t == b.t
            assert a.dwell == b.dwell or (np.isnan(a.dwell) and np.isnan(b.dwell))
            assert a.error_norm_sq == b.error_norm_sq and a.energy == b.energy
        assert back[0].k == 0 and np.isnan(back[0].dwell)

    def test_events_attach_to_trace(self, tmp_path):
        trace, _ = small_run()
        tp, ep = tmp_path / "t.csv", tmp_path / "e.csv"
        write_trace(trace, str(tp))
        write_events(trace.events, str(ep))
        back = read_trace(str(tp), events=read_events(str(ep)))
        assert back.n_updates == trace.n_updates
        assert np.array_equal(back.dwells(), trace.dwells())


class TestFieldsRoundTrip:
    def test_write_read(self, tmp_path):
        trace, history = small_run(fields_stride=8)
        assert history is not None
        path = tmp_path / "fields.csv"
        write_fields(history.x, history.times, history.snapshots, str(path))
        x, times, snaps = read_fields(str(path))
        assert np.array_equal(x, history.x)
        assert np.array_equal(times, history.times)
        assert np.array_equal(snaps, history.snapshots)

    def test_shape_mismatch_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="n_times"):
            write_fields(np.zeros(3), np.zeros(2), np.zeros((3, 3)), str(tmp_path / "f.csv"))


class TestValidation:
    def make_meta(self):
        return TraceMeta(
            policy="open_loop", alpha=0.0, gamma=None, tau=None, epsilon=0.0,
            delta=None, lambda1=None, lambda2=None, c_omega=1.0, length=np.pi,
            n_interior=3, courant=0.5, dt=0.1, horizon=0.3, e0=0.0, c1=0.0,
        )

    def test_rejects_negative_energy(self):
        with pytest.raises(ValueError, match="nonnegative"):
            TraceRecord(
                meta=self.make_meta(),
                t=np.array([0.0, 0.1]),
                E=np.array([1.0, -1e-3]),
                V=np.zeros(2), err_sq=np.zeros(2), threshold=np.zeros(2),
                control_norm=np.zeros(2), event_flag=np.zeros(2, dtype=bool),
            )

    def test_rejects_nonuniform_time(self):
        with pytest.raises(ValueError, match="constant step"):
            TraceRecord(
                meta=self.make_meta(),
                t=np.array([0.0, 0.1, 0.35]),
                E=np.zeros(3), V=np.zeros(3), err_sq=np.zeros(3),
                threshold=np.zeros(3), control_norm=np.zeros(3),
                event_flag=np.zeros(3, dtype=bool),
            )

    def test_open_loop_zero_data_stays_zero(self):
        grid = Grid1D(n_interior=63, courant=0.5)
        trace, _ = run_closed_loop(
            grid, np.zeros(63), np.zeros(63),
            ControllerPolicy(kind="open_loop"), 1.0,
        )
        assert np.all(trace.E == 0.0) and np.all(trace.V == 0.0)
        assert trace.n_updates == 0
