from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilisim.engine import MS, S, DurationError, Engine, EngineHalted, EventKind, fmt_time, parse_duration


@pytest.mark.parametrize(
    "text, micros",
    [("800ms", 800_000), ("1.5s", 1_500_000), ("250us", 250), ("250µs", 250), ("2min", 120 * S), (" 10 s ", 10 * S),
     ("0.001ms", 1)],
)
def test_parse_duration(text, micros):
    assert parse_duration(text) == micros


@pytest.mark.parametrize("bad", ["800xs", "10", "ms", "-1s", "1.5us", 800, None, "1e3ms"])
def test_parse_duration_rejects(bad):
    with pytest.raises(DurationError):
        parse_duration(bad)


@given(st.integers(min_value=0, max_value=10**12))
def test_fmt_time_round_trips(us):
    assert parse_duration(fmt_time(us)) == us


def test_same_instant_ordering_by_priority_then_seq():
    eng = Engine()
    eng.schedule_at(5, "x", EventKind.FAULT_ONSET, "f")
    eng.schedule_at(5, "x", EventKind.TIMER_EXPIRED, "t1")
    eng.schedule_at(5, "x", EventKind.SAMPLE_DUE, "d1")
    eng.schedule_at(5, "x", EventKind.TIMER_EXPIRED, "t2")
    eng.schedule_at(5, "x", EventKind.MESSAGE_DELIVERED, "d2")
    seen = []
    eng.run_until(10, lambda ev: seen.append(ev.data))
    assert seen == ["d1", "d2", "t1", "t2", "f"]
    assert eng.now == 10


def test_cancel_is_lazy_and_idempotent():
    eng = Engine()
    a = eng.schedule(3, "x", EventKind.TIMER_EXPIRED, "a")
    eng.schedule(4, "x", EventKind.TIMER_EXPIRED, "b")
    assert eng.cancel(a) is True
    assert eng.cancel(a) is False
    assert eng.peek_time() == 4
    seen = []
    assert eng.run_until(100, lambda ev: seen.append(ev.data)) == 1
    assert seen == ["b"]


def test_past_and_non_integer_times_rejected():
    eng = Engine()
    eng.run_until(10, lambda ev: None)
    with pytest.raises(ValueError):
        eng.schedule_at(9, "x", EventKind.SAMPLE_DUE)
    with pytest.raises(TypeError):
        eng.schedule_at(10.5, "x", EventKind.SAMPLE_DUE)
    with pytest.raises(ValueError):
        eng.schedule(-1, "x", EventKind.SAMPLE_DUE)


def test_handlers_can_schedule_inside_horizon():
    eng = Engine()
    seen = []

    def handler(ev):
        seen.append(ev.time)
        if ev.time < 3 * MS:
            eng.schedule(MS, "x", EventKind.SAMPLE_DUE)

    eng.schedule(0, "x", EventKind.SAMPLE_DUE)
    eng.run_until(5 * MS, handler)
    assert seen == [0, MS, 2 * MS, 3 * MS]


def test_halt_stops_processing():
    eng = Engine()
    for t in range(5):
        eng.schedule_at(t, "x", EventKind.SAMPLE_DUE, t)
    seen = []

    def handler(ev):
        seen.append(ev.data)
        if ev.data == 2:
            eng.halt()

    eng.run_until(10, handler)
    assert seen == [0, 1, 2]
    with pytest.raises(EngineHalted):
        eng.schedule(1, "x", EventKind.SAMPLE_DUE)


kinds = st.sampled_from(list(EventKind))


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 50), kinds), max_size=60), st.sets(st.integers(0, 59)))
def test_total_order_and_cancellation(items, cancelled):
    eng = Engine()
    ids = [eng.schedule_at(t, "x", k, i) for i, (t, k) in enumerate(items)]
    for c in cancelled:
        if c < len(ids):
            eng.cancel(ids[c])
    seen = []
    eng.run_until(50, seen.append)
    keys = [(ev.time, int(ev.kind.priority), ev.seq) for ev in seen]
    assert keys == sorted(keys)
    assert {ev.data for ev in seen} == {i for i in range(len(items)) if i not in cancelled}
