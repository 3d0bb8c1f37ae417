from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilisim.contracts import DEADLINE_MISS, HEARTBEAT_LOSS, PERIOD_MISS, PortEvent, TimedGuarantee, Within, WithinEvery, Every
from resilisim.engine import MS, S
from resilisim.observers import (
    BEAT,
    IN,
    NORMAL,
    OUT,
    VIOLATED,
    ClockConstraint,
    Edge,
    IllFormed,
    Observer,
    TimedAutomaton,
    UnboundTrigger,
    deadline_periodic_template,
    deadline_template,
    heartbeat_template,
    periodic_template,
    template_for,
)

from tests.oracles import TemplateCase, oracle_verdict

IO = {"in": IN, "out": OUT}


def deadline_obs(d=1 * S):
    return Observer(deadline_template(d), IO, id="obs")


# -- template shapes ---------------------------------------------------------


def test_deadline_periodic_shape():
    ta = deadline_periodic_template(400 * MS, 500 * MS)
    assert ta.clocks == ("x", "y")
    assert len(ta.fault_locations) == 2
    assert set(ta.faults.values()) == {DEADLINE_MISS, PERIOD_MISS}


@pytest.mark.parametrize(
    "build",
    [
        lambda: deadline_periodic_template(1 * S, 500 * MS),
        lambda: deadline_periodic_template(0, 500 * MS),
        lambda: deadline_template(0),
        lambda: periodic_template(-5),
        lambda: heartbeat_template(200 * MS, 0),
        lambda: heartbeat_template(0, 3),
    ],
)
def test_bad_parameters(build):
    with pytest.raises(IllFormed):
        build()


@pytest.mark.parametrize(
    "pattern, name",
    [(Within(S), "deadline"), (Every(S), "periodic"), (WithinEvery(S, 2 * S), "deadline_periodic")],
)
def test_template_for_pattern(pattern, name):
    assert template_for(TimedGuarantee("o", "i", pattern)).name.startswith(name + "(")


def _ta(**overrides):
    base = dict(
        name="t",
        locations=("a", "bad"),
        initial="a",
        clocks=("x",),
        edges=(Edge("a", "bad", None, (ClockConstraint("x", ">", 5),)),),
        invariants={"a": (ClockConstraint("x", "<=", 5),)},
        faults={"bad": "Boom"},
    )
    base.update(overrides)
    return TimedAutomaton(**base)


def test_hand_built_automaton_is_accepted():
    assert _ta().fault_locations == {"bad"}


@pytest.mark.parametrize(
    "overrides",
    [
        {"initial": "nowhere"},
        {"faults": {}},
        {"edges": (Edge("a", "bad", None, (ClockConstraint("z", ">", 5),)),)},
        {"edges": (Edge("a", "bad", None, (ClockConstraint("x", ">=", 5),)),)},
        {"edges": (Edge("a", "bad", None, (ClockConstraint("x", ">", -1),)),), "invariants": {}},
        {"invariants": {"a": (ClockConstraint("x", "<=", 9),)}},
        {"invariants": {"a": (ClockConstraint("x", ">", 5),)}},
        {"edges": (Edge("a", "bad", None, (ClockConstraint("x", ">", 5),)), Edge("bad", "a", "e"))},
        {"edges": (Edge("a", "a", "e"), Edge("a", "bad", "e"))},
    ],
)
def test_malformed_automata(overrides):
    with pytest.raises(IllFormed):
        _ta(**overrides)


def test_binding_to_unknown_symbol():
    with pytest.raises(IllFormed):
        Observer(periodic_template(S), {"x": OUT})


def test_unbound_trigger():
    with pytest.raises(UnboundTrigger):
        deadline_obs().observe("nope", 0)


# -- timelines ---------------------------------------------------------------


def test_deadline_periodic_stays_normal_on_regular_trace():
    obs = Observer(deadline_periodic_template(400 * MS, 500 * MS), IO)
    for k in range(10):
        assert obs.observe("in", k * 500 * MS) == NORMAL
        assert obs.observe("out", k * 500 * MS + 300 * MS) == NORMAL
    assert obs.advance(4800 * MS) == NORMAL


def test_deadline_without_output():
    obs = deadline_obs()
    obs.observe("in", 0)
    assert obs.advance(1500 * MS) == VIOLATED
    assert (obs.violation.kind, obs.violation.time) == (DEADLINE_MISS, 1 * S)


def test_output_on_the_bound_is_in_time():
    obs = deadline_obs()
    obs.observe("in", 0)
    assert obs.observe("out", 1 * S) == NORMAL


def test_advance_to_the_bound_detects():
    obs = deadline_obs()
    obs.observe("in", 0)
    assert obs.advance(1 * S) == VIOLATED


@pytest.mark.parametrize(
    "inputs, expected",
    [([0, 500 * MS, 1000 * MS], None), ([0, 1200 * MS], 500 * MS)],
)
def test_periodic(inputs, expected):
    obs = Observer(periodic_template(500 * MS), {"in": IN})
    for t in inputs:
        obs.observe("in", t)
    if expected is None:
        assert obs.status == NORMAL
    else:
        assert (obs.violation.kind, obs.violation.time) == (PERIOD_MISS, expected)


def test_heartbeat_loss_after_link_down():
    obs = Observer(heartbeat_template(200 * MS, 3), {"hb": BEAT})
    for t in range(0, 4001 * MS, 200 * MS):
        obs.observe("hb", t)
    assert obs.next_deadline() == 4600 * MS
    obs.advance(10 * S)
    assert (obs.violation.kind, obs.violation.time) == (HEARTBEAT_LOSS, 4600 * MS)


def test_heartbeat_continuous_is_normal():
    obs = Observer(heartbeat_template(200 * MS, 3), {"hb": BEAT})
    for t in range(0, 60 * S, 200 * MS):
        assert obs.observe("hb", t) == NORMAL


def test_heartbeat_single_miss_threshold():
    obs = Observer(heartbeat_template(200 * MS, 1), {"hb": BEAT})
    obs.observe("hb", 0)
    obs.observe("hb", 200 * MS)
    obs.observe("hb", 500 * MS)  # the beat due at 400 ms never came
    assert obs.violation.time == 400 * MS


def test_heartbeat_is_armed_by_first_beat():
    obs = Observer(heartbeat_template(200 * MS, 3), {"hb": BEAT})
    assert obs.next_deadline() is None
    assert obs.advance(60 * S) == NORMAL


def test_violation_is_latched():
    obs = deadline_obs()
    obs.observe("in", 0)
    obs.advance(2 * S)
    first = obs.violation
    obs.observe("out", 3 * S)
    obs.observe("in", 4 * S)
    obs.advance(9 * S)
    assert obs.violation == first
    assert obs.next_deadline() is None


def test_reset_clears_and_second_violation_is_distinct():
    obs = deadline_obs()
    obs.observe("in", 0)
    obs.advance(2 * S)
    first = obs.violation
    obs.reset(2 * S)
    assert obs.status == NORMAL
    obs.observe("in", 3 * S)
    obs.advance(5 * S)
    assert obs.violation != first
    assert obs.violation.time == 4 * S


def test_reset_of_fresh_observer_is_noop():
    obs = deadline_obs()
    before = (obs.location, dict(obs.reset_at), obs.status)
    obs.reset(0)
    assert (obs.location, dict(obs.reset_at), obs.status) == before


def test_time_must_not_go_backwards():
    obs = deadline_obs()
    obs.observe("in", 10)
    with pytest.raises(ValueError):
        obs.advance(5)


# -- properties --------------------------------------------------------------

_gaps = st.lists(st.tuples(st.sampled_from(["in", "out"]), st.integers(0, 120)), max_size=30)


def _case(template, d, p, k, steps, tail):
    t, evs = 0, []
    for port, gap in steps:
        t += gap
        if template in ("periodic", "heartbeat"):
            port = "in"
        evs.append(PortEvent(port, t))
    return TemplateCase(template, d, p, k, evs, t + tail)


@settings(max_examples=300)
@given(
    template=st.sampled_from(["deadline", "periodic", "deadline_periodic", "heartbeat"]),
    d=st.integers(1, 60),
    extra=st.integers(0, 60),
    k=st.integers(1, 4),
    steps=_gaps,
    tail=st.integers(0, 200),
)
def test_online_observer_agrees_with_offline_checker(template, d, extra, k, steps, tail):
    case = _case(template, d, d + extra, k, steps, tail)
    assert case.run_online() == oracle_verdict(case)


@settings(max_examples=200)
@given(d=st.integers(1, 60), steps=_gaps)
def test_violation_never_later_than_detection(d, steps):
    obs = deadline_obs(d)
    t = 0
    for port, gap in steps:
        t += gap
        obs.observe(port, t)
        if obs.violation is not None:
            assert obs.violation.time <= t
            assert obs.next_deadline() is None
