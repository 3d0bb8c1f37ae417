"""Timed-automaton observers.

The automata here are deliberately small: integer constants, upper-bound
location invariants, at most one edge per (location, symbol), and for every
invariant ``x <= c`` an urgent edge guarded by ``x > c`` into a fault
location. Clocks are stored as the instant of their last reset, so a clock
value is ``now - reset_at`` and never drifts.

An urgent edge fires at the instant its bound is crossed. Violations are
stamped with that instant, not with the time of whichever event happened to
reveal them.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Mapping

from .contracts import (
    DEADLINE_MISS,
    HEARTBEAT_LOSS,
    PERIOD_MISS,
    Every,
    TimedGuarantee,
    Within,
    WithinEvery,
)

_OPS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
}

IN = "in"
OUT = "out"
BEAT = "beat"


class IllFormed(ValueError):
    pass


class UnboundTrigger(KeyError):
    pass


@dataclass(frozen=True)
class ClockConstraint:
    clock: str
    op: str
    bound: int

    def holds(self, value: int) -> bool:
        return _OPS[self.op](value, self.bound)

    def __str__(self) -> str:
        return f"{self.clock} {self.op} {self.bound}"


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    symbol: str | None  # None marks an urgent (time-triggered) edge
    guard: tuple[ClockConstraint, ...] = ()
    resets: frozenset[str] = frozenset()


@dataclass
class TimedAutomaton:
    name: str
    locations: tuple[str, ...]
    initial: str
    clocks: tuple[str, ...]
    edges: tuple[Edge, ...]
    invariants: Mapping[str, tuple[ClockConstraint, ...]] = field(default_factory=dict)
    faults: Mapping[str, str] = field(default_factory=dict)  # fault location -> violation kind

    def __post_init__(self) -> None:
        self._by_symbol: dict[tuple[str, str], Edge] = {}
        self._urgent: dict[str, list[Edge]] = {}
        self.validate()
        for e in self.edges:
            if e.symbol is None:
                self._urgent.setdefault(e.source, []).append(e)
            else:
                self._by_symbol[(e.source, e.symbol)] = e

    @property
    def alphabet(self) -> set[str]:
        return {e.symbol for e in self.edges if e.symbol is not None}

    @property
    def fault_locations(self) -> set[str]:
        return set(self.faults)

    def edge_for(self, location: str, symbol: str) -> Edge | None:
        return self._by_symbol.get((location, symbol))

    def urgent_edges(self, location: str) -> list[Edge]:
        return self._urgent.get(location, [])

    def validate(self) -> None:
        locs = set(self.locations)
        clocks = set(self.clocks)
        if self.initial not in locs:
            raise IllFormed(f"{self.name}: initial location {self.initial!r} is not declared")
        if not self.faults:
            raise IllFormed(f"{self.name}: needs at least one fault location")
        for loc in self.faults:
            if loc not in locs:
                raise IllFormed(f"{self.name}: fault location {loc!r} is not declared")
        seen: set[tuple[str, str]] = set()
        for e in self.edges:
            if e.source not in locs or e.target not in locs:
                raise IllFormed(f"{self.name}: edge {e.source}->{e.target} uses an undeclared location")
            if e.source in self.faults:
                raise IllFormed(f"{self.name}: fault location {e.source!r} has an outgoing edge")
            for c in e.guard:
                self._check_constraint(c, clocks)
            if not e.resets <= clocks:
                raise IllFormed(f"{self.name}: edge resets undeclared clocks {sorted(e.resets - clocks)}")
            if e.symbol is None:
                if len(e.guard) != 1 or e.guard[0].op != ">":
                    raise IllFormed(f"{self.name}: urgent edge from {e.source!r} needs exactly one 'x > c' guard")
            else:
                key = (e.source, e.symbol)
                if key in seen:
                    raise IllFormed(f"{self.name}: two edges for {e.symbol!r} leave {e.source!r}")
                seen.add(key)
        for loc, constraints in self.invariants.items():
            if loc not in locs:
                raise IllFormed(f"{self.name}: invariant on undeclared location {loc!r}")
            for c in constraints:
                self._check_constraint(c, clocks)
                if c.op != "<=":
                    raise IllFormed(f"{self.name}: only upper-bound invariants are supported, got {c}")
                covered = any(
                    e.source == loc
                    and e.symbol is None
                    and e.guard[0].clock == c.clock
                    and e.guard[0].bound == c.bound
                    for e in self.edges
                )
                if not covered:
                    raise IllFormed(f"{self.name}: invariant {c} in {loc!r} has no urgent timeout edge")

    def _check_constraint(self, c: ClockConstraint, clocks: set[str]) -> None:
        if c.clock not in clocks:
            raise IllFormed(f"{self.name}: constraint on undeclared clock {c.clock!r}")
        if c.op not in _OPS:
            raise IllFormed(f"{self.name}: unknown comparison {c.op!r}")
        if not isinstance(c.bound, int) or c.bound < 0:
            raise IllFormed(f"{self.name}: constants must be nonnegative integers, got {c.bound!r}")


# -- templates ------------------------------------------------------------


def _timeout(source: str, clock: str, bound: int, fault: str) -> Edge:
    return Edge(source, fault, None, (ClockConstraint(clock, ">", bound),))


def deadline_periodic_template(deadline: int, period: int) -> TimedAutomaton:
    """Deadline on each instance plus a bound on the input-to-input gap."""
    if not (0 < deadline <= period):
        raise IllFormed(f"need 0 < deadline <= period, got deadline={deadline} period={period}")
    xy = frozenset({"x", "y"})
    return TimedAutomaton(
        name=f"deadline_periodic({deadline},{period})",
        locations=("init", "idle", "busy", "deadline_miss", "period_miss"),
        initial="init",
        clocks=("x", "y"),
        edges=(
            Edge("init", "busy", IN, resets=xy),
            Edge("idle", "busy", IN, resets=xy),
            # a second input while busy only restarts the gap clock
            Edge("busy", "busy", IN, resets=frozenset({"y"})),
            Edge("busy", "idle", OUT),
            _timeout("busy", "x", deadline, "deadline_miss"),
            _timeout("idle", "y", period, "period_miss"),
        ),
        invariants={
            "busy": (ClockConstraint("x", "<=", deadline),),
            "idle": (ClockConstraint("y", "<=", period),),
        },
        faults={"deadline_miss": DEADLINE_MISS, "period_miss": PERIOD_MISS},
    )


def deadline_template(deadline: int) -> TimedAutomaton:
    if deadline <= 0:
        raise IllFormed(f"deadline must be positive, got {deadline}")
    return TimedAutomaton(
        name=f"deadline({deadline})",
        locations=("idle", "busy", "deadline_miss"),
        initial="idle",
        clocks=("x",),
        edges=(
            Edge("idle", "busy", IN, resets=frozenset({"x"})),
            Edge("busy", "idle", OUT),
            _timeout("busy", "x", deadline, "deadline_miss"),
        ),
        invariants={"busy": (ClockConstraint("x", "<=", deadline),)},
        faults={"deadline_miss": DEADLINE_MISS},
    )


def _gap_template(name: str, symbol: str, bound: int, kind: str) -> TimedAutomaton:
    fault = "heartbeat_loss" if kind == HEARTBEAT_LOSS else "period_miss"
    return TimedAutomaton(
        name=name,
        locations=("init", "live", fault),
        initial="init",
        clocks=("y",),
        edges=(
            Edge("init", "live", symbol, resets=frozenset({"y"})),
            Edge("live", "live", symbol, resets=frozenset({"y"})),
            _timeout("live", "y", bound, fault),
        ),
        invariants={"live": (ClockConstraint("y", "<=", bound),)},
        faults={fault: kind},
    )


def periodic_template(period: int) -> TimedAutomaton:
    if period <= 0:
        raise IllFormed(f"period must be positive, got {period}")
    return _gap_template(f"periodic({period})", IN, period, PERIOD_MISS)


def heartbeat_template(period: int, miss_threshold: int) -> TimedAutomaton:
    """Fault once ``miss_threshold`` consecutive beats have failed to arrive.

    Monitoring is armed by the first beat.
    """
    if period <= 0 or miss_threshold < 1:
        raise IllFormed(f"need period > 0 and miss_threshold >= 1, got {period}, {miss_threshold}")
    return _gap_template(f"heartbeat({period}x{miss_threshold})", BEAT, period * miss_threshold, HEARTBEAT_LOSS)


def template_for(g: TimedGuarantee) -> TimedAutomaton:
    p = g.pattern
    if isinstance(p, WithinEvery):
        return deadline_periodic_template(p.deadline, p.period)
    if isinstance(p, Within):
        return deadline_template(p.deadline)
    if isinstance(p, Every):
        return periodic_template(p.period)
    raise TypeError(f"no template for {p!r}")


TEMPLATE_TYPES = {
    Within: "deadline",
    Every: "periodic",
    WithinEvery: "deadline_periodic",
}


# -- runtime instances -----------------------------------------------------


@dataclass(frozen=True)
class Violation:
    observer: str
    kind: str
    time: int
    contract: str | None = None


NORMAL = "Normal"
VIOLATED = "Violated"


class Observer:
    """One running copy of a timed automaton.

    ``binding`` maps runtime trigger names (for example ``"c1.s1_data"``) to
    the automaton's symbols. ``observe`` consumes a trigger at time ``t``;
    ``advance`` only lets time pass. Once a fault location is reached the
    observer stays violated until ``reset``.
    """

    def __init__(
        self,
        automaton: TimedAutomaton,
        binding: Mapping[str, str],
        *,
        id: str = "observer",
        contract: str | None = None,
        host: str | None = None,
        start: int = 0,
    ) -> None:
        unknown = set(binding.values()) - automaton.alphabet
        if unknown:
            raise IllFormed(f"binding targets symbols {sorted(unknown)} not in {automaton.name}")
        self.automaton = automaton
        self.binding = dict(binding)
        self.id = id
        self.contract = contract
        self.host = host
        self.reset(start)

    def reset(self, t: int | None = None) -> "Observer":
        t = self.last_time if t is None else t
        self.location = self.automaton.initial
        self.reset_at = {c: t for c in self.automaton.clocks}
        self.last_time = t
        self.violation: Violation | None = None
        return self

    @property
    def status(self) -> str:
        return NORMAL if self.violation is None else VIOLATED

    def clock(self, name: str, t: int) -> int:
        return t - self.reset_at[name]

    def next_deadline(self) -> int | None:
        """Earliest instant at which an urgent edge could fire, if any."""
        if self.violation is not None:
            return None
        times = [self._fire_at(e) for e in self.automaton.urgent_edges(self.location)]
        return min(times) if times else None

    def observe(self, trigger: str, t: int) -> str:
        try:
            symbol = self.binding[trigger]
        except KeyError:
            raise UnboundTrigger(trigger) from None
        self._check_time(t)
        self._expire(t, inclusive=False)
        if self.violation is None:
            e = self.automaton.edge_for(self.location, symbol)
            if e is not None and all(c.holds(self.clock(c.clock, t)) for c in e.guard):
                self._take(e, t)
        self.last_time = t
        return self.status

    def advance(self, t: int) -> str:
        self._check_time(t)
        self._expire(t, inclusive=True)
        self.last_time = t
        return self.status

    def _check_time(self, t: int) -> None:
        if t < self.last_time:
            raise ValueError(f"{self.id}: time went backwards ({t} < {self.last_time})")

    def _fire_at(self, e: Edge) -> int:
        c = e.guard[0]
        return self.reset_at[c.clock] + c.bound

    def _expire(self, t: int, inclusive: bool) -> None:
        while self.violation is None:
            edges = self.automaton.urgent_edges(self.location)
            if not edges:
                return
            e = min(edges, key=self._fire_at)
            at = self._fire_at(e)
            if at > t or (at == t and not inclusive):
                return
            self._take(e, at)

    def _take(self, e: Edge, at: int) -> None:
        for c in e.resets:
            self.reset_at[c] = at
        self.location = e.target
        kind = self.automaton.faults.get(e.target)
        if kind is not None:
            self.violation = Violation(self.id, kind, at, self.contract)
