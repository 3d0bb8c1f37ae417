"""Timed assume/guarantee contracts.

A contract names a subject (a component host or platform node), its input
and output ports, a list of assumptions and a list of timed guarantees.
Every guarantee in this library is a pass-through relation (the output
carries the input value) constrained by one of three timing patterns:

* ``Within(deadline)``  -- every input is answered by an output no later
  than ``deadline`` after it (closed bound);
* ``Every(period)``     -- consecutive inputs are at most ``period`` apart;
* ``WithinEvery(deadline, period)`` -- both at once.

``check_trace`` evaluates guarantees over a finished trace by direct
arithmetic. It is the reference the online observers are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence, Union

from .engine import fmt_time

PASS_THROUGH = "pass-through"

DEADLINE_MISS = "DeadlineMiss"
PERIOD_MISS = "PeriodMiss"
HEARTBEAT_LOSS = "HeartbeatLoss"


class ContractError(ValueError):
    pass


class SubjectMismatch(ContractError):
    pass


class ConflictingGuarantee(ContractError):
    pass


class IllFormedMerge(ContractError):
    pass


class IllFormedContract(ContractError):
    pass


class UnknownPort(ContractError):
    pass


@dataclass(frozen=True)
class Port:
    name: str
    domain: str = "real"


@dataclass(frozen=True)
class Within:
    deadline: int

    def __post_init__(self) -> None:
        if self.deadline <= 0:
            raise IllFormedContract(f"Within deadline must be positive, got {self.deadline}")

    def __str__(self) -> str:
        return f"within {fmt_time(self.deadline)}"


@dataclass(frozen=True)
class Every:
    period: int

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise IllFormedContract(f"Every period must be positive, got {self.period}")

    def __str__(self) -> str:
        return f"every {fmt_time(self.period)}"


@dataclass(frozen=True)
class WithinEvery:
    deadline: int
    period: int

    def __post_init__(self) -> None:
        if self.deadline <= 0 or self.period <= 0:
            raise IllFormedContract("WithinEvery needs a positive deadline and period")
        if self.deadline > self.period:
            raise IllFormedContract(
                f"deadline {fmt_time(self.deadline)} exceeds period {fmt_time(self.period)}"
            )

    def __str__(self) -> str:
        return f"within {fmt_time(self.deadline)} every {fmt_time(self.period)}"


Pattern = Union[Within, Every, WithinEvery]


@dataclass(frozen=True)
class TimedGuarantee:
    output: str
    input: str
    pattern: Pattern
    relation: str = PASS_THROUGH

    @property
    def deadline(self) -> int | None:
        return getattr(self.pattern, "deadline", None)

    @property
    def period(self) -> int | None:
        return getattr(self.pattern, "period", None)

    def __str__(self) -> str:
        return f"{self.output} = {self.input} {self.pattern}"


@dataclass(frozen=True)
class Contract:
    id: str
    subject: str
    inputs: tuple[Port, ...] = ()
    outputs: tuple[Port, ...] = ()
    assumptions: tuple[str, ...] = ()  # empty means "assumes nothing"
    guarantees: tuple[TimedGuarantee, ...] = ()
    tag: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        for group in (self.inputs, self.outputs):
            names = [p.name for p in group]
            if len(names) != len(set(names)):
                raise IllFormedContract(f"{self.id}: duplicate port names {names}")
        ins = {p.name for p in self.inputs}
        outs = {p.name for p in self.outputs}
        for g in self.guarantees:
            if g.input not in ins:
                raise IllFormedContract(f"{self.id}: guarantee input {g.input!r} is not a declared input")
            if g.output not in outs:
                raise IllFormedContract(f"{self.id}: guarantee output {g.output!r} is not a declared output")

    @property
    def tags(self) -> dict[str, str]:
        return dict(self.tag)

    @property
    def port_names(self) -> set[str]:
        return {p.name for p in self.inputs} | {p.name for p in self.outputs}

    @property
    def assumes_nothing(self) -> bool:
        return not self.assumptions

    def with_id(self, new_id: str) -> "Contract":
        return replace(self, id=new_id)


def make_contract(
    id: str,
    subject: str,
    guarantees: Iterable[TimedGuarantee] = (),
    *,
    assumptions: Iterable[str] = (),
    tag: dict[str, str] | None = None,
    extra_inputs: Iterable[str] = (),
    extra_outputs: Iterable[str] = (),
) -> Contract:
    """Build a contract, declaring every port its guarantees mention."""
    guarantees = tuple(guarantees)
    ins = list(dict.fromkeys([g.input for g in guarantees] + list(extra_inputs)))
    outs = list(dict.fromkeys([g.output for g in guarantees] + list(extra_outputs)))
    return Contract(
        id=id,
        subject=subject,
        inputs=tuple(Port(n) for n in ins),
        outputs=tuple(Port(n) for n in outs),
        assumptions=tuple(assumptions),
        guarantees=guarantees,
        tag=tuple(sorted((tag or {}).items())),
    )


def _merge_pair(a: TimedGuarantee, b: TimedGuarantee) -> TimedGuarantee | None:
    pa, pb = a.pattern, b.pattern
    if isinstance(pa, Within) and isinstance(pb, Every):
        d, p = pa.deadline, pb.period
    elif isinstance(pa, Every) and isinstance(pb, Within):
        d, p = pb.deadline, pa.period
    else:
        return None
    if d > p:
        raise IllFormedMerge(
            f"merging {a} with {b} gives deadline {fmt_time(d)} > period {fmt_time(p)}"
        )
    return TimedGuarantee(a.output, a.input, WithinEvery(d, p), a.relation)


def _is_empty(c: Contract) -> bool:
    return not (c.inputs or c.outputs or c.assumptions or c.guarantees)


def compose(a: Contract, b: Contract, id: str | None = None) -> Contract:
    """Conjoin two contracts on the same subject.

    A ``Within`` and an ``Every`` guarantee over the same output/input pair
    fuse into one ``WithinEvery``; everything else is concatenated.
    """
    if a.subject != b.subject:
        raise SubjectMismatch(f"cannot compose contracts on {a.subject!r} and {b.subject!r}")
    if _is_empty(b):
        return a if id is None else a.with_id(id)
    if _is_empty(a):
        return b if id is None else b.with_id(id)
    relations: dict[str, str] = {}
    for g in a.guarantees + b.guarantees:
        seen = relations.setdefault(g.output, g.relation)
        if seen != g.relation:
            raise ConflictingGuarantee(f"output {g.output!r} carries both {seen!r} and {g.relation!r}")

    merged: list[TimedGuarantee] = list(a.guarantees)
    for gb in b.guarantees:
        for i, ga in enumerate(merged):
            if (ga.output, ga.input) != (gb.output, gb.input):
                continue
            fused = _merge_pair(ga, gb)
            if fused is not None:
                merged[i] = fused
                break
        else:
            merged.append(gb)

    def union(x: Sequence[Port], y: Sequence[Port]) -> tuple[Port, ...]:
        out = {p.name: p for p in x}
        for p in y:
            out.setdefault(p.name, p)
        return tuple(out.values())

    tag = dict(a.tag)
    for k, v in b.tag:
        tag.setdefault(k, v)
    return Contract(
        id=id or (f"{a.id}+{b.id}" if b.id else a.id),
        subject=a.subject,
        inputs=union(a.inputs, b.inputs),
        outputs=union(a.outputs, b.outputs),
        assumptions=a.assumptions + b.assumptions,
        guarantees=tuple(merged),
        tag=tuple(sorted(tag.items())),
    )


# -- end-to-end budget decomposition -----------------------------------------

BUDGET_CHAIN = ("T_s1_c1", "T_c1_c3", "T_c3_c4", "T_c4_a1")


@dataclass(frozen=True)
class BudgetSet:
    T_s1_c1: int
    T_c1_c3: int
    T_c3_c4: int
    T_c4_a1: int
    delta_s1_a1: int
    T_samp: int
    T_n4_c3: int

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if not isinstance(value, int) or value <= 0:
                raise ContractError(f"budget {name} must be a positive duration, got {value!r}")

    def as_dict(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def __getitem__(self, key: str) -> int:
        if key not in self.__dataclass_fields__:
            raise KeyError(key)
        return getattr(self, key)


@dataclass(frozen=True)
class Decomposition:
    total: int
    bound: int

    @property
    def ok(self) -> bool:
        return self.total <= self.bound

    @property
    def surplus(self) -> int:
        return max(0, self.total - self.bound)


def validate_decomposition(b: BudgetSet) -> Decomposition:
    """Check that the per-hop budgets fit inside the sensor-to-actuator bound."""
    return Decomposition(total=sum(b[k] for k in BUDGET_CHAIN), bound=b.delta_s1_a1)


# -- offline trace checking ----------------------------------------------------


@dataclass(frozen=True)
class PortEvent:
    port: str
    time: int
    value: Any = None


@dataclass(frozen=True)
class TraceVerdict:
    guarantee: str
    status: str  # "Satisfied" | "Violated"
    violation_time: int | None = None
    kind: str | None = None

    def __post_init__(self) -> None:
        if (self.status == "Violated") != (self.violation_time is not None):
            raise ValueError("violation_time must be present exactly when Violated")

    @property
    def violated(self) -> bool:
        return self.status == "Violated"


SATISFIED = "Satisfied"
VIOLATED = "Violated"


def _deadline_misses(events: Sequence[PortEvent], g: TimedGuarantee, d: int, until: int) -> int | None:
    pending: list[int] = []
    for ev in events:
        if ev.port == g.input:
            pending.append(ev.time)
        elif ev.port == g.output and pending:
            # the output answers every input still waiting
            earliest = pending[0]
            if ev.time - earliest > d:
                return earliest + d
            pending.clear()
    if pending and pending[0] + d <= until:
        return pending[0] + d
    return None


def _period_miss(events: Sequence[PortEvent], g: TimedGuarantee, p: int, until: int) -> int | None:
    last: int | None = None
    for ev in events:
        if ev.port != g.input:
            continue
        if last is not None and ev.time - last > p:
            return last + p
        last = ev.time
    if last is not None and last + p <= until:
        return last + p
    return None


def check_guarantee(
    g: TimedGuarantee,
    events: Sequence[PortEvent],
    until: int | None = None,
    *,
    period_kind: str = PERIOD_MISS,
    name: str | None = None,
) -> TraceVerdict:
    """Evaluate one guarantee over a time-sorted event list.

    ``until`` is the observation horizon (default: the last event time). The
    trace must hold every event up to it, so a bound expiring exactly at the
    horizon with nothing to satisfy it counts as missed.
    """
    horizon = until if until is not None else (events[-1].time if events else 0)
    label = name or str(g)
    candidates: list[tuple[int, int, str]] = []
    if g.deadline is not None:
        t = _deadline_misses(events, g, g.deadline, horizon)
        if t is not None:
            candidates.append((t, 0, DEADLINE_MISS))
    if g.period is not None:
        t = _period_miss(events, g, g.period, horizon)
        if t is not None:
            candidates.append((t, 1, period_kind))
    if not candidates:
        return TraceVerdict(label, SATISFIED)
    t, _, kind = min(candidates)
    return TraceVerdict(label, VIOLATED, t, kind)


def check_trace(c: Contract, trace: Sequence[PortEvent], until: int | None = None) -> list[TraceVerdict]:
    """One verdict per guarantee of ``c`` over ``trace`` (sorted by time)."""
    ports = c.port_names
    prev = None
    for ev in trace:
        if ev.port not in ports:
            raise UnknownPort(f"trace mentions port {ev.port!r}, not declared by {c.id}")
        if prev is not None and ev.time < prev:
            raise ValueError("trace is not sorted by time")
        prev = ev.time
    return [
        check_guarantee(g, trace, until, name=f"{c.id}[{i}]")
        for i, g in enumerate(c.guarantees)
    ]
