"""Deterministic discrete-event core.

Simulated time is an integer count of microseconds. Events are totally
ordered by ``(time, priority class, seq)``; at equal time data deliveries
run before timer expiries, which run before fault injections.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable

US = 1
MS = 1_000
S = 1_000_000


_UNITS = {"us": US, "µs": US, "ms": MS, "s": S, "min": 60 * S}
_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(us|µs|ms|s|min)\s*$")


class DurationError(ValueError):
    pass


def parse_duration(text: str) -> int:
    """Parse ``"800ms"``, ``"1.5s"`` and friends into integer microseconds.

    Fractions that do not land on a whole microsecond are rejected rather
    than rounded.
    """
    if not isinstance(text, str):
        raise DurationError(f"duration must be a string with a unit suffix, got {text!r}")
    m = _DURATION_RE.match(text)
    if m is None:
        raise DurationError(f"bad duration {text!r} (expected a number followed by one of us, ms, s, min)")
    value = Fraction(m.group(1)) * _UNITS[m.group(2)]
    if value.denominator != 1:
        raise DurationError(f"duration {text!r} is not a whole number of microseconds")
    return int(value)


def fmt_time(micros: int) -> str:
    """Render a microsecond count the way scenario files write durations."""
    if micros % S == 0:
        return f"{micros // S}s"
    if micros % MS == 0:
        return f"{micros // MS}ms"
    return f"{micros}us"


class Priority(int, Enum):
    DATA = 0
    TIMER = 1
    FAULT = 2


class EventKind(str, Enum):
    SAMPLE_DUE = "SampleDue"
    MESSAGE_DELIVERED = "MessageDelivered"
    EXECUTION_COMPLETE = "ExecutionComplete"
    HEARTBEAT_DUE = "HeartbeatDue"
    TIMER_EXPIRED = "TimerExpired"
    FAULT_ONSET = "FaultOnset"
    FAULT_CLEAR = "FaultClear"

    @property
    def priority(self) -> Priority:
        return _PRIORITY[self]


_PRIORITY = {
    EventKind.SAMPLE_DUE: Priority.DATA,
    EventKind.MESSAGE_DELIVERED: Priority.DATA,
    EventKind.EXECUTION_COMPLETE: Priority.DATA,
    EventKind.HEARTBEAT_DUE: Priority.DATA,
    EventKind.TIMER_EXPIRED: Priority.TIMER,
    EventKind.FAULT_ONSET: Priority.FAULT,
    EventKind.FAULT_CLEAR: Priority.FAULT,
}


@dataclass(frozen=True)
class Event:
    time: int
    seq: int
    target: str
    kind: EventKind
    data: Any = None

    @property
    def order_key(self) -> tuple[int, int, int]:
        return (self.time, int(self.kind.priority), self.seq)


class EngineHalted(RuntimeError):
    pass


@dataclass
class Engine:
    now: int = 0
    next_seq: int = 0
    halted: bool = False
    _queue: list[tuple[tuple[int, int, int], Event]] = field(default_factory=list, repr=False)
    _pending: set[int] = field(default_factory=set, repr=False)

    def schedule(self, delay: int, target: str, kind: EventKind, data: Any = None) -> int:
        """Enqueue an event ``delay`` microseconds from now; return its id."""
        if delay < 0:
            raise ValueError(f"negative delay {delay}")
        return self.schedule_at(self.now + delay, target, kind, data)

    def schedule_at(self, time: int, target: str, kind: EventKind, data: Any = None) -> int:
        if self.halted:
            raise EngineHalted("cannot schedule on a halted engine")
        if not isinstance(time, int) or isinstance(time, bool):
            raise TypeError(f"simulated time must be an int, got {time!r}")
        if time < self.now:
            raise ValueError(f"event at {time} is in the past (now={self.now})")
        seq = self.next_seq
        self.next_seq += 1
        ev = Event(time, seq, target, kind, data)
        heapq.heappush(self._queue, (ev.order_key, ev))
        self._pending.add(seq)
        return seq

    def cancel(self, event_id: int) -> bool:
        # Lazy deletion: the heap entry is skipped when popped.
        if event_id in self._pending:
            self._pending.discard(event_id)
            return True
        return False

    def is_pending(self, event_id: int) -> bool:
        return event_id in self._pending

    def peek_time(self) -> int | None:
        self._drop_cancelled()
        return self._queue[0][1].time if self._queue else None

    def halt(self) -> None:
        self.halted = True

    def run_until(self, t: int, sink: Callable[[Event], None]) -> int:
        """Process every pending event with time <= t in total order.

        Handlers may schedule further events; those are processed too if they
        fall inside the horizon. On return ``now == t``.
        """
        if t < self.now:
            raise ValueError(f"horizon {t} is before now={self.now}")
        count = 0
        while not self.halted:
            self._drop_cancelled()
            if not self._queue or self._queue[0][1].time > t:
                break
            _, ev = heapq.heappop(self._queue)
            self._pending.discard(ev.seq)
            self.now = ev.time
            sink(ev)
            count += 1
        if not self.halted:
            self.now = t
        return count

    def _drop_cancelled(self) -> None:
        q = self._queue
        while q and q[0][1].seq not in self._pending:
            heapq.heappop(q)
