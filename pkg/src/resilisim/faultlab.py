"""Deterministic fault injection: hanging processes, link outages, lossy links."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Iterable, Union

from .engine import Engine, EventKind
from .topology import LinkState, PlatformGraph

MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 (Steele, Lea & Flood); bit-exact on every platform.

    Constants: increment 0x9E3779B97F4A7C15, multipliers
    0xBF58476D1CE4E5B9 and 0x94D049BB133111EB, shifts 30/27/31.
    """

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int) -> None:
        self.seed = seed & MASK64
        self.state = self.seed
        self.counter = 0

    def next_u64(self) -> int:
        self.state = (self.state + self.GAMMA) & MASK64
        self.counter += 1
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Float in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def stream_seed(run_seed: int, fault_id: str) -> int:
    """Independent per-fault seed so adding a fault never shifts another's draws."""
    salt = zlib.crc32(fault_id.encode("utf-8"))
    return SplitMix64(run_seed ^ (salt << 32) ^ salt).next_u64()


class UnknownTarget(LookupError):
    pass


class NotActive(RuntimeError):
    pass


@dataclass(frozen=True)
class HangingProcess:
    id: str
    target: str
    onset: int
    extra_delay: int | None  # None hangs until the component is restarted

    @property
    def forever(self) -> bool:
        return self.extra_delay is None


@dataclass(frozen=True)
class NetworkOutage:
    id: str
    link: str
    onset: int
    duration: int | None  # None is permanent


@dataclass(frozen=True)
class IntermittentLink:
    id: str
    link: str
    onset: int
    probability: float
    seed: int | None = None  # falls back to the run seed
    duration: int | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError(f"{self.id}: drop probability {self.probability} outside [0, 1]")


FaultSpec = Union[HangingProcess, NetworkOutage, IntermittentLink]


def fault_kind(f: FaultSpec) -> str:
    return type(f).__name__


def fault_target(f: FaultSpec) -> str:
    return f.target if isinstance(f, HangingProcess) else f.link


def fault_duration(f: FaultSpec) -> int | None:
    if isinstance(f, HangingProcess):
        return None  # cleared by restart, not by the clock
    return f.duration


@dataclass
class FaultInjector:
    faults: list[FaultSpec]
    graph: PlatformGraph
    run_seed: int = 0
    active: dict[str, FaultSpec] = field(default_factory=dict)
    streams: dict[str, SplitMix64] = field(default_factory=dict)
    _down_count: dict[str, int] = field(default_factory=dict)
    _clear_events: dict[str, int] = field(default_factory=dict)

    def by_id(self, fault_id: str) -> FaultSpec:
        for f in self.faults:
            if f.id == fault_id:
                return f
        raise KeyError(fault_id)

    def inject(self, engine: Engine, components: Iterable[str], horizon: int | None = None) -> list[int]:
        """Schedule onset (and, for bounded faults, clear) events."""
        comps = set(components)
        ids: list[int] = []
        seen: set[str] = set()
        for f in self.faults:
            if f.id in seen:
                raise ValueError(f"duplicate fault id {f.id!r}")
            seen.add(f.id)
            if isinstance(f, HangingProcess) and f.target not in comps:
                raise UnknownTarget(f"{f.id}: no component {f.target!r}")
            if not isinstance(f, HangingProcess) and f.link not in self.graph.links:
                raise UnknownTarget(f"{f.id}: no link {f.link!r}")
            if horizon is not None and f.onset > horizon:
                raise ValueError(f"{f.id}: onset {f.onset} is after the run horizon {horizon}")
            ids.append(engine.schedule_at(f.onset, fault_target(f), EventKind.FAULT_ONSET, f.id))
            dur = fault_duration(f)
            if dur is not None:
                ev = engine.schedule_at(f.onset + dur, fault_target(f), EventKind.FAULT_CLEAR, f.id)
                self._clear_events[f.id] = ev
                ids.append(ev)
        return ids

    def onset(self, fault_id: str) -> FaultSpec:
        f = self.by_id(fault_id)
        self.active[f.id] = f
        if isinstance(f, NetworkOutage):
            self._down_count[f.link] = self._down_count.get(f.link, 0) + 1
            self.graph.links[f.link].state = LinkState.DOWN
        elif isinstance(f, IntermittentLink):
            seed = f.seed if f.seed is not None else self.run_seed
            self.streams[f.id] = SplitMix64(stream_seed(seed, f.id))
        return f

    def clear(self, fault_id: str, engine: Engine | None = None) -> FaultSpec:
        """Undo an active fault. Raises ``NotActive`` if it is not active."""
        f = self.active.pop(fault_id, None)
        if f is None:
            raise NotActive(fault_id)
        ev = self._clear_events.pop(fault_id, None)
        if ev is not None and engine is not None:
            engine.cancel(ev)
        if isinstance(f, NetworkOutage):
            n = self._down_count[f.link] - 1
            self._down_count[f.link] = n
            if n == 0:
                self.graph.links[f.link].state = LinkState.UP
        elif isinstance(f, IntermittentLink):
            self.streams.pop(f.id, None)
        return f

    def is_active(self, fault_id: str) -> bool:
        return fault_id in self.active

    def hang_for(self, component: str, started_at: int) -> HangingProcess | None:
        """Active hang affecting work that started at ``started_at``, if any."""
        for f in self.active.values():
            if isinstance(f, HangingProcess) and f.target == component and f.onset <= started_at:
                return f
        return None

    def hangs_on(self, component: str) -> list[HangingProcess]:
        return [f for f in self.active.values() if isinstance(f, HangingProcess) and f.target == component]

    def should_drop(self, link_id: str) -> bool:
        drop = False
        # every active stream on the link draws, so patterns stay independent
        for f in self.active.values():
            if isinstance(f, IntermittentLink) and f.link == link_id:
                if self.streams[f.id].uniform() < f.probability:
                    drop = True
        return drop
