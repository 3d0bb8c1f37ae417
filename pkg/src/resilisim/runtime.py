"""Component execution model: behaviors, work items, messages and links.

Event handlers that drive these objects live on ``Simulation``; this module
holds the state they mutate and the transport rules for messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable

from .topology import PlatformGraph, Route


class UnknownBehavior(KeyError):
    pass


@dataclass(frozen=True)
class Behavior:
    id: str
    owner: str
    qos: Fraction
    ec: int
    cc: int

    def __post_init__(self) -> None:
        if not (0 <= self.qos <= 1):
            raise ValueError(f"{self.id}: QoS {self.qos} outside [0, 1]")

    @property
    def cost(self) -> int:
        return self.ec + self.cc


class Status(str, Enum):
    RUNNING = "Running"
    RESTARTING = "Restarting"
    DOWN = "Down"


@dataclass
class WorkItem:
    key: str
    origin: int  # sample instant that started this chain of work
    started_at: int
    behavior: str
    event_id: int | None = None
    hung: bool = False
    values: tuple = ()


@dataclass
class ComponentState:
    id: str
    node: str
    behaviors: dict[str, Behavior]
    active: str
    budget: int
    status: Status = Status.RUNNING
    restart_until: int = 0
    pending: dict[str, WorkItem] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.behaviors:
            raise ValueError(f"{self.id} declares no behaviors")
        if self.active not in self.behaviors:
            raise UnknownBehavior(self.active)

    @property
    def behavior(self) -> Behavior:
        return self.behaviors[self.active]

    @property
    def qos(self) -> Fraction:
        return self.behavior.qos

    def is_running(self, t: int) -> bool:
        # The restart window is half-open: the component is back at ``restart_until``.
        if self.status is Status.DOWN:
            return False
        if self.status is Status.RESTARTING:
            return t >= self.restart_until
        return True

    def restart(self, duration: int, at: int) -> tuple[int, list[WorkItem]]:
        """Enter the restart window; overlapping restarts extend it.

        Returns the new end of the window and the work items that were in
        flight (now discarded).
        """
        until = at + duration
        if self.status is Status.RESTARTING and self.restart_until > at:
            until = max(until, self.restart_until)
        self.status = Status.RESTARTING
        self.restart_until = until
        dropped = list(self.pending.values())
        self.pending.clear()
        return until, dropped

    def finish_restart(self, t: int) -> bool:
        if self.status is Status.RESTARTING and t >= self.restart_until:
            self.status = Status.RUNNING
            return True
        return False

    def switch_behavior(self, to: str) -> bool:
        """Make ``to`` the behavior for work sampled from now on.

        In-flight work keeps the behavior recorded on its work item.
        """
        if to not in self.behaviors:
            raise UnknownBehavior(to)
        if to == self.active:
            return False
        self.active = to
        return True

    def slack(self, out_latency: int) -> int:
        return max(0, self.budget - self.behavior.cost - out_latency)


@dataclass(frozen=True)
class DataMsg:
    key: str
    src: str
    dst: str
    origin: int
    produced_at: int
    payload: tuple = ()
    route: tuple[str, ...] = ()


@dataclass(frozen=True)
class FaultMsg:
    kind: str
    source: str
    dst: str
    expected_recovery: int
    issued_at: int

    def __post_init__(self) -> None:
        if self.kind != RECOVERED and self.expected_recovery <= 0:
            raise ValueError("expected_recovery must be positive")


RECOVERED = "Recovered"


@dataclass
class Relation:
    """A managed src->dst node pair and the route its traffic currently takes."""

    src: str
    dst: str
    route: Route | None
    contract: str | None = None

    @property
    def key(self) -> str:
        return relation_key(self.src, self.dst)


def relation_key(src: str, dst: str) -> str:
    return f"{src}->{dst}"


@dataclass(frozen=True)
class Transmission:
    delivered: bool
    latency: int = 0
    route: tuple[str, ...] = ()
    cause: str | None = None  # "no_route" | "link_down" | "intermittent"
    link: str | None = None

    @property
    def undeliverable(self) -> bool:
        return self.cause == "no_route"


class Network:
    """Store-and-forward transport over each relation's current route.

    The route is checked once, at send time; a link failing while a message
    is already in flight does not affect that message.
    """

    def __init__(self, graph: PlatformGraph, drop: Callable[[str], bool] | None = None) -> None:
        self.graph = graph
        self.relations: dict[str, Relation] = {}
        self.drop = drop or (lambda link_id: False)

    def add_relation(self, rel: Relation) -> None:
        self.relations[rel.key] = rel

    def relation(self, src: str, dst: str) -> Relation | None:
        return self.relations.get(relation_key(src, dst))

    def transmit_over(self, r: Route | None) -> Transmission:
        if r is None:
            return Transmission(False, cause="no_route")
        for lid in r.links:
            if not self.graph.links[lid].up:
                return Transmission(False, route=r.nodes, cause="link_down", link=lid)
        for lid in r.links:
            if self.drop(lid):
                return Transmission(False, route=r.nodes, cause="intermittent", link=lid)
        return Transmission(True, latency=r.latency, route=r.nodes)

    def probe(self, r: Route | None) -> bool:
        return self.transmit_over(r).delivered
