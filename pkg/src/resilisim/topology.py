"""Application graph, platform graph, mapping, costs and routing."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping


class Medium(str, Enum):
    WIRED = "wired"
    WIRELESS = "wireless"


class LinkState(str, Enum):
    UP = "up"
    DOWN = "down"


class NoRoute(LookupError):
    pass


class MissingBehavior(KeyError):
    pass


@dataclass
class Link:
    id: str
    a: str
    b: str
    medium: Medium
    latency: int
    state: LinkState = LinkState.UP

    def __post_init__(self) -> None:
        self.medium = Medium(self.medium)
        self.state = LinkState(self.state)
        if self.latency <= 0:
            raise ValueError(f"link {self.id}: latency must be positive")

    @property
    def up(self) -> bool:
        return self.state is LinkState.UP

    @property
    def endpoints(self) -> frozenset[str]:
        return frozenset((self.a, self.b))

    def other(self, node: str) -> str:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise ValueError(f"{node} is not an endpoint of {self.id}")

    def joins(self, u: str, v: str) -> bool:
        return self.endpoints == frozenset((u, v))


@dataclass
class PlatformGraph:
    nodes: tuple[str, ...]
    links: dict[str, Link] = field(default_factory=dict)

    def add_link(self, link: Link) -> None:
        self.links[link.id] = link

    def incident(self, node: str) -> list[Link]:
        return [l for l in self.links.values() if node in l.endpoints]

    def links_between(self, u: str, v: str) -> list[Link]:
        return sorted((l for l in self.links.values() if l.joins(u, v)), key=lambda l: (l.latency, l.id))


@dataclass
class ApplicationGraph:
    components: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    sources: tuple[str, ...] = ()
    sinks: tuple[str, ...] = ()

    def consumers(self, entity: str) -> list[str]:
        return [dst for src, dst in self.edges if src == entity]

    def producers(self, entity: str) -> list[str]:
        return [src for src, dst in self.edges if dst == entity]

    def chain(self) -> list[str]:
        """Components on the longest source-to-sink path, in order."""
        best: list[str] = []

        def walk(node: str, path: list[str]) -> None:
            nonlocal best
            nxt = self.consumers(node)
            if not nxt:
                comps = [n for n in path if n in self.components]
                if len(comps) > len(best):
                    best = comps
                return
            for n in nxt:
                if n not in path:
                    walk(n, path + [n])

        for s in self.sources:
            walk(s, [s])
        return best


@dataclass
class CostModel:
    ec: dict[str, int]
    cc: dict[str, int]

    def cost(self, behavior: str) -> int:
        try:
            return self.ec[behavior] + self.cc[behavior]
        except KeyError:
            raise MissingBehavior(behavior) from None


@dataclass(frozen=True)
class Defect:
    kind: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind}({self.subject}){': ' + self.detail if self.detail else ''}"


@dataclass
class Topology:
    application: ApplicationGraph
    platform: PlatformGraph
    mapping: dict[str, str]
    costs: CostModel
    behaviors: dict[str, list[str]]  # component -> behavior ids


def _find_cycle(app: ApplicationGraph) -> list[str] | None:
    graph: dict[str, list[str]] = {}
    for u, v in app.edges:
        graph.setdefault(u, []).append(v)
    state: dict[str, int] = {}
    stack: list[str] = []

    def dfs(u: str) -> list[str] | None:
        state[u] = 1
        stack.append(u)
        for v in graph.get(u, []):
            if state.get(v) == 1:
                return stack[stack.index(v):] + [v]
            if v not in state:
                found = dfs(v)
                if found:
                    return found
        stack.pop()
        state[u] = 2
        return None

    for node in sorted(graph):
        if node not in state:
            found = dfs(node)
            if found:
                return found
    return None


def validate(t: Topology) -> list[Defect]:
    """Structural checks; an empty list means the topology is usable."""
    defects: list[Defect] = []
    app, plat = t.application, t.platform
    entities = set(app.components) | set(app.sources) | set(app.sinks)
    for u, v in app.edges:
        for x in (u, v):
            if x not in entities:
                defects.append(Defect("UnknownEntity", x, f"edge {u}->{v}"))
    cycle = _find_cycle(app)
    if cycle:
        defects.append(Defect("Cycle", cycle[0], " -> ".join(cycle)))
    for s in app.sources:
        if app.producers(s):
            defects.append(Defect("SourceHasInput", s))
    for s in app.sinks:
        if app.consumers(s):
            defects.append(Defect("SinkHasOutput", s))
    for c in app.components:
        if c not in t.mapping:
            defects.append(Defect("UnmappedComponent", c))
        elif t.mapping[c] not in plat.nodes:
            defects.append(Defect("UnknownNode", c, f"mapped to {t.mapping[c]}"))
        behs = t.behaviors.get(c, [])
        if not behs:
            defects.append(Defect("NoBehavior", c))
        for b in behs:
            for name, table in (("EC", t.costs.ec), ("CC", t.costs.cc)):
                if b not in table:
                    defects.append(Defect("MissingCost", b, f"no {name} entry"))
                elif table[b] <= 0:
                    defects.append(Defect("NonPositiveCost", b, f"{name}={table[b]}"))
    for link in plat.links.values():
        for n in (link.a, link.b):
            if n not in plat.nodes:
                defects.append(Defect("UnknownLinkEndpoint", link.id, n))
    return defects


# -- routing ------------------------------------------------------------------


@dataclass(frozen=True)
class Route:
    nodes: tuple[str, ...]
    links: tuple[str, ...]
    latency: int

    @property
    def hops(self) -> int:
        return len(self.links)


LinkFilter = Callable[[Link], bool]


def any_up(link: Link) -> bool:
    return link.up


def route(g: PlatformGraph, src: str, dst: str, predicate: LinkFilter = any_up) -> Route:
    """Least-latency path from ``src`` to ``dst``.

    Only links that are up and pass ``predicate`` are used. Ties go to fewer
    hops, then to the lexicographically smaller node sequence; between two
    parallel links the faster (then lower id) one wins. Raises ``NoRoute``.
    """
    for n in (src, dst):
        if n not in g.nodes:
            raise NoRoute(f"unknown node {n!r}")
    if src == dst:
        return Route((src,), (), 0)
    usable = [l for l in g.links.values() if l.up and predicate(l)]
    adj: dict[str, list[Link]] = {}
    for l in usable:
        adj.setdefault(l.a, []).append(l)
        adj.setdefault(l.b, []).append(l)

    # (latency, hops, node path) is isotone under extension, so label-setting works.
    heap: list[tuple[int, int, tuple[str, ...], tuple[str, ...]]] = [(0, 0, (src,), ())]
    done: set[str] = set()
    while heap:
        lat, hops, path, links = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dst:
            return Route(path, links, lat)
        best_link: dict[str, Link] = {}
        for l in adj.get(u, []):
            v = l.other(u)
            cur = best_link.get(v)
            if cur is None or (l.latency, l.id) < (cur.latency, cur.id):
                best_link[v] = l
        for v, l in best_link.items():
            if v not in done:
                heapq.heappush(heap, (lat + l.latency, hops + 1, path + (v,), links + (l.id,)))
    raise NoRoute(f"no route from {src} to {dst}")


def route_latency(g: PlatformGraph, links: Iterable[str]) -> int:
    return sum(g.links[l].latency for l in links)


def end_to_end_estimate(
    chosen: Mapping[str, str],
    costs: CostModel,
    extra: Mapping[str, int] | None = None,
    chain: Iterable[str] | None = None,
) -> int:
    """Sum of EC + CC (+ any injected extra delay) along the chain.

    ``chosen`` maps component to its active behavior; ``chain`` defaults to
    every component in ``chosen``.
    """
    extra = extra or {}
    total = 0
    for comp in (chain if chain is not None else chosen):
        if comp not in chosen:
            raise MissingBehavior(comp)
        total += costs.cost(chosen[comp]) + extra.get(comp, 0)
    return total
