"""Resilience managers and the reconfiguration machinery.

Application state and platform state are ordered tuples of active contract
ids. Every change to either one produces a ``ReconfigurationRecord``.
Component managers turn observer violations and incoming fault messages into
actions following a per-entity ``ResponsePolicy``; a single layer manager with
a global view of the platform takes escalations and reroutes around dead
links.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable, Mapping

from .contracts import Contract, SubjectMismatch, TimedGuarantee, Within, make_contract
from .observers import Violation
from .runtime import RECOVERED, Behavior, FaultMsg, Relation
from .topology import NoRoute, PlatformGraph, Route, route

if TYPE_CHECKING:  # pragma: no cover
    from .simulation import Simulation

APPLICATION = "Application"
PLATFORM = "Platform"

RESTART = "RestartComponent"
SWITCH_BEHAVIOR = "SwitchBehavior"
SWITCH_CONTRACT = "SwitchContract"
SWITCH_LINK = "SwitchLink"
NOTIFY = "NotifyConsumers"
ESCALATE = "Escalate"
STRATEGIES = (RESTART, SWITCH_BEHAVIOR, SWITCH_CONTRACT, SWITCH_LINK, NOTIFY, ESCALATE)


class UnknownContract(KeyError):
    pass


class UnknownRelation(KeyError):
    pass


class NoFeasibleBehavior(LookupError):
    pass


class PolicyError(ValueError):
    pass


# -- states ---------------------------------------------------------------------


@dataclass(frozen=True)
class ApplicationState:
    entries: tuple[tuple[str, str], ...]  # (component, active contract id), scenario order

    @property
    def contracts(self) -> tuple[str, ...]:
        return tuple(c for _, c in self.entries)

    @property
    def components(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.entries)

    def contract_of(self, component: str) -> str:
        for k, c in self.entries:
            if k == component:
                return c
        raise KeyError(component)

    def with_contract(self, component: str, contract_id: str) -> "ApplicationState":
        if component not in self.components:
            raise KeyError(component)
        return ApplicationState(tuple((k, contract_id if k == component else c) for k, c in self.entries))


@dataclass(frozen=True)
class PlatformState:
    entries: tuple[tuple[str, str], ...]  # (relation, active contract id)

    @property
    def contracts(self) -> tuple[str, ...]:
        return tuple(c for _, c in self.entries)

    @property
    def relations(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.entries)

    def contract_of(self, relation: str) -> str:
        for k, c in self.entries:
            if k == relation:
                return c
        raise UnknownRelation(relation)


@dataclass(frozen=True)
class ReconfigurationRecord:
    level: str
    time: int
    before: tuple[str, ...]
    after: tuple[str, ...]
    trigger: str  # "Violation" | "FaultMsg" | "Renegotiation"
    cause: str = ""

    def __post_init__(self) -> None:
        if self.before == self.after:
            raise ValueError("a reconfiguration must change the state")


def apply_app_reconfiguration(
    s: ApplicationState,
    component: str,
    contract: Contract,
    at: int,
    *,
    declared: Mapping[str, Contract],
    hosts: Mapping[str, str],
    trigger: str = "Violation",
    cause: str = "",
) -> tuple[ApplicationState, ReconfigurationRecord | None]:
    if contract.id not in declared:
        raise UnknownContract(contract.id)
    if contract.subject != hosts[component]:
        raise SubjectMismatch(f"{contract.id} is on {contract.subject}, {component} runs on {hosts[component]}")
    if s.contract_of(component) == contract.id:
        return s, None
    new = s.with_contract(component, contract.id)
    return new, ReconfigurationRecord(APPLICATION, at, s.contracts, new.contracts, trigger, cause)


def apply_platform_reconfiguration(
    p: PlatformState,
    relation: str,
    contract: Contract,
    at: int,
    *,
    trigger: str = "Renegotiation",
    cause: str = "",
) -> tuple[PlatformState, ReconfigurationRecord | None]:
    if relation not in p.relations:
        raise UnknownRelation(relation)
    if p.contract_of(relation) == contract.id:
        return p, None
    new = PlatformState(tuple((k, contract.id if k == relation else c) for k, c in p.entries))
    return new, ReconfigurationRecord(PLATFORM, at, p.contracts, new.contracts, trigger, cause)


def negotiate_link_contract(
    src: str,
    dst: str,
    graph: PlatformGraph,
    *,
    factor: int = 2,
    contract_id: str | None = None,
    via: Route | None = None,
) -> tuple[Contract, Route]:
    """Delivery-bound contract for src->dst over the current best route.

    The bound is the route latency times ``factor``. Raises ``NoRoute``.
    """
    r = via if via is not None else route(graph, src, dst)
    bound = r.latency * factor
    c = make_contract(
        contract_id or f"L_{src}_{dst}",
        src,
        [TimedGuarantee(output="rx", input="tx", pattern=Within(bound))],
        tag={"relation": f"{src}->{dst}", "route": "-".join(r.nodes)},
    )
    return c, r


def link_bound(c: Contract) -> int:
    return c.guarantees[0].deadline or 0


# -- behavior selection -----------------------------------------------------------


def selection_key(b: Behavior) -> tuple:
    return (-b.qos, b.cost, b.id)


def select_behavior(behaviors: Iterable[Behavior], budget: int) -> str:
    """Highest-QoS behavior whose EC + CC fits the budget.

    Ties prefer the cheaper behavior, then the smaller id.
    """
    behaviors = list(behaviors)
    if not behaviors:
        raise ValueError("no behaviors to choose from")
    feasible = [b for b in behaviors if b.cost <= budget]
    if not feasible:
        raise NoFeasibleBehavior(f"nothing fits in {budget}us")
    return min(feasible, key=selection_key).id


def consumer_budget(budget: int, expected_recovery: int, producer_slack: int = 0) -> int:
    """Budget left to a consumer once a producer's overrun is charged to it."""
    return budget - max(0, expected_recovery - producer_slack)


# -- policies -----------------------------------------------------------------


@dataclass(frozen=True)
class Strategy:
    name: str
    params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self) -> None:
        if self.name not in STRATEGIES:
            raise PolicyError(f"unknown strategy {self.name!r}")

    def get(self, key: str, default: Any = None) -> Any:
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class ResponsePolicy:
    by_kind: tuple[tuple[str, tuple[Strategy, ...]], ...]

    def __post_init__(self) -> None:
        for kind, strategies in self.by_kind:
            if not strategies or strategies[-1].name != ESCALATE:
                raise PolicyError(f"policy for {kind} must end with {ESCALATE}")
            if any(s.name == ESCALATE for s in strategies[:-1]):
                raise PolicyError(f"{ESCALATE} must be the last strategy for {kind}")

    def for_kind(self, kind: str) -> tuple[Strategy, ...]:
        for k, s in self.by_kind:
            if k == kind:
                return s
        return (Strategy(ESCALATE),)


# -- managers -----------------------------------------------------------------


@dataclass
class ActionResult:
    strategy: str
    ok: bool
    detail: str = ""


class ComponentManager:
    """Component-level manager: owns the component's observers' responses."""

    def __init__(self, sim: "Simulation", component: str) -> None:
        self.sim = sim
        self.component = component
        self.impacts: dict[str, int] = {}  # producer -> budget impact
        self.notified: set[str] = set()

    @property
    def state(self):
        return self.sim.components[self.component]

    def on_violation(self, v: Violation, cause: str) -> list[ActionResult]:
        sim, comp = self.sim, self.component
        policy = sim.policy_for(comp, v.kind)
        restart_for = next((s.get("duration") for s in policy if s.name == RESTART), None)
        results: list[ActionResult] = []
        recovered = False
        for s in policy:
            if s.name == NOTIFY:
                expected = restart_for or s.get("expected_recovery")
                if not expected:
                    results.append(sim.action(comp, NOTIFY, False, "no expected recovery time", cause))
                    continue
                for consumer in sim.component_consumers(comp):
                    msg = FaultMsg(v.kind, comp, consumer, expected, sim.now)
                    sim.send_fault_msg(msg, cause)
                    self.notified.add(consumer)
                    results.append(sim.action(comp, NOTIFY, True, f"to {consumer}", cause))
                continue
            if recovered:
                continue
            if s.name == RESTART:
                until = sim.restart_component(comp, s.get("duration"), cause)
                results.append(sim.action(comp, RESTART, True, f"until {until}", cause, until=until))
                recovered = True
            elif s.name in (SWITCH_BEHAVIOR, SWITCH_CONTRACT):
                ok, detail = self._degrade(s, cause)
                results.append(sim.action(comp, s.name, ok, detail, cause))
                recovered = ok
            elif s.name == SWITCH_LINK:
                results.append(sim.action(comp, SWITCH_LINK, False, "components own no links", cause))
            elif s.name == ESCALATE:
                outcome = sim.layer.escalate(("component", comp, v.kind), cause)
                results.append(sim.action(comp, ESCALATE, True, outcome, cause))
                recovered = True
        return results

    def _degrade(self, s: Strategy, cause: str) -> tuple[bool, str]:
        st = self.state
        target = s.get("to")
        if s.name == SWITCH_CONTRACT and target:
            target = self.sim.behavior_of_contract(target)
        if target is None:
            cheaper = [b for b in st.behaviors.values() if b.cost < st.behavior.cost]
            if not cheaper:
                return False, "no cheaper behavior"
            target = min(cheaper, key=selection_key).id
        if target == st.active:
            return False, f"already on {target}"
        self.sim.switch_behavior(self.component, target, "Violation", cause)
        return True, f"to {target}"

    def available_budget(self) -> int:
        """Component budget minus the bound of the link its output crosses."""
        return self.state.budget - self.sim.output_link_bound(self.component)

    def handle_fault_msg(self, m: FaultMsg, cause: str) -> str:
        """React to a producer's fault (or recovery) notice; returns the action taken."""
        if m.kind == RECOVERED:
            if m.source not in self.impacts:
                return "none"
            del self.impacts[m.source]
            if not self.sim.revert_on_recovery:
                return "none"
        else:
            slack = self.sim.producer_slack(m.source)
            self.impacts[m.source] = max(0, m.expected_recovery - slack)
        impact = max(self.impacts.values(), default=0)
        budget = self.available_budget() - impact
        st = self.state
        try:
            chosen = select_behavior(st.behaviors.values(), budget)
        except NoFeasibleBehavior:
            outcome = self.sim.layer.escalate(("component", self.component, "NoFeasibleBehavior"), cause)
            self.sim.action(self.component, ESCALATE, True, outcome, cause)
            return ESCALATE
        if chosen == st.active:
            return "none"
        self.sim.switch_behavior(self.component, chosen, "FaultMsg", cause)
        self.sim.action(self.component, SWITCH_BEHAVIOR, True, f"to {chosen}", cause)
        return SWITCH_BEHAVIOR


class RelationManager:
    """Link-level manager for one monitored node-to-node relation."""

    def __init__(self, sim: "Simulation", relation: str) -> None:
        self.sim = sim
        self.relation = relation

    def on_violation(self, v: Violation, cause: str) -> list[ActionResult]:
        sim = self.sim
        rel = sim.network.relations[self.relation]
        results: list[ActionResult] = []
        for s in sim.policy_for(self.relation, v.kind):
            if s.name == SWITCH_LINK:
                ok, detail = self._switch_link(rel, s.get("medium"), cause)
                results.append(sim.action(self.relation, SWITCH_LINK, ok, detail, cause))
                if ok:
                    break
            elif s.name == ESCALATE:
                outcome = sim.layer.escalate(("relation", self.relation, v.kind), cause)
                results.append(sim.action(self.relation, ESCALATE, True, outcome, cause))
                break
            else:
                results.append(sim.action(self.relation, s.name, False, "not applicable to a link", cause))
        return results

    def _switch_link(self, rel: Relation, medium: str | None, cause: str) -> tuple[bool, str]:
        current = set(rel.route.links) if rel.route else set()
        for link in self.sim.graph.links_between(rel.src, rel.dst):
            if link.id in current or not link.up:
                continue
            if medium and link.medium.value != medium:
                continue
            r = Route((rel.src, rel.dst), (link.id,), link.latency)
            self.sim.set_relation_route(rel, r, "Violation", cause)
            return True, f"to {link.id}"
        return False, f"no {medium or 'alternative'} link up between {rel.src} and {rel.dst}"


class LayerManager:
    """Platform-wide manager; plays the network controller role."""

    def __init__(self, sim: "Simulation") -> None:
        self.sim = sim

    def escalate(self, problem: tuple[str, str, str], cause: str) -> str:
        """Try to resolve a problem handed up by a component or link manager.

        Returns ``"Rerouted(n1,n2,...)"`` or ``"Infeasible(...)"``.
        """
        sim = self.sim
        scope, subject, what = problem
        sim.record("layer", "Escalation", scope=scope, subject=subject, problem=what, cause=cause)
        if scope == "relation":
            rel = sim.network.relations[subject]
            try:
                r = route(sim.graph, rel.src, rel.dst)
            except NoRoute:
                sim.mark_infeasible(rel, cause)
                return sim.infeasible(subject, f"no route {rel.src}->{rel.dst}", cause)
            sim.set_relation_route(rel, r, "Renegotiation", cause)
            return f"Rerouted({','.join(r.nodes)})"
        return sim.infeasible(subject, what, cause)
