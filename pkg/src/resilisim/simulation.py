"""One simulated run: components, network, observers and managers on one engine."""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path

from .contracts import Contract
from .engine import Engine, Event, EventKind, Priority
from .faultlab import FaultInjector, HangingProcess, fault_target
from .observers import BEAT, IN, OUT, Observer, TimedAutomaton, Violation, heartbeat_template, template_for
from .resilience import (
    SWITCH_BEHAVIOR,
    ActionResult,
    ApplicationState,
    ComponentManager,
    LayerManager,
    NoFeasibleBehavior,
    PlatformState,
    RelationManager,
    Strategy,
    ESCALATE,
    apply_app_reconfiguration,
    apply_platform_reconfiguration,
    link_bound,
    negotiate_link_contract,
    select_behavior,
)
from .runtime import RECOVERED, ComponentState, DataMsg, FaultMsg, Network, Relation, WorkItem, relation_key
from .scenario import ObserverSpec, ScenarioConfig
from .telemetry import (
    ACTION,
    DELIVERY,
    DROPPED,
    FAULT_CLEARED,
    FAULT_MESSAGE,
    FAULT_ONSET,
    HEARTBEAT,
    INFEASIBLE,
    OBSERVER_RESET,
    QOS_CHANGE,
    RECONFIGURATION,
    RUN_END,
    RUN_START,
    SAMPLE,
    SEND,
    SUPPRESSED,
    UNDELIVERABLE,
    VIOLATION,
    MetricsReport,
    Trace,
    compute_metrics,
    export_metrics,
    export_trace,
)
from .topology import NoRoute, Route, route

RECOVERED_RECORD = "Recovered"


@dataclass
class Slot:
    """A configured observer plus the bookkeeping needed to drive it."""

    spec: ObserverSpec
    observer: Observer
    component: str | None = None
    relation: str | None = None
    follows: bool = False  # tracks the component's active contract
    template: str = ""
    deadline: int | None = None
    period: int | None = None
    in_key: str | None = None
    out_key: str | None = None
    timer: int | None = None
    timer_at: int | None = None
    reported: bool = False

    @property
    def id(self) -> str:
        return self.spec.id

    @property
    def owner(self) -> str:
        return self.component or self.relation or ""


@dataclass
class RunResult:
    scenario: str
    seed: int
    trace: Trace
    metrics: MetricsReport
    unresolved: list[str]
    infeasible: list[str]

    @property
    def exit_code(self) -> int:
        return 1 if (self.unresolved or self.infeasible) else 0

    def summary(self) -> str:
        m = self.metrics
        lines = [
            f"scenario {self.scenario} seed {self.seed} horizon {m.horizon}us",
            f"violations: {len(m.violations)}",
        ]
        lines += [f"  {t}us {obs} {kind}" for obs, t, kind in m.violations]
        lines.append(
            "reconfigurations: application {} platform {}".format(
                m.reconfigurations.get("Application", 0), m.reconfigurations.get("Platform", 0)
            )
        )
        lines.append(f"infeasible: {len(self.infeasible)}")
        lines += [f"  {x}" for x in self.infeasible]
        if self.unresolved:
            lines.append(f"unresolved at horizon: {', '.join(self.unresolved)}")
        lines.append(f"exit {self.exit_code}")
        return "\n".join(lines)


class Simulation:
    def __init__(self, cfg: ScenarioConfig, *, seed: int | None = None, horizon: int | None = None) -> None:
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.horizon = cfg.horizon if horizon is None else horizon
        self.engine = Engine()
        self.graph = copy.deepcopy(cfg.platform)
        self.trace = Trace()
        self.faults = FaultInjector(list(cfg.faults), self.graph, self.seed)
        self.network = Network(self.graph, drop=self.faults.should_drop)
        self.revert_on_recovery = cfg.revert_on_recovery
        self.contracts: dict[str, Contract] = dict(cfg.contracts)
        self.layer = LayerManager(self)
        self._ctx = Priority.DATA
        self._versions: dict[str, int] = {}
        self._restart_timers: dict[str, int] = {}
        self._infeasible: list[str] = []
        self._last_violation: dict[str, str] = {}

        entries = []
        for src, dst in cfg.relations:
            key = relation_key(src, dst)
            contract, r = negotiate_link_contract(src, dst, self.graph, factor=cfg.link_safety_factor)
            self.contracts[contract.id] = contract
            self._versions[key] = 1
            self.network.add_relation(Relation(src, dst, r, contract.id))
            entries.append((key, contract.id))
        self.platform_state = PlatformState(tuple(entries))

        self.components: dict[str, ComponentState] = {}
        app_entries = []
        for c in cfg.application.components:
            spec = cfg.components[c]
            behs = cfg.behaviors_of(c)
            state = ComponentState(c, spec.node, behs, next(iter(sorted(behs))), spec.budget)
            self.components[c] = state
            if c in cfg.initial:
                active = self.contracts[cfg.initial[c]].tags["behavior"]
            else:
                active = select_behavior(behs.values(), spec.budget - self.output_link_bound(c))
            state.active = active
            app_entries.append((c, cfg.contract_for(c, active).id))
        self.app_state = ApplicationState(tuple(app_entries))

        self.managers = {c: ComponentManager(self, c) for c in self.components}
        self.relation_managers = {k: RelationManager(self, k) for k in self.network.relations}
        self.slots: dict[str, Slot] = {}
        for spec in cfg.observers:
            self.slots[spec.id] = self._make_slot(spec)
        self._index_ports()

    # -- small helpers used by managers -------------------------------------

    @property
    def now(self) -> int:
        return self.engine.now

    def record(self, entity: str, kind: str, **data):
        return self.trace.append(self.now, entity, kind, **data)

    def action(self, entity: str, strategy: str, ok: bool, detail: str, cause: str, **extra) -> ActionResult:
        self.record(entity, ACTION, strategy=strategy, ok=ok, detail=detail, cause=cause, **extra)
        return ActionResult(strategy, ok, detail)

    def policy_for(self, entity: str, kind: str) -> tuple[Strategy, ...]:
        p = self.cfg.policies.get(entity)
        return p.for_kind(kind) if p else (Strategy(ESCALATE),)

    def component_consumers(self, c: str) -> list[str]:
        return [d for d in self.cfg.application.consumers(c) if d in self.components]

    def behavior_of_contract(self, contract_id: str) -> str:
        return self.contracts[contract_id].tags["behavior"]

    def _out_relations(self, c: str) -> list[Relation]:
        src = self.cfg.mapping[c]
        out = []
        for d in self.component_consumers(c):
            rel = self.network.relation(src, self.cfg.mapping[d])
            if rel is not None and rel not in out:
                out.append(rel)
        return out

    def output_link_bound(self, c: str) -> int:
        bounds = [link_bound(self.contracts[r.contract]) for r in self._out_relations(c) if r.contract]
        return max(bounds, default=0)

    def producer_slack(self, c: str) -> int:
        lat = max((r.route.latency for r in self._out_relations(c) if r.route), default=0)
        return self.components[c].slack(lat)

    def infeasible(self, subject: str, detail: str, cause: str) -> str:
        self.record("layer", INFEASIBLE, subject=subject, detail=detail, cause=cause)
        report = f"Infeasible({subject}: {detail})"
        self._infeasible.append(f"{self.now}us {report}")
        return report

    def mark_infeasible(self, rel: Relation, cause: str) -> None:
        rel.route = None

    # -- observers ----------------------------------------------------------

    def _bind(self, slot: Slot, contract: Contract) -> tuple[TimedAutomaton, dict[str, str]]:
        g = contract.guarantees[slot.spec.guarantee if slot.spec.guarantee < len(contract.guarantees) else 0]
        automaton = template_for(g)
        binding = {f"{slot.component}.{g.input}": IN}
        if OUT in automaton.alphabet:
            binding[f"{slot.component}.{g.output}"] = OUT
        slot.deadline, slot.period = g.deadline, g.period
        slot.template = slot.spec.type
        slot.in_key = f"{slot.component}.{g.input}"
        slot.out_key = f"{slot.component}.{g.output}" if OUT in automaton.alphabet else None
        return automaton, binding

    def _make_slot(self, spec: ObserverSpec) -> Slot:
        if spec.type == "heartbeat":
            rel = spec.relation
            automaton = heartbeat_template(spec.period, spec.miss_threshold)
            key = f"{rel}.beat"
            obs = Observer(automaton, {key: BEAT}, id=spec.id, contract=self.network.relations[rel].contract, host=spec.host)
            return Slot(spec, obs, relation=rel, template="heartbeat", period=spec.period * spec.miss_threshold, in_key=key)
        contract = self.contracts[spec.contract]
        comp = contract.tags["component"]
        follows = "behavior" in contract.tags
        if follows:
            contract = self.contracts[self.app_state.contract_of(comp)]
        slot = Slot(spec, None, component=comp, follows=follows)  # type: ignore[arg-type]
        automaton, binding = self._bind(slot, contract)
        slot.observer = Observer(automaton, binding, id=spec.id, contract=contract.id, host=spec.host)
        return slot

    def _index_ports(self) -> None:
        self._ports: dict[str, list[Slot]] = {}
        for slot in self.slots.values():
            for key in slot.observer.binding:
                self._ports.setdefault(key, []).append(slot)

    def _record_reset(self, slot: Slot, reason: str) -> None:
        self.record(
            slot.id,
            OBSERVER_RESET,
            reason=reason,
            ctx="data" if self._ctx == Priority.DATA else "timer",
            template=slot.template,
            deadline=slot.deadline,
            period=slot.period,
            in_key=slot.in_key,
            out_key=slot.out_key,
            contract=slot.observer.contract,
        )

    def _flush(self, slot: Slot) -> None:
        # In timer context every data event at this instant has been seen, so
        # bounds expiring now are real misses; report them before the reset.
        obs = slot.observer
        if self._ctx >= Priority.TIMER and obs.violation is None:
            obs.advance(self.now)
            if obs.violation is not None:
                slot.reported = True
                vid = self._record_violation(slot, obs.violation)
                self.action(slot.owner, "None", True, "superseded by observer reset", vid)

    def _reset_slot(self, slot: Slot, reason: str) -> None:
        self._flush(slot)
        slot.observer.reset(self.now)
        slot.reported = False
        self._record_reset(slot, reason)
        self._rearm(slot)

    def _rebind(self, slot: Slot, contract: Contract) -> None:
        old = (slot.template, slot.deadline, slot.period, slot.in_key, slot.out_key)
        automaton, binding = self._bind(slot, contract)
        if (slot.template, slot.deadline, slot.period, slot.in_key, slot.out_key) == old:
            slot.observer.contract = contract.id
            return
        self._flush(slot)
        if slot.timer is not None:
            self.engine.cancel(slot.timer)
            slot.timer = slot.timer_at = None
        slot.observer = Observer(automaton, binding, id=slot.id, contract=contract.id, host=slot.spec.host, start=self.now)
        slot.reported = False
        self._record_reset(slot, "rebind")
        self._index_ports()
        self._rearm(slot)

    def _rearm(self, slot: Slot) -> None:
        nd = slot.observer.next_deadline()
        if slot.timer is not None and nd == slot.timer_at and self.engine.is_pending(slot.timer):
            return
        if slot.timer is not None:
            self.engine.cancel(slot.timer)
            slot.timer = slot.timer_at = None
        if nd is not None:
            nd = max(nd, self.now)
            slot.timer = self.engine.schedule_at(nd, slot.id, EventKind.TIMER_EXPIRED, ("observer", slot.id))
            slot.timer_at = nd

    def _emit(self, keys: list[str]) -> None:
        for key in keys:
            for slot in list(self._ports.get(key, ())):
                slot.observer.observe(key, self.now)
                self._after_step(slot)

    def _after_step(self, slot: Slot) -> None:
        v = slot.observer.violation
        if v is not None and not slot.reported:
            slot.reported = True
            self._handle_violation(slot, v)
        self._rearm(slot)

    def _record_violation(self, slot: Slot, v: Violation) -> str:
        vid = f"{slot.id}@{v.time}"
        links = None
        if slot.relation:
            r = self.network.relations[slot.relation].route
            links = list(r.links) if r else []
        self.record(
            slot.id,
            VIOLATION,
            id=vid,
            type=v.kind,
            contract=v.contract,
            component=slot.component,
            relation=slot.relation,
            links=links,
            at=v.time,
        )
        self._last_violation[slot.owner] = vid
        return vid

    def _handle_violation(self, slot: Slot, v: Violation) -> None:
        vid = self._record_violation(slot, v)
        if slot.component:
            self.managers[slot.component].on_violation(v, vid)
        else:
            self.relation_managers[slot.relation].on_violation(v, vid)

    # -- reconfiguration ----------------------------------------------------

    def switch_behavior(self, c: str, behavior: str, trigger: str, cause: str) -> None:
        contract = self.cfg.contract_for(c, behavior)
        self.app_state, rec = apply_app_reconfiguration(
            self.app_state, c, contract, self.now,
            declared=self.contracts, hosts=self.cfg.mapping, trigger=trigger, cause=cause,
        )
        self.components[c].switch_behavior(behavior)
        if rec is not None:
            self.record(
                c, RECONFIGURATION, level=rec.level, before=list(rec.before), after=list(rec.after),
                trigger=trigger, cause=cause, id=f"app@{self.now}:{c}",
            )
        self.record(c, QOS_CHANGE, qos=str(self.components[c].qos), behavior=behavior)
        for slot in self.slots.values():
            if slot.follows and slot.component == c:
                self._rebind(slot, contract)

    def set_relation_route(self, rel: Relation, r: Route, trigger: str, cause: str) -> None:
        version = self._versions[rel.key] + 1
        self._versions[rel.key] = version
        cid = f"L_{rel.src}_{rel.dst}#{version}"
        contract, _ = negotiate_link_contract(
            rel.src, rel.dst, self.graph, factor=self.cfg.link_safety_factor, contract_id=cid, via=r
        )
        self.contracts[cid] = contract
        rel.route = r
        rel.contract = cid
        self.platform_state, rec = apply_platform_reconfiguration(
            self.platform_state, rel.key, contract, self.now, trigger=trigger, cause=cause
        )
        self.record(
            rel.key, RECONFIGURATION, level=rec.level, before=list(rec.before), after=list(rec.after),
            trigger=trigger, cause=cause, id=cid, route=list(r.nodes), links=list(r.links), bound=link_bound(contract),
        )
        for slot in self.slots.values():
            if slot.relation == rel.key:
                slot.observer.contract = cid
                self._reset_slot(slot, "route change")
        self._check_budgets(rel, cid)

    def _check_budgets(self, rel: Relation, cause: str) -> None:
        """Re-select behaviors for components whose output now breaks their budget."""
        for c, comp in self.components.items():
            if rel not in self._out_relations(c):
                continue
            bound = self.output_link_bound(c)
            if comp.behavior.cost + bound <= comp.budget:
                continue
            impact = max(self.managers[c].impacts.values(), default=0)
            try:
                chosen = select_behavior(comp.behaviors.values(), comp.budget - bound - impact)
            except NoFeasibleBehavior:
                outcome = self.layer.escalate(("component", c, "NoFeasibleBehavior"), cause)
                self.action(c, ESCALATE, True, outcome, cause)
                continue
            if chosen != comp.active:
                self.switch_behavior(c, chosen, "Renegotiation", cause)
                self.action(c, SWITCH_BEHAVIOR, True, f"to {chosen}", cause)

    def _reoptimize_routes(self, cause: str) -> None:
        """After a link comes back, move relations onto strictly faster routes."""
        for rel in self.network.relations.values():
            try:
                best = route(self.graph, rel.src, rel.dst)
            except NoRoute:
                continue
            if rel.route is None or best.latency < rel.route.latency:
                self.set_relation_route(rel, best, "Renegotiation", cause)

    def restart_component(self, c: str, duration: int, cause: str) -> int:
        comp = self.components[c]
        until, dropped = comp.restart(duration, self.now)
        for item in dropped:
            if item.event_id is not None:
                self.engine.cancel(item.event_id)
        for h in self.faults.hangs_on(c):
            self.faults.clear(h.id, self.engine)
            self.record(c, FAULT_CLEARED, fault=h.id, reason="restart", id=f"clear:{h.id}")
        for slot in self.slots.values():
            if slot.component == c:
                self._reset_slot(slot, "restart")
        old = self._restart_timers.pop(c, None)
        if old is not None:
            self.engine.cancel(old)
        self._restart_timers[c] = self.engine.schedule_at(until, c, EventKind.TIMER_EXPIRED, ("restart", c))
        return until

    # -- messaging ----------------------------------------------------------

    def send_fault_msg(self, msg: FaultMsg, cause: str) -> None:
        fid = f"{msg.kind}:{msg.source}->{msg.dst}@{msg.issued_at}"
        self.record(
            msg.source, FAULT_MESSAGE, id=fid, phase="sent", dst=msg.dst, fault=msg.kind,
            expected_recovery=msg.expected_recovery, cause=cause,
        )
        src, dst = self.cfg.mapping[msg.source], self.cfg.mapping[msg.dst]
        latency = 0
        if src != dst:
            rel = self.network.relation(src, dst)
            if rel is not None:
                r = rel.route
            else:
                try:
                    r = route(self.graph, src, dst)
                except NoRoute:
                    r = None
            tx = self.network.transmit_over(r)
            if not tx.delivered and tx.cause != "intermittent":
                self.record(msg.source, UNDELIVERABLE, message=fid, dst=msg.dst, reason=tx.cause, link=tx.link)
                if rel is None:
                    return
                outcome = self.layer.escalate(("relation", rel.key, "Undeliverable"), fid)
                self.action(rel.key, ESCALATE, True, outcome, fid)
                tx = self.network.transmit_over(rel.route)
            if not tx.delivered:
                kind = DROPPED if tx.cause == "intermittent" else UNDELIVERABLE
                self.record(msg.source, kind, message=fid, dst=msg.dst, reason=tx.cause, link=tx.link)
                return
            latency = tx.latency
        self.engine.schedule(latency, msg.dst, EventKind.MESSAGE_DELIVERED, msg)

    def _send_data(self, c: str, d: str, origin: int, started_at: int, cc: int) -> None:
        app = self.cfg.application
        src = self.cfg.mapping[c]
        latency, nodes, rel_key = cc, (src,), None
        if d not in app.sinks and self.cfg.mapping[d] != src:
            rel = self.network.relation(src, self.cfg.mapping[d])
            rel_key = rel.key
            tx = self.network.transmit_over(rel.route)
            if not tx.delivered:
                kind = UNDELIVERABLE if tx.cause == "no_route" else DROPPED
                self.record(c, kind, dst=d, origin=origin, reason=tx.cause, link=tx.link, relation=rel_key)
                return
            latency += tx.latency
            nodes = tx.route
        msg = DataMsg(f"{c}>{d}@{origin}", c, d, origin, started_at, route=nodes)
        self.record(c, SEND, dst=d, origin=origin, relation=rel_key, route=list(nodes))
        self.engine.schedule(latency, d, EventKind.MESSAGE_DELIVERED, msg)

    def _start_work(self, c: str, origin: int) -> None:
        comp = self.components[c]
        key = f"{c}@{origin}"
        if key in comp.pending:
            return
        item = WorkItem(key, origin, self.now, comp.active)
        item.event_id = self.engine.schedule(comp.behavior.ec, c, EventKind.EXECUTION_COMPLETE, key)
        comp.pending[key] = item

    # -- event handlers -----------------------------------------------------

    def _dispatch(self, ev: Event) -> None:
        self._ctx = ev.kind.priority
        k = ev.kind
        if k is EventKind.SAMPLE_DUE:
            self._on_sample(ev.target, ev.data)
        elif k is EventKind.EXECUTION_COMPLETE:
            self._on_complete(ev.target, ev.data)
        elif k is EventKind.MESSAGE_DELIVERED:
            if isinstance(ev.data, FaultMsg):
                self._on_fault_msg(ev.data)
            else:
                self._on_delivered(ev.data)
        elif k is EventKind.HEARTBEAT_DUE:
            self._on_heartbeat(ev.data)
        elif k is EventKind.TIMER_EXPIRED:
            what, subject = ev.data
            if what == "observer":
                self._on_observer_timer(subject)
            else:
                self._on_restart_done(subject)
        elif k is EventKind.FAULT_ONSET:
            self._on_fault_onset(ev.data)
        elif k is EventKind.FAULT_CLEAR:
            self._on_fault_clear(ev.data)

    def _on_sample(self, c: str, index: int) -> None:
        spec = self.cfg.components[c].sample
        nxt = spec.offset + (index + 1) * spec.period
        if nxt <= self.horizon:
            self.engine.schedule_at(nxt, c, EventKind.SAMPLE_DUE, index + 1)
        detect = index % spec.detect_every == 0
        if not self.components[c].is_running(self.now):
            self.record(c, SUPPRESSED, detect=detect, index=index)
            return
        ports = [f"{c}.{spec.sample_port}"]
        if detect:
            ports.append(f"{c}.{spec.data_port}")
        self.record(c, SAMPLE, detect=detect, index=index, ports=ports)
        self._emit(ports)
        if detect:
            self._start_work(c, self.now)

    def _on_complete(self, c: str, key: str) -> None:
        comp = self.components[c]
        item = comp.pending.get(key)
        if item is None:
            return
        if not item.hung:
            hang = self.faults.hang_for(c, item.started_at)
            if hang is not None:
                item.hung = True
                if hang.forever:
                    item.event_id = None
                else:
                    item.event_id = self.engine.schedule(hang.extra_delay, c, EventKind.EXECUTION_COMPLETE, key)
                return
        del comp.pending[key]
        cc = comp.behaviors[item.behavior].cc
        for d in self.cfg.application.consumers(c):
            self._send_data(c, d, item.origin, item.started_at, cc)

    def _on_delivered(self, msg: DataMsg) -> None:
        c, d = msg.src, msg.dst
        out = self.cfg.components[c].out_port
        ports = [f"{c}.{out}"]
        is_comp = d in self.components
        if is_comp:
            ports.append(f"{d}.{out}")
        src, dst = self.cfg.mapping[c], self.cfg.mapping.get(d, self.cfg.mapping[c])
        rel = relation_key(src, dst) if src != dst else None
        self.record(
            c, DELIVERY, dst=d, origin=msg.origin, hop_start=msg.produced_at,
            deadline=self.cfg.components[c].budget, relation=rel,
            sink=d in self.cfg.application.sinks, ports=ports,
        )
        self._emit(ports)
        if is_comp and c in self.cfg.components[d].triggers:
            if self.components[d].is_running(self.now):
                self._start_work(d, msg.origin)
            else:
                self.record(d, SUPPRESSED, input=c, origin=msg.origin)

    def _on_fault_msg(self, msg: FaultMsg) -> None:
        fid = f"{msg.kind}:{msg.source}->{msg.dst}@{msg.issued_at}"
        self.record(msg.dst, FAULT_MESSAGE, id=fid, phase="delivered", source=msg.source, fault=msg.kind,
                    expected_recovery=msg.expected_recovery)
        self.managers[msg.dst].handle_fault_msg(msg, fid)

    def _on_heartbeat(self, slot_id: str) -> None:
        slot = self.slots[slot_id]
        nxt = self.now + slot.spec.period
        if nxt <= self.horizon:
            self.engine.schedule_at(nxt, slot.relation, EventKind.HEARTBEAT_DUE, slot_id)
        rel = self.network.relations[slot.relation]
        tx = self.network.transmit_over(rel.route)
        if tx.delivered:
            self.record(slot.relation, HEARTBEAT, relation=slot.relation, links=list(rel.route.links), ports=[slot.in_key])
            self._emit([slot.in_key])

    def _on_observer_timer(self, slot_id: str) -> None:
        slot = self.slots[slot_id]
        slot.timer = slot.timer_at = None
        slot.observer.advance(self.now)
        self._after_step(slot)

    def _on_restart_done(self, c: str) -> None:
        self._restart_timers.pop(c, None)
        if not self.components[c].finish_restart(self.now):
            return
        rid = f"recovered:{c}@{self.now}"
        self.record(c, RECOVERED_RECORD, id=rid)
        mgr = self.managers[c]
        for d in sorted(mgr.notified):
            self.send_fault_msg(FaultMsg(RECOVERED, c, d, 0, self.now), rid)
        mgr.notified.clear()

    def _on_fault_onset(self, fault_id: str) -> None:
        f = self.faults.onset(fault_id)
        self.record(fault_target(f), FAULT_ONSET, fault=f.id, fault_kind=type(f).__name__, id=f"onset:{f.id}")

    def _on_fault_clear(self, fault_id: str) -> None:
        f = self.faults.clear(fault_id)
        cid = f"clear:{f.id}"
        self.record(fault_target(f), FAULT_CLEARED, fault=f.id, reason="expired", id=cid)
        if not isinstance(f, HangingProcess):
            self._reoptimize_routes(cid)

    # -- driver -------------------------------------------------------------

    def _start(self) -> None:
        self._ctx = Priority.TIMER
        self.record(
            "run", RUN_START, scenario=self.cfg.name, seed=self.seed, horizon_us=self.horizon,
            delta_us=self.cfg.budgets.delta_s1_a1,
            application_state=list(self.app_state.contracts), platform_state=list(self.platform_state.contracts),
        )
        for c, comp in self.components.items():
            self.record(c, QOS_CHANGE, qos=str(comp.qos), behavior=comp.active)
        for slot in self.slots.values():
            slot.observer.reset(0)
            self._record_reset(slot, "start")
        for c, spec in self.cfg.components.items():
            if spec.sample is not None and spec.sample.offset <= self.horizon:
                self.engine.schedule_at(spec.sample.offset, c, EventKind.SAMPLE_DUE, 0)
        for slot in self.slots.values():
            if slot.relation:
                self.engine.schedule_at(0, slot.relation, EventKind.HEARTBEAT_DUE, slot.id)
        self.faults.inject(self.engine, self.components, self.horizon)

    def run(self) -> RunResult:
        self._start()
        self.engine.run_until(self.horizon, self._dispatch)
        self._ctx = Priority.FAULT
        unresolved = [s.id for s in self.slots.values() if s.observer.violation is not None]
        self.record("run", RUN_END, unresolved=unresolved, infeasible=len(self._infeasible))
        metrics = compute_metrics(self.trace, self.cfg.faults, self.cfg.budgets.delta_s1_a1)
        return RunResult(self.cfg.name, self.seed, self.trace, metrics, unresolved, list(self._infeasible))


def run_scenario(
    cfg: ScenarioConfig,
    trace_path: str | Path | None = None,
    metrics_path: str | Path | None = None,
    *,
    seed: int | None = None,
    until: int | None = None,
) -> RunResult:
    """Run ``cfg`` to its horizon and export the trace and metrics if paths are given."""
    result = Simulation(cfg, seed=seed, horizon=until).run()
    if trace_path is not None:
        export_trace(result.trace, trace_path)
    if metrics_path is not None:
        export_metrics(result.metrics, metrics_path)
    return result
