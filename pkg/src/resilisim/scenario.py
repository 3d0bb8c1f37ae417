"""Scenario files: a single JSON document describing one simulated system.

Durations are strings with a unit suffix (``"500ms"``) or the name of an
entry in ``budgets``. ``parse_scenario`` either returns a fully checked
``ScenarioConfig`` or raises ``ParseError`` (malformed text, bad duration)
or ``ValidationError`` carrying every problem found, each tagged with the
field path it came from.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from .contracts import (
    BUDGET_CHAIN,
    BudgetSet,
    Contract,
    ContractError,
    Every,
    TimedGuarantee,
    Within,
    WithinEvery,
    make_contract,
    validate_decomposition,
)
from .engine import DurationError, fmt_time, parse_duration
from .faultlab import FaultSpec, HangingProcess, IntermittentLink, NetworkOutage
from .observers import TEMPLATE_TYPES
from .resilience import ESCALATE, RESTART, STRATEGIES, PolicyError, ResponsePolicy, Strategy
from .runtime import Behavior, relation_key
from .topology import ApplicationGraph, CostModel, Link, NoRoute, PlatformGraph, Topology, route, validate

SCENARIO_FORMAT = 1
OBSERVER_TYPES = ("deadline", "periodic", "deadline_periodic", "heartbeat")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None) -> None:
        self.line = line
        self.path = path
        where = ", ".join(x for x in (f"line {line}" if line else "", path or "") if x)
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(ValueError):
    def __init__(self, problems: list[tuple[str, str]]) -> None:
        self.problems = problems
        super().__init__("; ".join(f"{p}: {m}" for p, m in problems))

    @property
    def paths(self) -> list[str]:
        return [p for p, _ in self.problems]


@dataclass(frozen=True)
class SampleSpec:
    sample_port: str
    data_port: str
    period: int
    detect_every: int = 1
    offset: int = 0


@dataclass(frozen=True)
class ComponentSpec:
    id: str
    node: str
    budget: int
    budget_name: str
    out_port: str
    sample: SampleSpec | None = None
    triggers: tuple[str, ...] = ()


@dataclass(frozen=True)
class ObserverSpec:
    id: str
    type: str
    host: str
    contract: str | None = None
    guarantee: int = 0
    relation: str | None = None
    period: int | None = None
    miss_threshold: int | None = None


@dataclass
class ScenarioConfig:
    name: str
    horizon: int
    seed: int
    budgets: BudgetSet
    application: ApplicationGraph
    platform: PlatformGraph
    mapping: dict[str, str]
    behaviors: dict[str, Behavior]
    components: dict[str, ComponentSpec]
    contracts: dict[str, Contract]
    initial: dict[str, str]  # component -> contract id (may be partial)
    observers: list[ObserverSpec]
    policies: dict[str, ResponsePolicy]
    faults: list[FaultSpec]
    link_safety_factor: int = 2
    revert_on_recovery: bool = True
    description: str = ""
    document: dict[str, Any] = field(default_factory=dict, repr=False)

    def behaviors_of(self, component: str) -> dict[str, Behavior]:
        return {b.id: b for b in self.behaviors.values() if b.owner == component}

    def contract_for(self, component: str, behavior: str) -> Contract:
        for c in self.contracts.values():
            if c.tags.get("component") == component and c.tags.get("behavior") == behavior:
                return c
        raise KeyError(f"no contract for {component}/{behavior}")

    @property
    def relations(self) -> list[tuple[str, str]]:
        """Node pairs that carry application traffic, in edge order."""
        out: list[tuple[str, str]] = []
        for u, v in self.application.edges:
            if u in self.mapping and v in self.mapping:
                pair = (self.mapping[u], self.mapping[v])
                if pair[0] != pair[1] and pair not in out:
                    out.append(pair)
        return out

    def with_overrides(self, *, seed: int | None = None, horizon: int | None = None) -> "ScenarioConfig":
        doc = copy.deepcopy(self.document)
        if seed is not None:
            doc["seed"] = seed
        if horizon is not None:
            doc["horizon"] = fmt_time(horizon)
        return build_scenario(doc)


# -- reading ------------------------------------------------------------------


def _line_of(text: str, needle: str) -> int | None:
    idx = text.find(json.dumps(needle))
    return None if idx < 0 else text.count("\n", 0, idx) + 1


class _Reader:
    def __init__(self, doc: dict[str, Any], text: str = "") -> None:
        self.doc = doc
        self.text = text
        self.problems: list[tuple[str, str]] = []
        self.names: dict[str, int] = {}

    def fail(self, path: str, msg: str) -> None:
        self.problems.append((path, msg))

    def duration(self, value: Any, path: str) -> int:
        if isinstance(value, str) and value in self.names:
            return self.names[value]
        try:
            return parse_duration(value)
        except DurationError as e:
            line = _line_of(self.text, value) if isinstance(value, str) else None
            raise ParseError(str(e), line, path) from None

    def section(self, key: str, kind: type, default: Any = None) -> Any:
        if key not in self.doc:
            if default is None:
                self.fail(key, "missing section")
                return kind()
            return default
        value = self.doc[key]
        if not isinstance(value, kind):
            self.fail(key, f"expected {kind.__name__}")
            return kind()
        return value


def parse_scenario(path: str | Path) -> ScenarioConfig:
    """Read and check a scenario file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror or e}") from None
    return parse_scenario_text(text)


def parse_scenario_text(text: str) -> ScenarioConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1)
    return build_scenario(doc, text)


def build_scenario(doc: dict[str, Any], text: str = "") -> ScenarioConfig:
    r = _Reader(doc, text or json.dumps(doc, indent=2))
    version = doc.get("format_version", SCENARIO_FORMAT)
    if version != SCENARIO_FORMAT:
        r.fail("format_version", f"unsupported version {version!r}")

    # budgets first: other sections may refer to them by name
    raw_budgets = r.section("budgets", dict)
    for k, v in raw_budgets.items():
        r.names[k] = r.duration(v, f"budgets.{k}")
    budgets = None
    missing = [k for k in BudgetSet.__dataclass_fields__ if k not in r.names]
    if missing:
        r.fail("budgets", f"missing {', '.join(missing)}")
    else:
        try:
            budgets = BudgetSet(**{k: r.names[k] for k in BudgetSet.__dataclass_fields__})
        except ContractError as e:
            r.fail("budgets", str(e))
    if budgets is not None:
        dec = validate_decomposition(budgets)
        if not dec.ok:
            r.fail(
                "budgets",
                f"end-to-end check failed: {' + '.join(BUDGET_CHAIN)} = {fmt_time(dec.total)} "
                f"exceeds delta_s1_a1 = {fmt_time(dec.bound)} by {fmt_time(dec.surplus)}",
            )

    horizon = r.duration(doc.get("horizon", "30s"), "horizon")
    if horizon <= 0:
        r.fail("horizon", "must be positive")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not (0 <= seed < 2**64):
        r.fail("seed", "must be an unsigned 64-bit integer")
        seed = 0

    app_doc = r.section("application", dict)
    application = ApplicationGraph(
        components=tuple(app_doc.get("components", ())),
        edges=tuple(tuple(e) for e in app_doc.get("edges", ())),
        sources=tuple(app_doc.get("sources", ())),
        sinks=tuple(app_doc.get("sinks", ())),
    )
    for i, e in enumerate(application.edges):
        if len(e) != 2:
            r.fail(f"application.edges[{i}]", "an edge is a [producer, consumer] pair")

    plat_doc = r.section("platform", dict)
    platform = PlatformGraph(tuple(plat_doc.get("nodes", ())))
    for i, ld in enumerate(plat_doc.get("links", ())):
        p = f"platform.links[{i}]"
        try:
            a, b = ld["endpoints"]
            link = Link(ld["id"], a, b, ld.get("medium", "wired"), r.duration(ld["latency"], f"{p}.latency"))
        except (KeyError, ValueError, TypeError) as e:
            if isinstance(e, ParseError):
                raise
            r.fail(p, f"bad link: {e}")
            continue
        if link.id in platform.links:
            r.fail(f"{p}.id", f"duplicate link {link.id}")
        platform.add_link(link)

    mapping = dict(r.section("mapping", dict))

    behaviors: dict[str, Behavior] = {}
    costs = r.section("costs", dict, default={})
    ec: dict[str, int] = {}
    cc: dict[str, int] = {}
    for bid, bd in r.section("behaviors", dict).items():
        p = f"behaviors.{bid}"
        merged = {**bd, **costs.get(bid, {})}
        for name, table in (("ec", ec), ("cc", cc)):
            if name in merged:
                table[bid] = r.duration(merged[name], f"{p}.{name}")
        try:
            qos = Fraction(str(bd.get("qos", "1")))
        except (ValueError, ZeroDivisionError):
            r.fail(f"{p}.qos", f"not a number: {bd.get('qos')!r}")
            continue
        if "owner" not in bd:
            r.fail(f"{p}.owner", "missing")
            continue
        if bid in ec and bid in cc:
            try:
                behaviors[bid] = Behavior(bid, bd["owner"], qos, ec[bid], cc[bid])
            except ValueError as e:
                r.fail(p, str(e))
    owned: dict[str, list[str]] = {}
    for bid, bd in r.section("behaviors", dict).items():
        owned.setdefault(bd.get("owner", ""), []).append(bid)
    topo = Topology(application, platform, mapping, CostModel(ec, cc), {c: owned.get(c, []) for c in application.components})
    for d in validate(topo):
        r.fail(f"topology.{d.subject}", str(d))
    for bid, bd in r.section("behaviors", dict).items():
        if bd.get("owner") not in application.components:
            r.fail(f"behaviors.{bid}.owner", f"unknown component {bd.get('owner')!r}")

    components: dict[str, ComponentSpec] = {}
    comp_doc = r.section("components", dict)
    for c in application.components:
        p = f"components.{c}"
        cd = comp_doc.get(c)
        if not isinstance(cd, dict):
            r.fail(p, "missing component settings")
            continue
        budget_ref = cd.get("budget")
        if budget_ref is None:
            r.fail(f"{p}.budget", "missing")
            continue
        budget = r.duration(budget_ref, f"{p}.budget")
        sample = None
        if "sample" in cd:
            sd = cd["sample"]
            sample = SampleSpec(
                sample_port=sd.get("port", f"{c}_sample"),
                data_port=sd.get("data_port", f"{c}_in"),
                period=r.duration(sd.get("period", "T_samp"), f"{p}.sample.period"),
                detect_every=int(sd.get("detect_every", 1)),
                offset=r.duration(sd.get("offset", "0s"), f"{p}.sample.offset"),
            )
            if sample.detect_every < 1:
                r.fail(f"{p}.sample.detect_every", "must be at least 1")
            if not any(src in application.sources for src in application.producers(c)):
                r.fail(f"{p}.sample", "only components fed by a source can sample")
        producers = [x for x in application.producers(c) if x in application.components]
        triggers = tuple(cd.get("trigger", producers))
        for t in triggers:
            if t not in producers:
                r.fail(f"{p}.trigger", f"{t} does not feed {c}")
        components[c] = ComponentSpec(
            c, mapping.get(c, ""), budget, budget_ref if budget_ref in r.names else fmt_time(budget),
            cd.get("out", f"{c}_out"), sample, triggers,
        )
        if sample is None and not triggers:
            r.fail(p, "component neither samples nor is triggered by a producer")

    contracts: dict[str, Contract] = {}
    for i, cd in enumerate(r.section("contracts", list)):
        p = f"contracts[{i}]"
        try:
            gs = []
            for j, gd in enumerate(cd.get("guarantees", ())):
                gp = f"{p}.guarantees[{j}]"
                d = r.duration(gd["within"], f"{gp}.within") if "within" in gd else None
                per = r.duration(gd["every"], f"{gp}.every") if "every" in gd else None
                if d is not None and per is not None:
                    pattern: Any = WithinEvery(d, per)
                elif d is not None:
                    pattern = Within(d)
                elif per is not None:
                    pattern = Every(per)
                else:
                    r.fail(gp, "needs within and/or every")
                    continue
                gs.append(TimedGuarantee(gd["output"], gd["input"], pattern, gd.get("relation", "pass-through")))
            c = make_contract(cd["id"], cd["subject"], gs, assumptions=cd.get("assumptions", ()), tag=cd.get("tag"))
        except ParseError:
            raise
        except (KeyError, TypeError) as e:
            r.fail(p, f"missing field {e}")
            continue
        except (ContractError, ValueError) as e:
            r.fail(p, str(e))
            continue
        if c.id in contracts:
            r.fail(f"{p}.id", f"duplicate contract {c.id}")
        contracts[c.id] = c
        comp = c.tags.get("component")
        if comp is not None:
            if comp not in application.components:
                r.fail(f"{p}.tag.component", f"unknown component {comp}")
            elif mapping.get(comp) != c.subject:
                r.fail(f"{p}.subject", f"{c.id} is on {c.subject} but {comp} is mapped to {mapping.get(comp)}")
            beh = c.tags.get("behavior")
            if beh is not None and behaviors.get(beh) is not None and behaviors[beh].owner != comp:
                r.fail(f"{p}.tag.behavior", f"{beh} does not belong to {comp}")
    for bid in behaviors:
        owner = behaviors[bid].owner
        if not any(c.tags.get("component") == owner and c.tags.get("behavior") == bid for c in contracts.values()):
            r.fail(f"behaviors.{bid}", "no contract is tagged with this behavior")

    initial: dict[str, str] = {}
    for comp, cid in doc.get("initial", {}).items():
        c = contracts.get(cid)
        if c is None or c.tags.get("component") != comp or "behavior" not in c.tags:
            r.fail(f"initial.{comp}", f"{cid!r} is not a behavior contract of {comp}")
        else:
            initial[comp] = cid

    relation_keys = {relation_key(u, v) for u, v in _relations(application, mapping)}
    if not r.problems:
        for u, v in dict.fromkeys(_relations(application, mapping)):
            try:
                route(platform, u, v)
            except NoRoute:
                r.fail("mapping", f"components on {u} cannot reach {v}")
    observers: list[ObserverSpec] = []
    seen_obs: set[str] = set()
    for i, od in enumerate(r.section("observers", list, default=[])):
        p = f"observers[{i}]"
        oid, typ = od.get("id"), od.get("type")
        if not oid or oid in seen_obs:
            r.fail(f"{p}.id", f"missing or duplicate id {oid!r}")
            continue
        seen_obs.add(oid)
        if typ not in OBSERVER_TYPES:
            r.fail(f"{p}.type", f"unknown observer type {typ!r}")
            continue
        host = od.get("host", "")
        if host not in platform.nodes:
            r.fail(f"{p}.host", f"unknown node {host!r}")
        if typ == "heartbeat":
            rel = od.get("relation")
            if rel not in relation_keys:
                r.fail(f"{p}.relation", f"{rel!r} carries no application traffic")
                continue
            period = r.duration(od.get("period", "200ms"), f"{p}.period")
            k = od.get("miss_threshold", 3)
            if not isinstance(k, int) or k < 1:
                r.fail(f"{p}.miss_threshold", "must be a positive integer")
                continue
            observers.append(ObserverSpec(oid, typ, host, relation=rel, period=period, miss_threshold=k))
            continue
        cid = od.get("contract")
        c = contracts.get(cid)
        gi = od.get("guarantee", 0)
        if c is None:
            r.fail(f"{p}.contract", f"unknown contract {cid!r}")
            continue
        if not (0 <= gi < len(c.guarantees)):
            r.fail(f"{p}.guarantee", f"{cid} has no guarantee #{gi}")
            continue
        actual = TEMPLATE_TYPES[type(c.guarantees[gi].pattern)]
        if actual != typ:
            r.fail(f"{p}.type", f"{cid} needs a {actual} observer, not {typ}")
            continue
        if c.tags.get("component") not in application.components:
            r.fail(f"{p}.contract", f"{cid} is not tagged with a component")
            continue
        observers.append(ObserverSpec(oid, typ, host, contract=cid, guarantee=gi))

    policies: dict[str, ResponsePolicy] = {}
    for entity, pd in r.section("policies", dict, default={}).items():
        p = f"policies.{entity}"
        if entity not in application.components and entity not in relation_keys:
            r.fail(p, f"unknown component or relation {entity!r}")
            continue
        by_kind = []
        for kind, steps in pd.items():
            strategies = []
            for j, sd in enumerate(steps):
                sp = f"{p}.{kind}[{j}]"
                name = sd.get("strategy")
                if name not in STRATEGIES:
                    r.fail(sp, f"unknown strategy {name!r}")
                    continue
                params = {}
                for key, value in sd.items():
                    if key == "strategy":
                        continue
                    if key in ("duration", "expected_recovery"):
                        value = r.duration(value, f"{sp}.{key}")
                    params[key] = value
                if name == RESTART and "duration" not in params:
                    r.fail(sp, "RestartComponent needs a duration")
                strategies.append(Strategy(name, tuple(sorted(params.items()))))
            if not strategies or strategies[-1].name != ESCALATE:
                r.fail(f"{p}.{kind}", f"policy must end with {ESCALATE}")
                continue
            by_kind.append((kind, tuple(strategies)))
        try:
            policies[entity] = ResponsePolicy(tuple(by_kind))
        except PolicyError as e:
            r.fail(p, str(e))

    faults: list[FaultSpec] = []
    fault_ids: set[str] = set()
    for i, fd in enumerate(r.section("faults", list, default=[])):
        p = f"faults[{i}]"
        fid, kind = fd.get("id"), fd.get("kind")
        if not fid or fid in fault_ids:
            r.fail(f"{p}.id", f"missing or duplicate id {fid!r}")
            continue
        fault_ids.add(fid)
        onset = r.duration(fd.get("onset", "0s"), f"{p}.onset")
        if onset > horizon:
            r.fail(f"{p}.onset", "onset is after the run horizon")
        permanent = bool(fd.get("permanent", False))
        duration = None if permanent or "duration" not in fd else r.duration(fd["duration"], f"{p}.duration")
        try:
            if kind == "HangingProcess":
                target = fd.get("target")
                if target not in application.components:
                    r.fail(f"{p}.target", f"unknown component {target!r}")
                    continue
                forever = bool(fd.get("hang_forever", False))
                extra = None if forever else r.duration(fd.get("extra_delay", "0s"), f"{p}.extra_delay")
                if extra is not None and extra <= 0:
                    r.fail(f"{p}.extra_delay", "must be positive (or set hang_forever)")
                    continue
                faults.append(HangingProcess(fid, target, onset, extra))
            elif kind in ("NetworkOutage", "IntermittentLink"):
                link = fd.get("link")
                if link not in platform.links:
                    r.fail(f"{p}.link", f"unknown link {link!r}")
                    continue
                if not permanent and duration is None and kind == "NetworkOutage":
                    r.fail(f"{p}.duration", "give a duration or set permanent")
                    continue
                if kind == "NetworkOutage":
                    faults.append(NetworkOutage(fid, link, onset, duration))
                else:
                    faults.append(IntermittentLink(fid, link, onset, float(fd.get("probability", 0.0)), fd.get("seed"), duration))
            else:
                r.fail(f"{p}.kind", f"unknown fault kind {kind!r}")
        except ValueError as e:
            r.fail(p, str(e))

    options = doc.get("options", {})
    factor = options.get("link_safety_factor", 2)
    if not isinstance(factor, int) or factor < 1:
        r.fail("options.link_safety_factor", "must be a positive integer")
        factor = 2
    revert = options.get("revert_on_recovery", True)
    if not isinstance(revert, bool):
        r.fail("options.revert_on_recovery", "must be true or false")
        revert = True

    if r.problems:
        raise ValidationError(r.problems)
    return ScenarioConfig(
        name=str(doc.get("name", "scenario")),
        horizon=horizon,
        seed=seed,
        budgets=budgets,  # type: ignore[arg-type]
        application=application,
        platform=platform,
        mapping=mapping,
        behaviors=behaviors,
        components=components,
        contracts=contracts,
        initial=initial,
        observers=observers,
        policies=policies,
        faults=faults,
        link_safety_factor=factor,
        revert_on_recovery=revert,
        description=str(doc.get("description", "")),
        document=copy.deepcopy(doc),
    )


def _relations(app: ApplicationGraph, mapping: dict[str, str]) -> Iterable[tuple[str, str]]:
    for u, v in app.edges:
        if u in mapping and v in mapping and mapping[u] != mapping[v]:
            yield mapping[u], mapping[v]


# -- the conveyor-belt pick-and-place system -----------------------------------


def _within(out: str, inp: str, bound: str) -> dict[str, str]:
    return {"output": out, "input": inp, "within": bound}


def cbbp_document(name: str = "cbbp_baseline", faults: list[dict] | None = None, **overrides: Any) -> dict[str, Any]:
    """The conveyor-belt pick-and-place system as a scenario document.

    A camera pipeline (c1 on n3) spots blocks, an arm tracker (c2 on n1)
    reports the robot pose, a planner (c3 on n4) computes the grasp and a
    controller (c4 on n5) drives the arm (actuator a1).
    """
    behaviors = {
        "beh1_c1": {"owner": "c1", "qos": "1", "ec": "700ms", "cc": "190ms"},
        "beh2_c1": {"owner": "c1", "qos": "0.8", "ec": "500ms", "cc": "100ms"},
        "beh3_c1": {"owner": "c1", "qos": "0.6", "ec": "300ms", "cc": "100ms"},
        "beh4_c1": {"owner": "c1", "qos": "0.4", "ec": "150ms", "cc": "50ms"},
        "beh1_c2": {"owner": "c2", "qos": "1", "ec": "600ms", "cc": "190ms"},
        "beh1_c3": {"owner": "c3", "qos": "1", "ec": "3500ms", "cc": "200ms"},
        "beh2_c3": {"owner": "c3", "qos": "0.8", "ec": "2000ms", "cc": "490ms"},
        "beh3_c3": {"owner": "c3", "qos": "0.5", "ec": "1000ms", "cc": "190ms"},
        "beh1_c4": {"owner": "c4", "qos": "1", "ec": "1500ms", "cc": "490ms"},
    }
    mapping = {"c1": "n3", "c2": "n1", "c3": "n4", "c4": "n5"}
    ports = {
        "c1": ("s1_data", "c1_data", "T_s1_c1"),
        "c2": ("s2_data", "c2_data", "T_s1_c1"),
        "c3": ("c1_data", "c3_data", "T_c3_c4"),
        "c4": ("c3_data", "a1_cmd", "T_c4_a1"),
    }
    contracts = []
    for bid, bd in behaviors.items():
        comp = bd["owner"]
        inp, out, budget = ports[comp]
        contracts.append({
            "id": f"C_{comp}_{bid.split('_')[0]}",
            "subject": mapping[comp],
            "guarantees": [_within(out, inp, budget)],
            "tag": {"component": comp, "behavior": bid},
        })
    contracts.append({
        "id": "C_c1_sampling",
        "subject": "n3",
        "guarantees": [{"output": "s1_data", "input": "s1_sample", "every": "T_samp"}],
        "tag": {"component": "c1", "role": "sampling"},
    })
    restart = [
        {"strategy": "RestartComponent", "duration": "1500ms"},
        {"strategy": "NotifyConsumers"},
        {"strategy": "Escalate"},
    ]
    doc: dict[str, Any] = {
        "format_version": SCENARIO_FORMAT,
        "name": name,
        "description": "Conveyor-belt pick-and-place: camera c1, arm tracker c2, planner c3, controller c4.",
        "horizon": "30s",
        "seed": 7,
        "budgets": {
            "T_s1_c1": "1s",
            "T_c1_c3": "3s",
            "T_c3_c4": "3s",
            "T_c4_a1": "2s",
            "delta_s1_a1": "10s",
            "T_samp": "500ms",
            "T_n4_c3": "50ms",
        },
        "application": {
            "components": ["c1", "c2", "c3", "c4"],
            "sources": ["S1", "S2"],
            "sinks": ["a1"],
            "edges": [["S1", "c1"], ["S2", "c2"], ["c1", "c3"], ["c2", "c3"], ["c3", "c4"], ["c4", "a1"]],
        },
        "platform": {
            "nodes": ["n1", "n2", "n3", "n4", "n5"],
            "links": [
                {"id": "m1", "endpoints": ["n3", "n4"], "medium": "wired", "latency": "10ms"},
                {"id": "m2", "endpoints": ["n3", "n4"], "medium": "wireless", "latency": "40ms"},
                {"id": "m3", "endpoints": ["n1", "n4"], "medium": "wired", "latency": "10ms"},
                {"id": "m4", "endpoints": ["n4", "n5"], "medium": "wired", "latency": "10ms"},
                {"id": "m5", "endpoints": ["n3", "n1"], "medium": "wired", "latency": "10ms"},
            ],
        },
        "mapping": mapping,
        "components": {
            "c1": {"budget": "T_s1_c1", "out": "c1_data",
                   "sample": {"port": "s1_sample", "data_port": "s1_data", "period": "T_samp", "detect_every": 5}},
            "c2": {"budget": "T_s1_c1", "out": "c2_data",
                   "sample": {"port": "s2_sample", "data_port": "s2_data", "period": "T_samp", "detect_every": 5}},
            "c3": {"budget": "T_c3_c4", "out": "c3_data", "trigger": ["c1"]},
            "c4": {"budget": "T_c4_a1", "out": "a1_cmd"},
        },
        "behaviors": behaviors,
        "contracts": contracts,
        "initial": {"c1": "C_c1_beh1", "c2": "C_c2_beh1", "c3": "C_c3_beh2", "c4": "C_c4_beh1"},
        "observers": [
            {"id": "obs_c1", "type": "deadline", "contract": "C_c1_beh1", "host": "n3"},
            {"id": "obs_c1_sampling", "type": "periodic", "contract": "C_c1_sampling", "host": "n3"},
            {"id": "obs_c2", "type": "deadline", "contract": "C_c2_beh1", "host": "n1"},
            {"id": "obs_c3", "type": "deadline", "contract": "C_c3_beh2", "host": "n4"},
            {"id": "obs_c4", "type": "deadline", "contract": "C_c4_beh1", "host": "n5"},
            {"id": "hb_n3_n4", "type": "heartbeat", "relation": "n3->n4", "period": "200ms",
             "miss_threshold": 3, "host": "n4"},
        ],
        "policies": {
            "c1": {"DeadlineMiss": restart, "PeriodMiss": restart},
            "c2": {"DeadlineMiss": restart},
            "c3": {"DeadlineMiss": restart},
            "c4": {"DeadlineMiss": restart},
            "n3->n4": {"HeartbeatLoss": [{"strategy": "SwitchLink", "medium": "wireless"}, {"strategy": "Escalate"}]},
        },
        "faults": faults or [],
        "options": {"link_safety_factor": 2, "revert_on_recovery": True},
    }
    doc.update(overrides)
    return doc


def _outage(fid: str, link: str, onset: str = "4.1s") -> dict[str, Any]:
    return {"id": fid, "kind": "NetworkOutage", "link": link, "onset": onset, "permanent": True}


BUILTIN: dict[str, dict[str, Any]] = {
    "cbbp_baseline": cbbp_document("cbbp_baseline"),
    "cbbp_hanging": cbbp_document(
        "cbbp_hanging",
        [{"id": "hang_c1", "kind": "HangingProcess", "target": "c1", "onset": "5s", "extra_delay": "1500ms"}],
    ),
    "cbbp_outage_wireless": cbbp_document("cbbp_outage_wireless", [_outage("cut_m1", "m1")]),
    "cbbp_outage_reroute": cbbp_document(
        "cbbp_outage_reroute", [_outage("cut_m1", "m1"), _outage("cut_m2", "m2")]
    ),
    "cbbp_infeasible": cbbp_document(
        "cbbp_infeasible", [_outage("cut_m1", "m1"), _outage("cut_m2", "m2"), _outage("cut_m5", "m5")]
    ),
}


def builtin_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__package__).joinpath("scenarios").iterdir() if p.name.endswith(".json"))


def builtin_path(name: str) -> Path:
    p = resources.files(__package__).joinpath("scenarios", f"{name}.json")
    if not p.is_file():
        raise KeyError(f"no built-in scenario {name!r}")
    return Path(str(p))


def load_builtin(name: str) -> ScenarioConfig:
    return parse_scenario(builtin_path(name))


def dump_document(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


def resolve_scenario(ref: str) -> ScenarioConfig:
    """A path to a scenario file, or the name of a built-in scenario."""
    p = Path(ref)
    if p.exists() or not _NAME_RE.match(ref):
        return parse_scenario(p)
    return load_builtin(ref)
