from __future__ import annotations

import copy
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilisim.contracts import SubjectMismatch, make_contract
from resilisim.engine import MS, S
from resilisim.resilience import (
    APPLICATION,
    ESCALATE,
    NOTIFY,
    PLATFORM,
    RESTART,
    ApplicationState,
    ComponentManager,
    NoFeasibleBehavior,
    PlatformState,
    PolicyError,
    ReconfigurationRecord,
    ResponsePolicy,
    Strategy,
    UnknownContract,
    UnknownRelation,
    apply_app_reconfiguration,
    apply_platform_reconfiguration,
    consumer_budget,
    link_bound,
    negotiate_link_contract,
    select_behavior,
)
from resilisim.runtime import RECOVERED, Behavior, ComponentState, FaultMsg
from resilisim.scenario import cbbp_document, load_builtin
from resilisim.topology import LinkState, NoRoute

from tests.conftest import run_doc
from tests.oracles import brute_force_select, causal_gaps

C1_BEHAVIORS = [
    Behavior("beh1", "c1", Fraction(1), 800 * MS, 200 * MS),
    Behavior("beh2", "c1", Fraction(8, 10), 500 * MS, 100 * MS),
    Behavior("beh3", "c1", Fraction(6, 10), 300 * MS, 100 * MS),
    Behavior("beh4", "c1", Fraction(4, 10), 150 * MS, 50 * MS),
]


# -- behavior selection ----------------------------------------------------------


@pytest.mark.parametrize("budget, chosen", [(650 * MS, "beh2"), (10 * S, "beh1"), (400 * MS, "beh3"), (200 * MS, "beh4")])
def test_select_behavior(budget, chosen):
    assert select_behavior(C1_BEHAVIORS, budget) == chosen


def test_nothing_fits():
    with pytest.raises(NoFeasibleBehavior):
        select_behavior(C1_BEHAVIORS, 100 * MS)


def test_empty_behavior_set():
    with pytest.raises(ValueError):
        select_behavior([], S)


def test_ties_prefer_cheaper_then_id():
    same = [
        Behavior("b", "c", Fraction(1), 10, 10),
        Behavior("a", "c", Fraction(1), 10, 10),
        Behavior("z", "c", Fraction(1), 5, 5),
    ]
    assert select_behavior(same, 100) == "z"
    assert select_behavior(same[:2], 100) == "a"


_behaviors = st.lists(
    st.builds(
        Behavior,
        id=st.sampled_from(["a", "b", "c", "d", "e"]),
        owner=st.just("c"),
        qos=st.sampled_from([Fraction(k, 4) for k in range(5)]),
        ec=st.integers(1, 20),
        cc=st.integers(1, 20),
    ),
    min_size=1,
    max_size=6,
)


@settings(max_examples=300)
@given(_behaviors, st.integers(0, 50))
def test_select_matches_brute_force(behaviors, budget):
    want = brute_force_select(behaviors, budget)
    if want is None:
        with pytest.raises(NoFeasibleBehavior):
            select_behavior(behaviors, budget)
    else:
        assert select_behavior(behaviors, budget) == want


@given(st.integers(0, 10 * S), st.integers(1, 5 * S), st.integers(0, 5 * S))
def test_consumer_budget_never_grows(budget, recovery, slack):
    assert consumer_budget(budget, recovery, slack) <= budget


# -- fault messages, with a stand-in simulation ---------------------------------


class StubSim:
    """Just enough of a simulation for a component manager."""

    revert_on_recovery = True

    def __init__(self, state: ComponentState):
        self.components = {state.id: state}
        self.switches: list[tuple[str, str]] = []
        self.escalations: list[tuple] = []
        self.layer = self

    def producer_slack(self, producer: str) -> int:
        return 0

    def output_link_bound(self, component: str) -> int:
        return 0

    def switch_behavior(self, comp, to, trigger, cause):
        self.components[comp].switch_behavior(to)
        self.switches.append((comp, to))

    def action(self, *args, **kw):
        return args

    def escalate(self, problem, cause):
        self.escalations.append(problem)
        return f"Infeasible({problem[1]})"


def c3_manager():
    behs = {
        "beh1": Behavior("beh1", "c3", Fraction(1), 2 * S, 0),
        "beh2": Behavior("beh2", "c3", Fraction(7, 10), 1 * S, 0),
    }
    sim = StubSim(ComponentState("c3", "n4", behs, "beh1", 3 * S))
    return sim, ComponentManager(sim, "c3")


def fault(recovery, kind="DeadlineMiss"):
    return FaultMsg(kind, "c1", "c3", recovery, 6 * S)


def test_large_impact_degrades():
    sim, mgr = c3_manager()
    assert mgr.handle_fault_msg(fault(1500 * MS), "f") == "SwitchBehavior"
    assert sim.switches == [("c3", "beh2")]


def test_small_impact_keeps_behavior():
    sim, mgr = c3_manager()
    assert mgr.handle_fault_msg(fault(500 * MS), "f") == "none"
    assert sim.switches == []


def test_impossible_budget_escalates():
    sim, mgr = c3_manager()
    assert mgr.handle_fault_msg(fault(2500 * MS), "f") == ESCALATE
    assert sim.escalations == [("component", "c3", "NoFeasibleBehavior")]


def test_recovery_reverts():
    sim, mgr = c3_manager()
    mgr.handle_fault_msg(fault(1500 * MS), "f")
    mgr.handle_fault_msg(FaultMsg(RECOVERED, "c1", "c3", 0, 7500 * MS), "r")
    assert sim.switches == [("c3", "beh2"), ("c3", "beh1")]


def test_recovery_without_revert():
    sim, mgr = c3_manager()
    sim.revert_on_recovery = False
    mgr.handle_fault_msg(fault(1500 * MS), "f")
    assert mgr.handle_fault_msg(FaultMsg(RECOVERED, "c1", "c3", 0, 7500 * MS), "r") == "none"
    assert not mgr.impacts


def test_unsolicited_recovery_is_ignored():
    sim, mgr = c3_manager()
    assert mgr.handle_fault_msg(FaultMsg(RECOVERED, "c2", "c3", 0, 0), "r") == "none"


# -- state transitions -------------------------------------------------------------


def cbbp_state():
    cfg = load_builtin("cbbp_baseline")
    entries = tuple((c, cfg.initial[c]) for c in cfg.application.components)
    return cfg, ApplicationState(entries)


def test_initial_state_and_contract_switch():
    cfg, s = cbbp_state()
    assert s.contracts == ("C_c1_beh1", "C_c2_beh1", "C_c3_beh2", "C_c4_beh1")
    new, rec = apply_app_reconfiguration(
        s, "c1", cfg.contracts["C_c1_beh2"], 6 * S, declared=cfg.contracts, hosts=cfg.mapping
    )
    assert new.contract_of("c1") == "C_c1_beh2"
    assert (rec.level, rec.before, rec.after) == (APPLICATION, s.contracts, new.contracts)


def test_switch_to_active_contract_is_noop():
    cfg, s = cbbp_state()
    new, rec = apply_app_reconfiguration(
        s, "c1", cfg.contracts["C_c1_beh1"], 0, declared=cfg.contracts, hosts=cfg.mapping
    )
    assert new is s and rec is None


def test_unknown_contract():
    cfg, s = cbbp_state()
    ghost = make_contract("C_ghost", "n3")
    with pytest.raises(UnknownContract):
        apply_app_reconfiguration(s, "c1", ghost, 0, declared=cfg.contracts, hosts=cfg.mapping)


def test_contract_on_wrong_host():
    cfg, s = cbbp_state()
    with pytest.raises(SubjectMismatch):
        apply_app_reconfiguration(s, "c1", cfg.contracts["C_c3_beh1"], 0, declared=cfg.contracts, hosts=cfg.mapping)


@settings(max_examples=100)
@given(st.data())
def test_reconfiguration_keeps_state_sound(data):
    cfg, s = cbbp_state()
    for _ in range(data.draw(st.integers(1, 6))):
        comp = data.draw(st.sampled_from(s.components))
        own = sorted(c.id for c in cfg.contracts.values() if c.tags.get("component") == comp and "behavior" in c.tags)
        target = cfg.contracts[data.draw(st.sampled_from(own))]
        s, _ = apply_app_reconfiguration(s, comp, target, 0, declared=cfg.contracts, hosts=cfg.mapping)
        assert len(s.components) == len(set(s.components)) == 4
        for k, cid in s.entries:
            assert cfg.contracts[cid].subject == cfg.mapping[k]


def test_platform_reconfiguration():
    cfg = load_builtin("cbbp_baseline")
    p = PlatformState((("n3->n4", "L_n3_n4"), ("n1->n4", "L_n1_n4")))
    c, _ = negotiate_link_contract("n3", "n4", cfg.platform, contract_id="L_n3_n4#2")
    new, rec = apply_platform_reconfiguration(p, "n3->n4", c, 4600 * MS, cause="hb")
    assert new.contracts == ("L_n3_n4#2", "L_n1_n4")
    assert (rec.level, rec.trigger) == (PLATFORM, "Renegotiation")
    assert apply_platform_reconfiguration(new, "n3->n4", c, 5 * S)[1] is None
    with pytest.raises(UnknownRelation):
        apply_platform_reconfiguration(p, "n9->n4", c, 0)


def test_record_must_change_state():
    with pytest.raises(ValueError):
        ReconfigurationRecord(APPLICATION, 0, ("a",), ("a",), "Violation")


# -- link contracts ------------------------------------------------------------------


def test_negotiated_bounds():
    g = copy.deepcopy(load_builtin("cbbp_baseline").platform)
    c, r = negotiate_link_contract("n3", "n4", g)
    assert (link_bound(c), r.links, c.id) == (20 * MS, ("m1",), "L_n3_n4")
    assert c.tags["relation"] == "n3->n4"
    g.links["m1"].state = LinkState.DOWN
    g.links["m5"].state = LinkState.DOWN
    c, r = negotiate_link_contract("n3", "n4", g)
    assert (link_bound(c), r.links) == (80 * MS, ("m2",))
    g.links["m2"].state = LinkState.DOWN
    with pytest.raises(NoRoute):
        negotiate_link_contract("n3", "n4", g)


# -- policies ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "strategies",
    [(), (Strategy(RESTART, (("duration", S),)),), (Strategy(ESCALATE), Strategy(NOTIFY), Strategy(ESCALATE))],
)
def test_policy_must_end_with_escalate(strategies):
    with pytest.raises(PolicyError):
        ResponsePolicy((("DeadlineMiss", strategies),))


def test_unknown_strategy():
    with pytest.raises(PolicyError):
        Strategy("Pray")


def test_unlisted_kind_escalates():
    p = ResponsePolicy((("DeadlineMiss", (Strategy(NOTIFY), Strategy(ESCALATE))),))
    assert [s.name for s in p.for_kind("PeriodMiss")] == [ESCALATE]


# -- managers in the running system ---------------------------------------------------


def kinds(res, kind):
    return [r for r in res.trace.records if r.kind == kind]


def test_deadline_miss_restarts_and_notifies(builtin_run):
    res = builtin_run("cbbp_hanging")
    acts = [(a.data["strategy"], a.data.get("until")) for a in kinds(res, "Action") if a.data["cause"] == "obs_c1@6000000"]
    assert acts == [(RESTART, 7500 * MS), (NOTIFY, None)]
    (msg,) = [m for m in kinds(res, "FaultMessage") if m.data.get("phase") == "sent" and m.data["fault"] == "DeadlineMiss"]
    assert (msg.data["dst"], msg.data["expected_recovery"]) == ("c3", 1500 * MS)


def test_wireless_switch_is_platform_only(builtin_run):
    res = builtin_run("cbbp_outage_wireless")
    (rec,) = kinds(res, "Reconfiguration")
    assert rec.data["level"] == PLATFORM
    (act,) = kinds(res, "Action")
    assert (act.data["strategy"], act.data["detail"]) == ("SwitchLink", "to m2")


def test_switch_link_fails_then_escalates(builtin_run):
    res = builtin_run("cbbp_outage_reroute")
    acts = [(a.data["strategy"], a.data["ok"]) for a in kinds(res, "Action")]
    assert acts == [("SwitchLink", False), (ESCALATE, True)]
    assert kinds(res, "Action")[-1].data["detail"] == "Rerouted(n3,n1,n4)"


def test_tight_budget_gives_both_levels():
    doc = cbbp_document()
    behs = copy.deepcopy(doc["behaviors"])
    behs["beh1_c1"]["cc"] = "250ms"  # 950 ms + 20 ms fits 1 s, 950 ms + 80 ms does not
    res = run_doc([{"id": "cut", "kind": "NetworkOutage", "link": "m1", "onset": "4.1s", "permanent": True}], behaviors=behs)
    recs = kinds(res, "Reconfiguration")
    assert [r.data["level"] for r in recs] == [PLATFORM, APPLICATION]
    assert recs[1].data["cause"] == recs[0].data["id"]
    assert "C_c1_beh2" in recs[1].data["after"]


def test_no_feasible_behavior_is_reported():
    doc = cbbp_document()
    policies = copy.deepcopy(doc["policies"])
    policies["c1"]["DeadlineMiss"][0]["duration"] = "5s"
    hang = {"id": "h", "kind": "HangingProcess", "target": "c1", "onset": "5s", "extra_delay": "1500ms"}
    res = run_doc([hang], policies=policies)
    (inf, *_) = kinds(res, "Infeasible")
    assert (inf.data["subject"], inf.data["detail"]) == ("c3", "NoFeasibleBehavior")
    assert res.exit_code == 1


@pytest.mark.parametrize("name", ["cbbp_baseline", "cbbp_hanging", "cbbp_outage_wireless", "cbbp_outage_reroute", "cbbp_infeasible"])
def test_causal_closure(builtin_run, name):
    assert causal_gaps(builtin_run(name).trace) == []
