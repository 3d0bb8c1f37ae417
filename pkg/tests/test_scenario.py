from __future__ import annotations

import copy
import json

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from resilisim.engine import MS, S
from resilisim.scenario import (
    BUILTIN,
    ParseError,
    ValidationError,
    build_scenario,
    builtin_names,
    builtin_path,
    cbbp_document,
    dump_document,
    parse_scenario,
    parse_scenario_text,
    resolve_scenario,
)
from resilisim.simulation import Simulation
from resilisim.telemetry import recorded_violations, replay_violations

from tests.oracles import causal_gaps


@pytest.mark.parametrize("name", builtin_names())
def test_shipped_files_parse_and_match_source(name):
    cfg = parse_scenario(builtin_path(name))
    assert cfg.name == name
    assert builtin_path(name).read_text() == dump_document(BUILTIN[name])


def test_defaults():
    cfg = resolve_scenario("cbbp_baseline")
    assert cfg.mapping == {"c1": "n3", "c2": "n1", "c3": "n4", "c4": "n5"}
    assert len(cfg.behaviors_of("c1")) == 4
    assert (cfg.budgets.delta_s1_a1, cfg.budgets.T_samp) == (10 * S, 500 * MS)
    assert cfg.relations == [("n3", "n4"), ("n1", "n4"), ("n4", "n5")]


def invalid(**overrides):
    with pytest.raises(ValidationError) as err:
        build_scenario(cbbp_document("bad", **overrides))
    return err.value


def test_budgets_over_delta():
    budgets = dict(cbbp_document()["budgets"], T_s1_c1="3s")
    err = invalid(budgets=budgets)
    assert err.paths == ["budgets"]
    assert "11s" in str(err) and "1s" in str(err)


def test_bad_unit_reports_line():
    text = dump_document(cbbp_document()).replace('"T_s1_c1": "1s"', '"T_s1_c1": "800xs"')
    with pytest.raises(ParseError) as err:
        parse_scenario_text(text)
    line = next(i for i, l in enumerate(text.splitlines(), 1) if "800xs" in l)
    assert err.value.line == line


def test_malformed_json():
    with pytest.raises(ParseError) as err:
        parse_scenario_text('{"name": "x",\n  oops}')
    assert err.value.line == 2


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        parse_scenario(tmp_path / "nope.json")


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["mapping"].pop("c4"), "topology"),
        (lambda d: d["observers"][0].update(type="periodic"), "observers[0].type"),
        (lambda d: d["initial"].update(c1="C_c3_beh1"), "initial.c1"),
        (lambda d: d["faults"].append({"id": "f", "kind": "NetworkOutage", "link": "m9", "onset": "1s", "permanent": True}), "faults[0].link"),
        (lambda d: d["faults"].append({"id": "f", "kind": "Meteor", "onset": "1s"}), "faults[0].kind"),
        (lambda d: d["policies"]["c1"]["DeadlineMiss"].pop(), "policies"),
        (lambda d: d["options"].update(link_safety_factor=0), "options.link_safety_factor"),
    ],
)
def test_validation_paths(mutate, path):
    doc = copy.deepcopy(cbbp_document("bad"))
    mutate(doc)
    with pytest.raises(ValidationError) as err:
        build_scenario(doc)
    assert any(p.startswith(path) for p in err.value.paths), err.value.paths


def test_problems_are_collected_together():
    doc = copy.deepcopy(cbbp_document("bad"))
    doc["options"]["link_safety_factor"] = 0
    doc["options"]["revert_on_recovery"] = "yes"
    with pytest.raises(ValidationError) as err:
        build_scenario(doc)
    assert len(err.value.problems) >= 2


def test_overrides():
    cfg = resolve_scenario("cbbp_baseline").with_overrides(seed=5, horizon=3 * S)
    assert (cfg.seed, cfg.horizon) == (5, 3 * S)


def test_unknown_builtin():
    with pytest.raises((KeyError, ParseError)):
        resolve_scenario("no_such_scenario")


# -- fuzz: any accepted config runs cleanly --------------------------------------

_links = ["m1", "m2", "m3", "m4", "m5"]


@st.composite
def fault_lists(draw):
    faults = []
    for i in range(draw(st.integers(0, 3))):
        onset = f"{draw(st.integers(0, 14))}s"
        kind = draw(st.sampled_from(["HangingProcess", "NetworkOutage", "IntermittentLink"]))
        f = {"id": f"f{i}", "kind": kind, "onset": onset}
        if kind == "HangingProcess":
            f.update(target=draw(st.sampled_from(["c1", "c2", "c3", "c4"])), extra_delay=f"{draw(st.integers(1, 3000))}ms")
        else:
            f["link"] = draw(st.sampled_from(_links))
            if draw(st.booleans()):
                f["permanent"] = True
            else:
                f["duration"] = f"{draw(st.integers(1, 6000))}ms"
            if kind == "IntermittentLink":
                f["probability"] = draw(st.sampled_from([0.0, 0.1, 0.5, 1.0]))
        faults.append(f)
    return faults


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(faults=fault_lists(), seed=st.integers(0, 2**64 - 1), revert=st.booleans())
def test_valid_configs_run_to_completion(faults, seed, revert):
    doc = cbbp_document("fuzz", faults, horizon="15s", seed=seed)
    doc["options"] = {"link_safety_factor": 2, "revert_on_recovery": revert}
    cfg = parse_scenario_text(json.dumps(doc))
    res = Simulation(cfg).run()
    assert res.trace.complete
    assert replay_violations(res.trace) == recorded_violations(res.trace)
    assert causal_gaps(res.trace) == []
    m = res.metrics
    assert 0 <= m.downtime <= m.horizon and 0 <= m.mean_qos <= 1
    assert res.exit_code in (0, 1)
    assert (res.exit_code == 0) == (not res.infeasible and not res.unresolved)
