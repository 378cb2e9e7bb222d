from pathlib import Path

import pytest

from soundhtn.loader import parse_task
from soundhtn.model import PRIMITIVE, State
from soundhtn.oracle import (
    BUDGET,
    SALVAGE,
    UNPARSEABLE,
    AdversarialOracle,
    FailingOracle,
    OracleFailure,
    OracleRequest,
    ScriptedOracle,
    build_prompt_stage1,
    build_prompt_stage2,
    parse_predicates,
)
from soundhtn.oracle.prompts import SYSTEM_MESSAGE, conversation, render_axioms
from soundhtn.validator import execute

from .conftest import bundle

GOLDEN = Path(__file__).parent / "golden"
TRUCK_LEG = ["drive(truck1, ap1, src)", "loadTruck(truck1, pck, src)",
             "drive(truck1, src, ap1)", "unloadTruck(truck1, pck, ap1)"]


def plane_request():
    b = bundle("logistics")
    d, p = b.domain, b.problem
    state = execute(d, p.initial, [parse_task(x, d, p.constants) for x in TRUCK_LEG])
    return OracleRequest.build(d, state, d.task("planeTransport", "pck", "ap1", "ap2"), p.constants)


def initial_request(name, task, *args):
    b = bundle(name)
    return OracleRequest.build(b.domain, b.problem.initial, b.domain.task(task, *args), b.problem.constants)


# -- prompts -------------------------------------------------------------------

def test_request_carries_task_semantics():
    r = plane_request()
    assert r.preconditions == ("package(pck)", "at(pck, ap1)", "airport(ap1)", "airport(ap2)")
    assert r.effects == ("at(pck, ap2)",)
    assert "plane1" in r.constants


def test_stage1_golden():
    assert build_prompt_stage1(plane_request()) == (GOLDEN / "logistics_planeTransport_stage1.txt").read_text()
    household = initial_request("household", "cleanHouse", "home")
    assert build_prompt_stage1(household) == (GOLDEN / "household_cleanHouse_stage1.txt").read_text()


def test_stage2_golden():
    response = (GOLDEN / "stage1_response.txt").read_text()
    expected = (GOLDEN / "logistics_planeTransport_stage2.txt").read_text()
    assert build_prompt_stage2(plane_request(), response) == expected


def test_prompt_directives():
    r = plane_request()
    one, two = build_prompt_stage1(r), build_prompt_stage2(r, "X")
    assert "Do not invent new operators." in one
    assert "Separate predicates by newlines." in two
    assert "predicate(arg1, arg2, ...)" in two
    assert ". You generated the following response:Xto my request" in two
    assert "each defined as a  Python function" in one


def test_prompts_are_pure():
    assert build_prompt_stage1(plane_request()) == build_prompt_stage1(plane_request())
    assert build_prompt_stage2(plane_request(), "r") == build_prompt_stage2(plane_request(), "r")


def test_empty_axiom_block(mini, mini_state):
    from soundhtn.model import Domain

    bare = Domain(mini.name, mini.predicates, mini.types, {}, mini.actions, mini.tasks, mini.methods)
    assert render_axioms(bare) == ""
    r = OracleRequest.build(bare, mini_state, bare.task("deliver", "p1", "b"), mini_state.objects)
    assert "python functions: . Provide the Sub-Tasks" in build_prompt_stage1(r)


def test_conversation_roles():
    msgs = conversation("hello")
    assert msgs == [{"role": "system", "content": SYSTEM_MESSAGE}, {"role": "user", "content": "hello"}]


def test_fingerprint_is_stable_and_sensitive():
    start = initial_request("logistics", "planeTransport", "pck", "ap1", "ap2")
    assert start.fingerprint() == "8cca09f6dc25e2cc945c5b288eabbfe645217043971f72b45c1a7876e23dfd89"
    r = plane_request()
    assert r.fingerprint() == plane_request().fingerprint()
    assert r.fingerprint("attempt=1") != r.fingerprint("attempt=0")
    other = OracleRequest.build(r.domain, State(r.state.atoms | {("at", "truck1", "src")}), r.task, r.constants)
    assert other.fingerprint() != r.fingerprint()


# -- parser --------------------------------------------------------------------

def test_parse_happy_path():
    r = plane_request()
    out = parse_predicates("loadPlane(plane1,pck,ap1)\nfly(plane1,ap1,ap2)", r.domain, r.constants)
    assert [str(t) for t in out.tasks] == ["loadPlane(plane1, pck, ap1)", "fly(plane1, ap1, ap2)"]
    assert all(t.kind == PRIMITIVE for t in out.tasks) and out.rejected == ()


def test_parse_unknown_operator_strict():
    r = plane_request()
    with pytest.raises(OracleFailure) as info:
        parse_predicates("fly(plane1, ap1, ap2)\nteleport(pck,ap2)", r.domain, r.constants)
    assert info.value.kind == UNPARSEABLE
    assert "teleport" in info.value.detail and "line 2" in info.value.detail


NOISY = """Sure! Here is the mapping:

1. loadPlane(plane1, pck, ap1)
fly(plane1, ap1, ap2)
unloadPlane(plane1, pck, ap2)
planeTransport(pck, ap1, ap2)
fly(plane1, ap1)
drive(truck1, ap1, moon)
This completes the transport."""


def test_parse_noisy_transcript():
    r = plane_request()
    with pytest.raises(OracleFailure):
        parse_predicates(NOISY, r.domain, r.constants)
    salvaged = parse_predicates(NOISY, r.domain, r.constants, SALVAGE)
    # hand-filtered: only the clean predicate lines survive
    assert [str(t) for t in salvaged.tasks] == ["fly(plane1, ap1, ap2)", "unloadPlane(plane1, pck, ap2)"]
    reasons = {rej.text: rej.reason for rej in salvaged.rejected}
    assert reasons["planeTransport(pck, ap1, ap2)"].endswith("not an operator")
    assert "arguments" in reasons["fly(plane1, ap1)"]
    assert "moon" in reasons["drive(truck1, ap1, moon)"]
    assert [rej.line for rej in salvaged.rejected] == [1, 3, 6, 7, 8, 9]


def test_parse_policy_validation():
    r = plane_request()
    with pytest.raises(ValueError):
        parse_predicates("", r.domain, r.constants, "lenient")
    assert parse_predicates("\n\n", r.domain, r.constants).tasks == ()


# -- mocks ---------------------------------------------------------------------

def test_failing_oracle():
    with pytest.raises(OracleFailure) as info:
        FailingOracle().decompose(plane_request())
    assert info.value.kind == BUDGET


def test_scripted_oracle_plane_transport():
    oracle = ScriptedOracle(bundle("logistics").fixture())
    out = oracle.decompose(plane_request())
    assert [str(t) for t in out.tasks] == [
        "loadPlane(plane1, pck, ap1)", "fly(plane1, ap1, ap2)", "unloadPlane(plane1, pck, ap2)"
    ]
    assert out.source == "mock"


def test_scripted_oracle_picks_executable_alternative(mini, mini_state):
    fixture = {"deliver(p1,b)": [["unload(t1, p1, b)"], ["load(t1, p1, a)", "drive(t1, a, b)", "unload(t1, p1, b)"]]}
    oracle = ScriptedOracle(fixture)
    r = OracleRequest.build(mini, mini_state, mini.task("deliver", "p1", "b"), mini_state.objects)
    assert len(oracle.decompose(r).tasks) == 3
    only_bad = ScriptedOracle({"deliver(p1, b)": ["unload(t1, p1, b)"]})
    assert [str(t) for t in only_bad.decompose(r).tasks] == ["unload(t1, p1, b)"]


def test_scripted_oracle_failures(mini, mini_state, tmp_path):
    r = OracleRequest.build(mini, mini_state, mini.task("deliver", "p1", "b"), mini_state.objects)
    with pytest.raises(OracleFailure, match="no scripted"):
        ScriptedOracle({}).decompose(r)
    with pytest.raises(OracleFailure, match="fixture line"):
        ScriptedOracle({"deliver(p1, b)": ["warp(t1)"]}).decompose(r)
    path = tmp_path / "f.yaml"
    path.write_text("deliver(p1, b): []\n")
    assert ScriptedOracle.from_file(path).decompose(r).tasks == ()


def test_adversarial_seed_42_golden():
    r = initial_request("logistics", "planeTransport", "pck", "ap1", "ap2")
    first = [str(t) for t in AdversarialOracle(42).decompose(r).tasks]
    assert first == ["fly(city2, ap1, ap1)", "fly(dest, dest, src)"]
    retry = [str(t) for t in AdversarialOracle(42, attempt=1).decompose(r).tasks]
    assert retry[:2] == ["loadTruck(city1, ap2, dest)", "unloadPlane(plane1, ap1, plane1)"]
    assert AdversarialOracle(42).decompose(plane_request()) == AdversarialOracle(42).decompose(plane_request())


def test_adversarial_outputs_are_schema_valid():
    for name in ("logistics", "household", "rescue"):
        b = bundle(name)
        task = b.problem.tasks[0]
        r = OracleRequest.build(b.domain, b.problem.initial, task, b.problem.constants)
        for seed in range(30):
            for t in AdversarialOracle(seed).decompose(r).tasks:
                assert t.name in b.domain.actions
                assert len(t.args) == len(b.domain.actions[t.name].params)
                assert set(t.args) <= set(r.constants)
