import ast
from pathlib import Path

import pytest

import soundhtn.validator as validator_module
from soundhtn.loader import load_problem, parse_task
from soundhtn.model import State, apply_action
from soundhtn.validator import (
    EFFECTS_UNSATISFIED,
    EXHAUSTIVE_LIMIT,
    INAPPLICABLE,
    PREFIX_MISMATCH,
    FailureAt,
    Verdict,
    execute,
    satisfies,
    satisfies_any_split,
)

from .conftest import bundle
from .test_planner import LOGISTICS_PLAN


def logistics_setup():
    b = bundle("logistics")
    d, p = b.domain, b.problem
    return d, p, [parse_task(x, d, p.constants) for x in LOGISTICS_PLAN]


def first_failure(domain, state, plan):
    """Reference re-execution: index of the first inapplicable action, if any."""
    for i, action in enumerate(plan):
        state = apply_action(domain, state, action)
        if state is None:
            return i
    return None


def test_execute_empty_plan():
    d, p, _ = logistics_setup()
    assert execute(d, p.initial, []) is p.initial


def test_execute_prefix_reaches_second_airport():
    d, p, plan = logistics_setup()
    out = execute(d, p.initial, plan[:7])
    assert ("at", "pck", "ap2") in out and ("at", "plane1", "ap2") in out


def test_execute_reports_first_inapplicable_action():
    d, p, plan = logistics_setup()
    swapped = list(plan)
    swapped[3], swapped[5] = swapped[5], swapped[3]
    out = execute(d, p.initial, swapped)
    expected = first_failure(d, p.initial, swapped)
    assert expected is not None and out == FailureAt(expected)


def test_empty_task_list_and_plan():
    d, p, _ = logistics_setup()
    assert satisfies(d, p.initial, (), (), ()) == Verdict.ok()


def test_full_plan_accepted_iff_goal_holds():
    d, p, plan = logistics_setup()
    assert ("at", "pck", "dest") in execute(d, p.initial, plan)
    assert satisfies(d, p.initial, p.tasks, plan, [10]).accepted


def test_truncated_plan_rejected():
    d, p, plan = logistics_setup()
    final = execute(d, p.initial, plan[:-1])
    assert ("at", "pck", "dest") not in final
    verdict = satisfies(d, p.initial, p.tasks, plan[:-1], [9])
    assert not verdict.accepted and verdict.failure.cause == EFFECTS_UNSATISFIED


def test_inapplicable_position_is_plan_index():
    d, p, plan = logistics_setup()
    broken = plan[:4] + plan[5:]
    verdict = satisfies(d, p.initial, p.tasks, broken, [9])
    assert verdict.failure.cause == INAPPLICABLE
    assert verdict.failure.position == first_failure(d, p.initial, broken) == 5


@pytest.mark.parametrize("splits", [[], [9], [11], [4, 10]])
def test_bad_splits(splits):
    d, p, plan = logistics_setup()
    verdict = satisfies(d, p.initial, p.tasks, plan, splits)
    assert verdict.failure.cause == PREFIX_MISMATCH


def test_non_monotone_splits(mini):
    problem = load_problem({
        "objects": {"location": ["a", "b"]},
        "task_list": ["wipe(a)", "wipe(b)"],
    }, mini)
    plan = [mini.task("wipe", "a"), mini.task("wipe", "b")]
    assert satisfies(mini, problem.initial, problem.tasks, plan, [1, 2]).accepted
    assert satisfies(mini, problem.initial, problem.tasks, plan, [2, 1]).failure.cause == PREFIX_MISMATCH
    # primitive-only lists reduce to plain execution
    assert not satisfies(mini, problem.initial, problem.tasks, plan[::-1], [1, 2]).accepted
    assert not isinstance(execute(mini, problem.initial, plan), FailureAt)


def test_primitive_task_needs_its_own_segment(mini):
    problem = load_problem({"objects": {"location": ["a", "b"]}, "task_list": ["wipe(a)"]}, mini)
    plan = [mini.task("wipe", "b")]
    assert satisfies(mini, problem.initial, problem.tasks, plan, [1]).failure.cause == PREFIX_MISMATCH


def test_mixed_task_list_any_split(mini):
    problem = load_problem({
        "objects": {"truck": ["t1"], "package": ["p1"], "location": ["a", "b"]},
        "initial_state": ["at(t1, a)", "at(p1, a)", "road(a, b)"],
        "task_list": ["deliver(p1, b)", "wipe(a)"],
    }, mini)
    plan = [mini.task(*t) for t in [("load", "t1", "p1", "a"), ("drive", "t1", "a", "b"),
                                    ("unload", "t1", "p1", "b"), ("wipe", "a")]]
    assert satisfies_any_split(mini, problem.initial, problem.tasks, plan).accepted
    assert not satisfies_any_split(mini, problem.initial, problem.tasks, plan[:3]).accepted
    assert satisfies_any_split(mini, problem.initial, (), ()).accepted
    with pytest.raises(ValueError):
        satisfies_any_split(mini, problem.initial, problem.tasks, plan * 4)
    assert EXHAUSTIVE_LIMIT == 12


def test_verdict_invariant():
    assert Verdict.ok().failure is None
    rejected = Verdict.reject(2, INAPPLICABLE)
    assert not rejected.accepted and rejected.failure is not None


def test_validator_imports_only_the_domain_model():
    tree = ast.parse(Path(validator_module.__file__).read_text())
    local = {node.module for node in ast.walk(tree) if isinstance(node, ast.ImportFrom) and node.level}
    assert local == {"model"}


def test_validator_state_untouched():
    d, p, plan = logistics_setup()
    before = p.initial.canonical
    satisfies(d, p.initial, p.tasks, plan, [10])
    assert p.initial.canonical == before and isinstance(p.initial, State)
