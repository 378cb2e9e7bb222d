import copy
from pathlib import Path

import pytest
import yaml

from soundhtn.loader import load_domain, load_problem, parse_task
from soundhtn.model import COMPOUND, PRIMITIVE, DomainError
from soundhtn.planner import plan

from .conftest import MINI_DOMAIN


def base():
    return yaml.safe_load(MINI_DOMAIN)


def edited(**changes):
    data = base()
    for path, value in changes.items():
        node = data
        keys = path.split("__")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    return data


def test_mini_domain_loads(mini):
    assert set(mini.actions) == {"drive", "load", "unload", "wipe"}
    assert [m.name for m in mini.methods_for("deliver")] == ["deliverM1", "deliverM2"]
    assert mini.predicates["truck"] == 1  # types become unary predicates
    assert mini.kind_of("deliver") == COMPOUND and mini.kind_of("drive") == PRIMITIVE


@pytest.mark.parametrize("change, message", [
    ({"predicates": {"at": 2, "road": 2, "clean": 1, "bad name": 1}}, "bad predicate"),
    ({"predicates": {"at": 2, "road": 2, "clean": 1, "truck": 2}}, "type 'truck'"),
    ({"colours": ["red"]}, "unknown sections"),
    ({"axioms": {"loop(?x)": "loop2(?x)", "loop2(?x)": "loop(?x)"}}, "cyclic axioms"),
    ({"axioms": {"at(?x, ?y)": "clean(?x)"}}, "clashes"),
    ({"axioms": {"odd(?x)": "clean(?y)"}}, "not parameters"),
    ({"axioms": {"odd(?x)": "forall ?y - ghost: clean(?y)"}}, "undeclared type"),
])
def test_domain_errors(change, message):
    data = base()
    data.update(change)
    with pytest.raises(DomainError, match=message):
        load_domain(data)


def test_arity_violation_in_action():
    data = base()
    data["actions"]["wipe(?l)"]["pre"] = ["clean(?l, ?l)"]
    with pytest.raises(DomainError, match="expects 1 arguments"):
        load_domain(data)


def test_undeclared_predicate_and_constant():
    data = base()
    data["actions"]["wipe(?l)"]["pre"] = ["dirty(?l)"]
    with pytest.raises(DomainError, match="undeclared predicate"):
        load_domain(data)
    data = base()
    data["actions"]["wipe(?l)"]["pre"] = ["clean(kitchen)"]
    with pytest.raises(DomainError, match="undeclared constant"):
        load_domain(data)
    data["objects"] = {"location": ["kitchen"]}
    assert load_domain(data).constants == {"kitchen": ("location",)}


def test_action_variables_must_be_parameters():
    data = base()
    data["actions"]["wipe(?l)"]["add"] = ["clean(?m)"]
    with pytest.raises(DomainError, match="not parameters"):
        load_domain(data)


def test_effects_cannot_touch_derived_predicates():
    data = base()
    data["actions"]["wipe(?l)"]["add"] = ["connected(?l, ?l)"]
    with pytest.raises(DomainError, match="derived"):
        load_domain(data)


def test_method_subtask_variables_must_be_bound():
    data = base()
    data["methods"][1]["extra"] = "?t"
    # ?s is no longer an extra parameter and only a negative literal mentions it
    data["methods"][1]["pre"] = ["truck(?t)", "at(?t, ?p)", "not connected(?s, ?d)"]
    with pytest.raises(DomainError, match="unbound variables"):
        load_domain(data)


def test_method_variable_bound_by_positive_precondition():
    data = base()
    data["methods"][1]["extra"] = "?t"
    mini = load_domain(data)  # ?s bound through at(?p, ?s)
    assert mini.methods[1].extra_params[0].name == "?t"


def test_method_errors():
    data = base()
    data["methods"].append(copy.deepcopy(data["methods"][0]))
    with pytest.raises(DomainError, match="duplicate method"):
        load_domain(data)
    data = base()
    data["methods"][0]["task"] = "drive(?a, ?b, ?c)"
    with pytest.raises(DomainError, match="not a compound task"):
        load_domain(data)
    data = base()
    data["methods"][1]["subtasks"] = ["fly(?t)"]
    with pytest.raises(DomainError, match="unknown task"):
        load_domain(data)
    data = base()
    data["methods"][1]["extra"] = "?p ?t ?s"
    with pytest.raises(DomainError, match="already bound"):
        load_domain(data)


def test_action_task_name_clash():
    data = base()
    data["compound_tasks"]["wipe(?l)"] = {"effects": ["clean(?l)"]}
    with pytest.raises(DomainError, match="both an action"):
        load_domain(data)


PROBLEM = {
    "name": "p",
    "domain": "mini",
    "objects": {"truck": ["t1"], "package": ["p1"], "location": ["a", "b"]},
    "initial_state": ["at(t1, a)", "at(p1, a)", "road(a, b)"],
    "task_list": ["deliver(p1, b)", "wipe(a)"],
}


def test_problem_loads_with_type_atoms(mini):
    problem = load_problem(PROBLEM, mini)
    assert ("truck", "t1") in problem.initial
    assert ("location", "b") in problem.initial
    assert [str(t) for t in problem.tasks] == ["deliver(p1, b)", "wipe(a)"]
    assert problem.tasks[0].kind == COMPOUND and problem.tasks[1].kind == PRIMITIVE
    assert problem.constants == {"t1", "p1", "a", "b"}


@pytest.mark.parametrize("field, value, message", [
    ("initial_state", ["at(t1)"], "expects 2"),
    ("initial_state", ["flying(t1)"], "undeclared predicate"),
    ("initial_state", ["at(t1, zz)"], "undeclared constant"),
    ("initial_state", ["at(?x, a)"], "ground"),
    ("task_list", ["deliver(p1)"], "expects 2"),
    ("task_list", ["teleport(p1)"], "unknown task"),
    ("domain", "other", "not 'mini'"),
    ("objects", {"ghost": ["g"]}, "undeclared type"),
    ("extra", 1, "unknown sections"),
])
def test_problem_errors(mini, field, value, message):
    data = {**PROBLEM, field: value}
    with pytest.raises(DomainError, match=message):
        load_problem(data, mini)


def test_parse_task(mini):
    assert str(parse_task("drive(t1, a, b)", mini, {"t1", "a", "b"})) == "drive(t1, a, b)"
    with pytest.raises(DomainError):
        parse_task("drive(t1, a, zz)", mini, {"t1", "a", "b"})


def test_unreadable_file(tmp_path):
    with pytest.raises(DomainError, match="cannot read"):
        load_domain(tmp_path / "missing.yaml")
    (tmp_path / "list.yaml").write_text("- 1\n- 2\n")
    with pytest.raises(DomainError, match="mapping"):
        load_domain(tmp_path / "list.yaml")


def test_readme_example_domain_loads():
    readme = Path(__file__).resolve().parents[1] / "README.md"
    block = readme.read_text().split("```yaml\n", 1)[1].split("```", 1)[0]
    domain = load_domain(yaml.safe_load(block))
    problem = load_problem({
        "objects": {"truck": ["t1"], "location": ["a", "b"]},
        "initial_state": ["at(t1, a)", "road(b, a)"],
        "task_list": ["goTo(t1, b)"],
    }, domain)
    assert [str(a) for a in plan(problem).actions] == ["drive(t1, a, b)"]
