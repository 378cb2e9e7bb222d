from __future__ import annotations

import functools

import pytest
import yaml

from soundhtn.domains import load_bundle
from soundhtn.loader import load_domain
from soundhtn.model import State

# A small grid-free delivery domain for unit tests that should not depend
# on the bundled benchmark files.
MINI_DOMAIN = """
name: mini
types: [truck, package, location]
predicates:
  at: 2
  road: 2
  clean: 1
axioms:
  connected(?a, ?b): "road(?a, ?b) or road(?b, ?a)"
  allClean(): "forall ?l - location: clean(?l)"
actions:
  drive(?t, ?a, ?b):
    pre:
      - truck(?t)
      - at(?t, ?a)
      - connected(?a, ?b)
    add:
      - at(?t, ?b)
    delete:
      - at(?t, ?a)
  load(?t, ?p, ?l):
    pre:
      - truck(?t)
      - package(?p)
      - at(?t, ?l)
      - at(?p, ?l)
    add:
      - at(?p, ?t)
    delete:
      - at(?p, ?l)
  unload(?t, ?p, ?l):
    pre:
      - at(?t, ?l)
      - at(?p, ?t)
    add:
      - at(?p, ?l)
    delete:
      - at(?p, ?t)
  wipe(?l):
    pre:
      - location(?l)
      - not clean(?l)
    add:
      - clean(?l)
compound_tasks:
  deliver(?p, ?d):
    pre:
      - package(?p)
    effects:
      - at(?p, ?d)
  tidy():
    effects:
      - allClean()
methods:
  - name: deliverM1
    task: deliver(?p, ?d)
    pre:
      - at(?p, ?d)
    subtasks: []
  - name: deliverM2
    task: deliver(?p, ?d)
    extra: ?t ?s
    pre:
      - at(?p, ?s)
      - truck(?t)
      - at(?t, ?s)
      - connected(?s, ?d)
    subtasks:
      - load(?t, ?p, ?s)
      - drive(?t, ?s, ?d)
      - unload(?t, ?p, ?d)
"""


@functools.lru_cache(maxsize=None)
def _mini():
    return load_domain(yaml.safe_load(MINI_DOMAIN))


@pytest.fixture
def mini():
    return _mini()


@pytest.fixture
def mini_state():
    return State.of([
        ("truck", "t1"), ("truck", "t2"), ("package", "p1"),
        ("location", "a"), ("location", "b"), ("location", "c"),
        ("road", "a", "b"), ("road", "b", "c"),
        ("at", "t1", "a"), ("at", "t2", "a"), ("at", "p1", "a"),
    ])


@functools.lru_cache(maxsize=None)
def bundle(name):
    return load_bundle(name)


@pytest.fixture(params=["logistics", "household", "rescue"])
def any_bundle(request):
    return bundle(request.param)


@pytest.fixture
def logistics():
    return bundle("logistics")


# -- acceptance summary --------------------------------------------------------

_ACCEPTANCE: dict[str, bool] = {}


def _criterion(nodeid: str):
    if "test_acceptance.py::test_criterion_" not in nodeid:
        return None
    name = nodeid.split("::test_criterion_", 1)[1].split("[", 1)[0]
    number, _, title = name.partition("_")
    return f"{int(number):2d}  {title.replace('_', ' ')}"


def pytest_runtest_logreport(report):
    label = _criterion(report.nodeid)
    if label is None:
        return
    if report.when == "call" or report.failed:
        _ACCEPTANCE[label] = _ACCEPTANCE.get(label, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if _ACCEPTANCE[label] else 'FAIL'}  {label}")
