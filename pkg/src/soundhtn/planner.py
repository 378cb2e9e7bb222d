"""Ordered task decomposition with verifier tasks and oracle fallback.

For the head of the task list:

* primitive (or verifier) task: apply it, or fail the branch;
* compound task: try every applicable method decomposition in order,
  each followed by the task's verifier; if none leads to a plan, ask the
  oracle once for a primitive sequence, again followed by the verifier.

A verifier task is a no-op action whose preconditions are the compound
task's effects, so every decomposition, whoever proposed it, is checked
before planning continues.  (state, compound task) pairs are remembered for
the whole search; meeting one again cuts the branch.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

from .model import (
    COMPOUND,
    PRIMITIVE,
    VERIFIER,
    Domain,
    GroundTask,
    Method,
    Problem,
    State,
    apply_action,
    decompositions,
    make_verifier,
)
from .oracle.base import BUDGET, TRANSPORT, Oracle, OracleFailure, OracleRequest

EXHAUSTED = "exhausted"
LOOP_CUT = "loop-cut"
ORACLE_BUDGET = "oracle-budget"
DEPTH_LIMIT = "depth-limit"

_REASON_ORDER = (LOOP_CUT, DEPTH_LIMIT, ORACLE_BUDGET)


@dataclass(frozen=True)
class Limits:
    depth_limit: int = 200  # maximum nesting of compound expansions
    oracle_budget: int = 25  # oracle queries per plan() call


@dataclass
class Stats:
    oracle_calls: int = 0
    nodes_expanded: int = 0
    backtracks: int = 0
    loop_cuts: int = 0
    depth_cuts: int = 0
    oracle_failures: int = 0
    transport_failures: int = 0
    budget_hits: int = 0


@dataclass(frozen=True)
class Step:
    """One entry of the successful derivation.

    ``kind`` is ``action``, ``verify`` or ``expand``.  ``ancestry`` lists the
    expansion ids enclosing the step; ``expansion`` is the id opened by an
    ``expand`` step or closed by a ``verify`` step.
    """

    kind: str
    task: GroundTask
    top: int
    ancestry: tuple[int, ...]
    expansion: Optional[int] = None
    source: str = ""


@dataclass(frozen=True)
class PlanResult:
    actions: Optional[tuple[GroundTask, ...]]
    reason: Optional[str]
    stats: Stats
    splits: tuple[int, ...] = ()
    derivation: tuple[Step, ...] = ()
    trace: tuple[dict, ...] = ()

    @property
    def found(self) -> bool:
        return self.actions is not None

    def methods_used(self) -> list[str]:
        return [s.source.split(":", 1)[1] for s in self.derivation if s.source.startswith("method:")]

    def expanded_tasks(self) -> list[GroundTask]:
        return [s.task for s in self.derivation if s.kind == "expand"]


class _Pending(NamedTuple):
    task: GroundTask
    top: int
    ancestry: tuple[int, ...]


class _Search:
    def __init__(self, domain, methods, oracle, limits, constants, record_trace):
        self.domain = domain
        self.methods = methods
        self.oracle = oracle
        self.limits = limits
        self.constants = constants
        self.record_trace = record_trace
        self.stats = Stats()
        self.visited: set[tuple[State, GroundTask]] = set()
        self.trace: list[dict] = []
        self.ids = itertools.count(1)

    def log(self, event: str, state: State, task: GroundTask, depth: int, **extra) -> None:
        if self.record_trace:
            self.trace.append({"event": event, "depth": depth, "state": state.digest, "task": str(task), **extra})

    def seek(self, state: State, agenda: tuple[_Pending, ...], path):
        """Return the derivation path (a cons list) on success, else ``None``."""
        while agenda:
            head = agenda[0]
            task = head.task
            depth = len(head.ancestry)
            if task.kind == COMPOUND:
                return self.expand(state, head, agenda[1:], path)
            new = apply_action(self.domain, state, task)
            if task.kind == VERIFIER:
                self.log("verifier-pass" if new is not None else "verifier-fail", state, task, depth,
                         expansion=head.ancestry[-1])
                step = Step("verify", task, head.top, head.ancestry, head.ancestry[-1])
            else:
                self.log("action" if new is not None else "action-fail", state, task, depth)
                step = Step("action", task, head.top, head.ancestry)
            if new is None:
                return None
            state, agenda, path = new, agenda[1:], (step, path)
        return path

    def expand(self, state: State, head: _Pending, rest, path):
        task = head.task
        depth = len(head.ancestry)
        if depth >= self.limits.depth_limit:
            self.stats.depth_cuts += 1
            self.log("depth-limit", state, task, depth)
            return None
        key = (state, task)
        if key in self.visited:
            self.stats.loop_cuts += 1
            self.log("loop-cut", state, task, depth)
            return None
        self.visited.add(key)
        self.stats.nodes_expanded += 1
        self.log("expand", state, task, depth)
        verifier = make_verifier(self.domain, task)

        for d in decompositions(self.domain, state, task, self.methods):
            eid = next(self.ids)
            self.log("method-applied", state, task, depth, method=d.method.name,
                     binding=dict(sorted(d.binding.items())), expansion=eid,
                     subtasks=[str(t) for t in d.subtasks])
            found = self.descend(state, head, rest, path, d.subtasks, verifier, eid, f"method:{d.method.name}")
            if found is not None:
                return found
            self.stats.backtracks += 1
            self.log("backtrack", state, task, depth, method=d.method.name, expansion=eid)

        if self.oracle is None:
            return None
        if self.stats.oracle_calls >= self.limits.oracle_budget:
            self.stats.budget_hits += 1
            self.log("oracle-budget", state, task, depth)
            return None
        self.stats.oracle_calls += 1
        request = OracleRequest.build(self.domain, state, task, self.constants)
        try:
            response = self.oracle.decompose(request)
            self._check_primitive(response.tasks)
        except OracleFailure as exc:
            self.stats.oracle_failures += 1
            if exc.kind in (TRANSPORT, BUDGET):
                self.stats.transport_failures += exc.kind == TRANSPORT
                self.stats.budget_hits += exc.kind == BUDGET
            self.log("oracle-failure", state, task, depth, kind=exc.kind, detail=exc.detail)
            return None
        eid = next(self.ids)
        self.log("oracle-query", state, task, depth, source=response.source, expansion=eid,
                 subtasks=[str(t) for t in response.tasks])
        found = self.descend(state, head, rest, path, response.tasks, verifier, eid, "oracle")
        if found is None:
            self.stats.backtracks += 1
            self.log("backtrack", state, task, depth, source="oracle", expansion=eid)
        return found

    def descend(self, state, head, rest, path, subtasks, verifier, eid, source):
        ancestry = head.ancestry + (eid,)
        children = tuple(_Pending(t, head.top, ancestry) for t in subtasks)
        agenda = children + (_Pending(verifier, head.top, ancestry),) + rest
        step = Step("expand", head.task, head.top, head.ancestry, eid, source)
        return self.seek(state, agenda, (step, path))

    def _check_primitive(self, tasks: Sequence[GroundTask]) -> None:
        for t in tasks:
            schema = self.domain.actions.get(t.name)
            if t.kind != PRIMITIVE or schema is None or len(schema.params) != len(t.args):
                raise OracleFailure("unparseable", f"oracle proposed {t}, which is not a known operator call")

    def reason(self) -> str:
        counts = {
            LOOP_CUT: self.stats.loop_cuts,
            DEPTH_LIMIT: self.stats.depth_cuts,
            ORACLE_BUDGET: self.stats.budget_hits + self.stats.transport_failures,
        }
        for r in _REASON_ORDER:
            if counts[r]:
                return r
        return EXHAUSTED


def _unwind(path) -> list[Step]:
    steps = []
    while path:
        step, path = path
        steps.append(step)
    steps.reverse()
    return steps


def plan(
    problem: Problem,
    oracle: Optional[Oracle] = None,
    limits: Optional[Limits] = None,
    methods: Optional[Sequence[Method]] = None,
    record_trace: bool = True,
) -> PlanResult:
    """Plan for ``problem.tasks`` from ``problem.initial``.

    ``methods`` overrides the domain's method list (used for ablations).
    Without an oracle the search is a plain ordered HTN search.
    """
    return plan_tasks(
        problem.domain, problem.initial, problem.tasks, oracle, limits, methods,
        constants=problem.constants, record_trace=record_trace,
    )


def plan_tasks(
    domain: Domain,
    state: State,
    tasks: Iterable[GroundTask],
    oracle: Optional[Oracle] = None,
    limits: Optional[Limits] = None,
    methods: Optional[Sequence[Method]] = None,
    constants: Optional[Iterable[str]] = None,
    record_trace: bool = True,
) -> PlanResult:
    tasks = tuple(tasks)
    if constants is None:
        constants = state.objects | frozenset(domain.constants)
    search = _Search(
        domain,
        domain.methods if methods is None else tuple(methods),
        oracle,
        limits or Limits(),
        tuple(sorted(constants)),
        record_trace,
    )
    agenda = tuple(_Pending(t, i, ()) for i, t in enumerate(tasks))
    path = search.seek(state, agenda, ())

    if path is None:
        reason = search.reason()
        search.trace.append({"event": "result", "found": False, "reason": reason, "stats": asdict(search.stats)})
        return PlanResult(None, reason, search.stats, trace=tuple(search.trace))

    steps = _unwind(path)
    actions = tuple(s.task for s in steps if s.kind == "action")
    counts = [0] * len(tasks)
    for s in steps:
        if s.kind == "action":
            counts[s.top] += 1
    splits = tuple(itertools.accumulate(counts))
    search.trace.append({
        "event": "result",
        "found": True,
        "actions": [str(a) for a in actions],
        "splits": list(splits),
        "stats": asdict(search.stats),
    })
    return PlanResult(actions, None, search.stats, splits, tuple(steps), tuple(search.trace))


__all__ = [
    "DEPTH_LIMIT",
    "EXHAUSTED",
    "LOOP_CUT",
    "ORACLE_BUDGET",
    "Limits",
    "PlanResult",
    "Stats",
    "Step",
    "plan",
    "plan_tasks",
]
