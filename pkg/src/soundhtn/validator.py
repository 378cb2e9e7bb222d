"""Independent plan checker.

Checks a plan against a task list by re-executing it segment by segment and
testing each compound task's effects at the end of its segment.  It uses
only the domain model (no search, no oracle), so it can judge the planner.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .model import (
    COMPOUND,
    Domain,
    GroundTask,
    State,
    apply_action,
    evaluate,
)

INAPPLICABLE = "inapplicable-action"
EFFECTS_UNSATISFIED = "effects-unsatisfied"
PREFIX_MISMATCH = "prefix-mismatch"

EXHAUSTIVE_LIMIT = 12


@dataclass(frozen=True)
class FailureAt:
    index: int  # 0-based position of the first inapplicable action


@dataclass(frozen=True)
class Failure:
    position: int  # action index for inapplicable-action, task index otherwise
    cause: str
    detail: str = ""


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    failure: Optional[Failure] = None

    @classmethod
    def ok(cls) -> Verdict:
        return cls(True)

    @classmethod
    def reject(cls, position: int, cause: str, detail: str = "") -> Verdict:
        return cls(False, Failure(position, cause, detail))


def execute(domain: Domain, state: State, plan: Sequence[GroundTask]) -> State | FailureAt:
    for i, action in enumerate(plan):
        nxt = apply_action(domain, state, action)
        if nxt is None:
            return FailureAt(i)
        state = nxt
    return state


def effects_hold(domain: Domain, state: State, task: GroundTask) -> bool:
    schema = domain.tasks[task.name]
    binding = {p.name: a for p, a in zip(schema.params, task.args)}
    return all(evaluate(domain, state, e, binding) for e in schema.effects)


def satisfies(
    domain: Domain,
    state: State,
    tasks: Sequence[GroundTask],
    plan: Sequence[GroundTask],
    splits: Sequence[int],
) -> Verdict:
    """Check that ``plan`` satisfies ``tasks`` from ``state``.

    ``splits`` holds the cumulative end offset of each task's segment, so
    task ``i`` owns ``plan[splits[i-1]:splits[i]]``.  A compound task is
    satisfied when its segment executes and its effects then hold; a
    primitive task's segment must be exactly that one action.
    """
    if len(splits) != len(tasks):
        return Verdict.reject(-1, PREFIX_MISMATCH, f"{len(splits)} splits for {len(tasks)} tasks")
    bounds = [0, *splits]
    if any(b > a for a, b in zip(bounds[1:], bounds)) or bounds[-1] != len(plan):
        return Verdict.reject(-1, PREFIX_MISMATCH, f"splits {list(splits)} do not partition {len(plan)} actions")

    for i, task in enumerate(tasks):
        start, end = bounds[i], bounds[i + 1]
        segment = plan[start:end]
        if task.kind != COMPOUND and list(segment) != [task]:
            return Verdict.reject(i, PREFIX_MISMATCH, f"primitive task {task} is not its own segment")
        out = execute(domain, state, segment)
        if isinstance(out, FailureAt):
            return Verdict.reject(start + out.index, INAPPLICABLE, str(plan[start + out.index]))
        state = out
        if task.kind == COMPOUND and not effects_hold(domain, state, task):
            return Verdict.reject(i, EFFECTS_UNSATISFIED, f"effects of {task} do not hold")
    return Verdict.ok()


def satisfies_any_split(
    domain: Domain, state: State, tasks: Sequence[GroundTask], plan: Sequence[GroundTask]
) -> Verdict:
    """Accept if some partition of ``plan`` into per-task segments satisfies ``tasks``.

    Exhaustive over all monotone splits, so only for short plans.
    """
    if len(plan) > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive split search is limited to {EXHAUSTIVE_LIMIT} actions")
    if not tasks:
        return Verdict.ok() if not plan else Verdict.reject(-1, PREFIX_MISMATCH, "actions without tasks")
    last: Verdict = Verdict.reject(-1, PREFIX_MISMATCH, "no split")
    for cuts in itertools.combinations_with_replacement(range(len(plan) + 1), len(tasks) - 1):
        verdict = satisfies(domain, state, tasks, plan, (*cuts, len(plan)))
        if verdict.accepted:
            return verdict
        last = verdict
    return last
