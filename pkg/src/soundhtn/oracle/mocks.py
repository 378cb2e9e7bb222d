"""Deterministic oracles for tests and experiments."""

from __future__ import annotations

import random
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from ..model import PRIMITIVE, GroundTask, apply_action, satisfiers
from .base import BUDGET, UNPARSEABLE, OracleFailure, OracleRequest, OracleResponse
from .parsing import parse_line


class FailingOracle:
    """Always fails; attaching it turns the planner into a plain HTN planner."""

    stochastic = False

    def decompose(self, request: OracleRequest) -> OracleResponse:
        raise OracleFailure(BUDGET, f"failing oracle queried for {request.task}")


class ScriptedOracle:
    """Answers from a fixture mapping ground task text to candidate sequences.

    Each key (e.g. ``"planeTransport(pck, ap1, ap2)"``) maps to one sequence
    or a list of alternative sequences.  The first alternative executable
    from the request state is returned, otherwise the first one.  Unknown
    tasks fail as ``unparseable``.
    """

    stochastic = False

    def __init__(self, fixture: Mapping[str, Sequence]):
        self.fixture: dict[str, list[list[str]]] = {}
        for key, value in fixture.items():
            value = list(value or [])
            alternatives = value if value and isinstance(value[0], list) else [value]
            self.fixture[_normalize(key)] = [[str(s) for s in alt] for alt in alternatives]

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedOracle:
        data = yaml.safe_load(Path(path).read_text()) or {}
        return cls(data)

    def decompose(self, request: OracleRequest) -> OracleResponse:
        alternatives = self.fixture.get(str(request.task))
        if alternatives is None:
            raise OracleFailure(UNPARSEABLE, f"no scripted decomposition for {request.task}")
        known = frozenset(request.constants)
        parsed = []
        for alt in alternatives:
            tasks = []
            for line in alt:
                out = parse_line(line.strip(), request.domain, known)
                if not isinstance(out, GroundTask):
                    raise OracleFailure(UNPARSEABLE, f"fixture line {line!r}: {out}")
                tasks.append(out)
            parsed.append(tuple(tasks))
        for tasks in parsed:
            if _executable(request, tasks):
                return OracleResponse(tasks, source="mock")
        return OracleResponse(parsed[0], source="mock")


def _normalize(key: str) -> str:
    name, _, rest = str(key).partition("(")
    args = [a.strip() for a in rest.rstrip(")").split(",") if a.strip()]
    return f"{name.strip()}({', '.join(args)})"


def _executable(request: OracleRequest, tasks: Sequence[GroundTask]) -> bool:
    state = request.state
    for task in tasks:
        state = apply_action(request.domain, state, task)
        if state is None:
            return False
    return True


class AdversarialOracle:
    """Seeded random sequences of schema-valid actions.

    Each step is, with probability ``guided``, an action applicable in the
    simulated state (so some proposals are genuinely useful), otherwise an
    arbitrary well-typed call over declared constants.  The generator is
    seeded from ``seed``, the attempt number and the request fingerprint, so
    answers do not depend on query order.
    """

    stochastic = True

    def __init__(self, seed: int, attempt: int = 0, max_length: int = 6, guided: float = 0.6):
        self.seed = seed
        self.attempt = attempt
        self.max_length = max_length
        self.guided = guided

    def decompose(self, request: OracleRequest) -> OracleResponse:
        rng = random.Random(f"{self.seed}:{self.attempt}:{request.fingerprint()}")
        domain = request.domain
        names = list(domain.actions)
        state = request.state
        tasks = []
        for _ in range(rng.randint(0, self.max_length)):
            task = None
            if state is not None and rng.random() < self.guided:
                options = _applicable(request, state)
                if options:
                    task = rng.choice(options)
            if task is None:
                name = rng.choice(names)
                arity = len(domain.actions[name].params)
                task = GroundTask(name, tuple(rng.choice(request.constants) for _ in range(arity)), PRIMITIVE)
            tasks.append(task)
            if state is not None:
                state = apply_action(domain, state, task)
        return OracleResponse(tuple(tasks), source="mock")


def _applicable(request: OracleRequest, state) -> list[GroundTask]:
    out = []
    for action in request.domain.actions.values():
        for b in satisfiers(request.domain, state, action.preconditions):
            args = tuple(b[p.name] for p in action.params if p.name in b)
            if len(args) == len(action.params):
                out.append(GroundTask(action.name, args, PRIMITIVE))
    return out
