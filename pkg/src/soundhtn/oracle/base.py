"""The decomposition-oracle port: request, response and failure types."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Protocol, runtime_checkable

from ..model import (
    Domain,
    GroundTask,
    HTNError,
    State,
    ground_literal_text,
)
from .prompts import PROMPT_VERSION, render_axioms, render_operators

UNPARSEABLE = "unparseable"
TRANSPORT = "transport"
BUDGET = "budget-exhausted"


class OracleFailure(HTNError):
    """The oracle produced no usable decomposition.

    ``kind`` is one of ``unparseable``, ``transport`` or ``budget-exhausted``.
    """

    def __init__(self, kind: str, detail: str = "", report: Iterable = ()):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail
        self.report = tuple(report)


@dataclass(frozen=True, eq=False)
class OracleRequest:
    task: GroundTask
    preconditions: tuple[str, ...]
    effects: tuple[str, ...]
    state: State
    domain: Domain
    constants: tuple[str, ...]

    @classmethod
    def build(cls, domain: Domain, state: State, task: GroundTask, constants: Iterable[str]) -> OracleRequest:
        schema = domain.tasks[task.name]
        binding = {p.name: a for p, a in zip(schema.params, task.args)}
        return cls(
            task=task,
            preconditions=tuple(ground_literal_text(l, binding) for l in schema.preconditions),
            effects=tuple(ground_literal_text(l, binding) for l in schema.effects),
            state=state,
            domain=domain,
            constants=tuple(sorted(set(constants) | set(domain.constants))),
        )

    def fingerprint(self, salt: str = "") -> str:
        """Stable hash of the task, its semantics, the state and the schema set."""
        payload = json.dumps(
            {
                "prompt_version": PROMPT_VERSION,
                "task": str(self.task),
                "preconditions": list(self.preconditions),
                "effects": list(self.effects),
                "state": self.state.canonical,
                "operators": render_operators(self.domain),
                "axioms": render_axioms(self.domain),
                "constants": list(self.constants),
                "salt": salt,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class OracleResponse:
    tasks: tuple[GroundTask, ...]
    raw: tuple[str, str] = ("", "")
    source: str = "mock"  # live | cache | mock
    rejected: tuple = field(default=(), compare=False)


@runtime_checkable
class Oracle(Protocol):
    """Anything that proposes a primitive task sequence for a compound task.

    ``stochastic`` tells the experiment harness whether repeating a query
    can give a different answer.
    """

    stochastic: bool

    def decompose(self, request: OracleRequest) -> OracleResponse: ...
