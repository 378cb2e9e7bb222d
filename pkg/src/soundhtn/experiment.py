"""Ablation experiment: solve each bundled problem with knowledge removed.

The matrix per domain is: full domain, unsolvable variant, then for each
listed compound task a row with all its methods removed followed by one row
per removed method, and finally a row with no methods at all.  Each cell gets
up to ``retries`` attempts and stops at the first plan; every plan is
re-checked by the validator before it is counted.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .domains import DomainBundle
from .model import Method, Problem
from .oracle import AdversarialOracle, ExchangeCache, FailingOracle, LLMOracle, Oracle, ScriptedOracle
from .oracle.llm import ChatTransport, Transport
from .planner import Limits, PlanResult, plan
from .validator import execute, satisfies

log = logging.getLogger(__name__)

FULL = "full"
UNSOLVABLE = "unsolvable"
METHOD_REMOVED = "method-removed"
NO_METHODS = "no-methods"
NO_MODEL = "no-model"

CHECK = "✓"


class SoundnessViolation(RuntimeError):
    """The validator rejected a plan the planner emitted."""


@dataclass(frozen=True)
class AblationSpec:
    mode: str
    task: Optional[str] = None
    method_index: Optional[int] = None  # 1-based, as in M1, M2, ...
    retries: int = 5

    def __post_init__(self):
        if self.mode not in (FULL, UNSOLVABLE, METHOD_REMOVED, NO_METHODS, NO_MODEL):
            raise ValueError(f"unknown ablation mode {self.mode!r}")
        if self.mode in (METHOD_REMOVED, NO_METHODS) and not self.task:
            raise ValueError(f"{self.mode} needs a task")
        if self.mode == METHOD_REMOVED and not self.method_index:
            raise ValueError("method-removed needs a method index")
        if self.retries < 1:
            raise ValueError("retries must be at least 1")

    @property
    def label(self) -> str:
        if self.mode == FULL:
            return "Full domain"
        if self.mode == UNSOLVABLE:
            return "Unsolvable"
        if self.mode == NO_MODEL:
            return "No model"
        if self.mode == NO_METHODS:
            return self.task
        return f"  M{self.method_index}"

    @property
    def key(self) -> str:
        parts = [self.mode]
        if self.task:
            parts.append(self.task)
        if self.method_index:
            parts.append(f"M{self.method_index}")
        return ":".join(parts)

    def methods(self, bundle: DomainBundle) -> tuple[Method, ...]:
        methods = bundle.domain.methods
        if self.mode in (FULL, UNSOLVABLE):
            return methods
        if self.mode == NO_MODEL:
            return ()
        if self.mode == NO_METHODS:
            return tuple(m for m in methods if m.task.name != self.task)
        own = bundle.domain.methods_for(self.task)
        if not 1 <= self.method_index <= len(own):
            raise ValueError(f"{self.task} has no method M{self.method_index}")
        removed = own[self.method_index - 1]
        return tuple(m for m in methods if m is not removed)

    def problem(self, bundle: DomainBundle) -> Problem:
        return bundle.unsolvable if self.mode == UNSOLVABLE else bundle.problem

    @classmethod
    def parse(cls, text: str, retries: int = 5) -> AblationSpec:
        """Parse ``full``, ``unsolvable``, ``no-model``, ``no-methods:T`` or ``method-removed:T:2``."""
        mode, *rest = text.split(":")
        if mode == METHOD_REMOVED and len(rest) == 2:
            return cls(mode, rest[0], int(rest[1].lstrip("Mm")), retries)
        if mode == NO_METHODS and len(rest) == 1:
            return cls(mode, rest[0], retries=retries)
        if mode in (FULL, UNSOLVABLE, NO_MODEL) and not rest:
            return cls(mode, retries=retries)
        raise ValueError(f"cannot parse ablation {text!r}")


def ablation_matrix(bundle: DomainBundle, retries: int = 5) -> list[AblationSpec]:
    specs = [AblationSpec(FULL, retries=retries), AblationSpec(UNSOLVABLE, retries=retries)]
    for row in bundle.rows:
        specs.append(AblationSpec(NO_METHODS, row.task, retries=retries))
        if row.methods:
            for i in range(1, len(bundle.domain.methods_for(row.task)) + 1):
                specs.append(AblationSpec(METHOD_REMOVED, row.task, i, retries))
    specs.append(AblationSpec(NO_MODEL, retries=retries))
    return specs


def knowledge_needed(spec: AblationSpec, full: PlanResult, bundle: DomainBundle) -> bool:
    """Whether the full-method derivation relied on what ``spec`` removes."""
    if spec.mode in (FULL, UNSOLVABLE):
        return False
    if spec.mode == NO_MODEL:
        return bool(full.expanded_tasks())
    if spec.mode == NO_METHODS:
        return any(t.name == spec.task for t in full.expanded_tasks())
    removed = bundle.domain.methods_for(spec.task)[spec.method_index - 1]
    return removed.name in full.methods_used()


OracleFactory = Callable[[int], Optional[Oracle]]


@dataclass(frozen=True)
class OracleChoice:
    """A parsed ``--oracle`` flag: ``failing``, ``scripted[:file]``,
    ``adversarial:<seed>`` or ``live``."""

    kind: str
    argument: str = ""

    @classmethod
    def parse(cls, text: str) -> OracleChoice:
        kind, _, arg = text.partition(":")
        if kind not in ("failing", "scripted", "adversarial", "live", "none"):
            raise ValueError(f"unknown oracle {text!r}")
        if kind == "adversarial":
            int(arg or "0")
        return cls(kind, arg)

    def __str__(self) -> str:
        return f"{self.kind}:{self.argument}" if self.argument else self.kind

    def factory(
        self,
        bundle: Optional[DomainBundle] = None,
        cache: Optional[ExchangeCache] = None,
        transport: Optional[Transport] = None,
    ) -> OracleFactory:
        if self.kind == "none":
            return lambda attempt: None
        if self.kind == "failing":
            return lambda attempt: FailingOracle()
        if self.kind == "scripted":
            if self.argument:
                scripted = ScriptedOracle.from_file(self.argument)
            elif bundle is not None:
                scripted = ScriptedOracle(bundle.fixture())
            else:
                raise ValueError("scripted oracle needs a fixture file")
            return lambda attempt: scripted
        if self.kind == "adversarial":
            seed = int(self.argument or "0")
            return lambda attempt: AdversarialOracle(seed, attempt)
        chat = transport if transport is not None else ChatTransport.from_env()
        return lambda attempt: LLMOracle(chat, cache, attempt=attempt)


@dataclass
class CellResult:
    spec: AblationSpec
    solved: bool
    calls: list[int] = field(default_factory=list)
    reasons: list[Optional[str]] = field(default_factory=list)
    actions: Optional[list[str]] = None
    splits: Optional[list[int]] = None
    short_circuited: bool = False
    artifact: Optional[str] = None

    def render(self) -> str:
        mark = CHECK if self.solved else "X"
        return f"{mark}({','.join(map(str, self.calls))})"

    def to_json(self) -> dict:
        return {
            "key": self.spec.key,
            "label": self.spec.label.strip(),
            "mode": self.spec.mode,
            "task": self.spec.task,
            "method": self.spec.method_index,
            "solved": self.solved,
            "calls": self.calls,
            "reasons": self.reasons,
            "plan": self.actions,
            "splits": self.splits,
            "short_circuited": self.short_circuited,
            "artifact": self.artifact,
        }


@dataclass
class DomainReport:
    domain: str
    oracle: str
    cells: list[CellResult]

    def to_json(self) -> dict:
        return {"domain": self.domain, "oracle": self.oracle, "rows": [c.to_json() for c in self.cells]}


@dataclass
class ExperimentReport:
    domains: list[DomainReport]

    def to_json(self) -> str:
        return json.dumps({"domains": [d.to_json() for d in self.domains]}, sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        blocks = []
        for d in self.domains:
            width = max(len(c.spec.label) for c in d.cells)
            lines = [f"{d.domain} (oracle: {d.oracle})"]
            lines += [f"  {c.spec.label.ljust(width)}  {c.render()}" for c in d.cells]
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + "\n"


def run_cell(
    bundle: DomainBundle,
    spec: AblationSpec,
    oracles: OracleFactory,
    limits: Optional[Limits] = None,
    artifacts: Optional[Path] = None,
    index: int = 0,
) -> CellResult:
    """Run one matrix cell with up to ``spec.retries`` attempts."""
    problem = spec.problem(bundle)
    methods = spec.methods(bundle)
    cell = CellResult(spec, solved=False)
    for attempt in range(spec.retries):
        oracle = oracles(attempt)
        result = plan(problem, oracle, limits, methods, record_trace=artifacts is not None)
        cell.calls.append(result.stats.oracle_calls)
        cell.reasons.append(result.reason)
        if result.found:
            _check(bundle, spec, problem, result)
            cell.solved = True
            cell.actions = [str(a) for a in result.actions]
            cell.splits = list(result.splits)
            if artifacts is not None:
                cell.artifact = _write_artifacts(artifacts, bundle.name, index, spec, result)
            break
        if not getattr(oracle, "stochastic", False) and attempt + 1 < spec.retries:
            log.info("%s %s: deterministic oracle, skipping %d identical retries",
                     bundle.name, spec.key, spec.retries - attempt - 1)
            cell.short_circuited = True
            break
    return cell


def _check(bundle: DomainBundle, spec: AblationSpec, problem: Problem, result: PlanResult) -> None:
    verdict = satisfies(problem.domain, problem.initial, problem.tasks, result.actions, result.splits)
    if not verdict.accepted:
        raise SoundnessViolation(
            f"{bundle.name} {spec.key}: validator rejected the plan "
            f"({verdict.failure.cause} at {verdict.failure.position}: {verdict.failure.detail})"
        )
    if spec.mode != UNSOLVABLE:
        final = execute(problem.domain, problem.initial, result.actions)
        if not bundle.top_level_achieved(final):
            raise SoundnessViolation(f"{bundle.name} {spec.key}: top-level effects do not hold")


def _write_artifacts(root: Path, domain: str, index: int, spec: AblationSpec, result: PlanResult) -> str:
    stem = f"{index:02d}-{spec.key.replace(':', '-')}"
    folder = root / domain
    folder.mkdir(parents=True, exist_ok=True)
    write_plan(folder / f"{stem}.plan", result)
    write_trace(folder / f"{stem}.trace.jsonl", result)
    return f"{domain}/{stem}.plan"


def write_plan(path: Path, result: PlanResult) -> None:
    path.write_text("".join(f"{a}\n" for a in result.actions or ()))


def write_trace(path: Path, result: PlanResult) -> None:
    path.write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in result.trace))


def run_domain(
    bundle: DomainBundle,
    oracles: OracleFactory,
    oracle_label: str,
    specs: Optional[Sequence[AblationSpec]] = None,
    limits: Optional[Limits] = None,
    jobs: int = 1,
    artifacts: Optional[Path] = None,
) -> DomainReport:
    specs = list(specs if specs is not None else ablation_matrix(bundle))
    if jobs <= 1:
        cells = [run_cell(bundle, s, oracles, limits, artifacts, i) for i, s in enumerate(specs)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_cell, bundle, s, oracles, limits, artifacts, i) for i, s in enumerate(specs)]
            cells = [f.result() for f in futures]
    return DomainReport(bundle.name, oracle_label, cells)


__all__ = [
    "FULL",
    "METHOD_REMOVED",
    "NO_METHODS",
    "NO_MODEL",
    "UNSOLVABLE",
    "AblationSpec",
    "CellResult",
    "DomainReport",
    "ExperimentReport",
    "OracleChoice",
    "SoundnessViolation",
    "ablation_matrix",
    "knowledge_needed",
    "run_cell",
    "run_domain",
]
