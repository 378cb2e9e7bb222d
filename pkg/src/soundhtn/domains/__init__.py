"""Bundled benchmark domains: logistics, household robot, search and rescue.

Each bundle directory holds ``domain.yaml``, a solvable ``problem.yaml``, an
``unsolvable.yaml`` variant missing one initial fact, a scripted
``oracle.yaml`` fixture and ``bundle.yaml`` (expected top-level effects and
the rows of the ablation matrix).
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from ..loader import load_domain, load_problem
from ..model import Domain, DomainError, Problem, State, evaluate
from ..planner import PlanResult, plan
from ..syntax import parse_literal

NAMES = ("logistics", "household", "rescue")


@dataclass(frozen=True)
class MatrixRow:
    """A compound task listed in the ablation matrix.

    With ``methods`` false the row stands alone (no per-method rows follow).
    """

    task: str
    methods: bool = True


@dataclass(frozen=True)
class DomainBundle:
    name: str
    directory: Path
    domain: Domain
    problem: Problem
    unsolvable: Problem
    expected_top_level_effects: tuple[str, ...]
    rows: tuple[MatrixRow, ...]

    @property
    def domain_file(self) -> Path:
        return self.directory / "domain.yaml"

    @property
    def problem_file(self) -> Path:
        return self.directory / "problem.yaml"

    @property
    def unsolvable_file(self) -> Path:
        return self.directory / "unsolvable.yaml"

    @property
    def fixture_file(self) -> Path:
        return self.directory / "oracle.yaml"

    def fixture(self) -> dict[str, list[list[str]]]:
        return yaml.safe_load(self.fixture_file.read_text()) or {}

    def top_level_achieved(self, state: State) -> bool:
        """True when every expected top-level effect holds in ``state``."""
        return all(
            evaluate(self.domain, state, parse_literal(text), {})
            for text in self.expected_top_level_effects
        )


def data_dir(name: str) -> Path:
    if name not in NAMES:
        raise DomainError(f"unknown domain bundle {name!r}; expected one of {', '.join(NAMES)}")
    return Path(str(resources.files(__package__).joinpath("data", name)))


def load_bundle(name: str) -> DomainBundle:
    """Load and validate one of the bundled domains by name."""
    return load_bundle_dir(data_dir(name), name)


def load_bundle_dir(directory: str | Path, name: Optional[str] = None) -> DomainBundle:
    directory = Path(directory)
    domain = load_domain(directory / "domain.yaml")
    meta = yaml.safe_load((directory / "bundle.yaml").read_text()) or {}
    rows = []
    for entry in meta.get("rows", []):
        row = MatrixRow(entry["task"], bool(entry.get("methods", True)))
        if row.task not in domain.tasks:
            raise DomainError(f"{directory}/bundle.yaml: {row.task} is not a compound task")
        rows.append(row)
    return DomainBundle(
        name=name or domain.name,
        directory=directory,
        domain=domain,
        problem=load_problem(directory / "problem.yaml", domain),
        unsolvable=load_problem(directory / "unsolvable.yaml", domain),
        expected_top_level_effects=tuple(meta.get("expected_top_level_effects", ())),
        rows=tuple(rows),
    )


def derive_fixture(result: PlanResult) -> dict[str, list[list[str]]]:
    """Turn a successful derivation into a scripted-oracle fixture.

    Every expanded compound task maps to the primitive actions its expansion
    contributed.  A task expanded in several states gets one alternative per
    distinct sequence, in derivation order.
    """
    if not result.found:
        raise ValueError("cannot derive a fixture from a failed search")
    fixture: dict[str, list[list[str]]] = {}
    for step in result.derivation:
        if step.kind != "expand":
            continue
        actions = [
            str(s.task)
            for s in result.derivation
            if s.kind == "action" and step.expansion in s.ancestry
        ]
        alternatives = fixture.setdefault(str(step.task), [])
        if actions not in alternatives:
            alternatives.append(actions)
    return fixture


def fixture_for(bundle: DomainBundle) -> dict[str, list[list[str]]]:
    """Regenerate the scripted fixture from the full-method solve."""
    return derive_fixture(plan(bundle.problem, record_trace=False))


def dump_fixture(fixture: dict[str, list[list[str]]]) -> str:
    header = "# Generated from the full-method derivation of problem.yaml.\n"
    return header + yaml.safe_dump(fixture, sort_keys=False, default_flow_style=False, width=200)


__all__ = [
    "NAMES",
    "DomainBundle",
    "MatrixRow",
    "data_dir",
    "derive_fixture",
    "dump_fixture",
    "fixture_for",
    "load_bundle",
    "load_bundle_dir",
]
