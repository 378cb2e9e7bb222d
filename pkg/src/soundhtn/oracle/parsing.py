"""Turn oracle text into validated primitive tasks."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from ..model import PRIMITIVE, Domain, GroundTask
from .base import UNPARSEABLE, OracleFailure

STRICT = "strict"
SALVAGE = "salvage"

_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Rejection:
    line: int  # 1-based
    text: str
    reason: str


@dataclass(frozen=True)
class ParseResult:
    tasks: tuple[GroundTask, ...]
    rejected: tuple[Rejection, ...] = ()


def parse_line(text: str, domain: Domain, constants: frozenset[str] | set[str]) -> GroundTask | str:
    """Parse one ``name(arg, ...)`` line; return the task or a rejection reason."""
    m = _LINE.match(text)
    if m is None:
        return "not of the form name(arg, ...)"
    name, inner = m.group(1), m.group(2).strip()
    args = tuple(a.strip() for a in inner.split(",")) if inner else ()
    if name not in domain.actions:
        if name in domain.tasks:
            return f"{name} is a compound task, not an operator"
        return f"unknown operator {name!r}"
    arity = len(domain.actions[name].params)
    if len(args) != arity:
        return f"{name} takes {arity} arguments, got {len(args)}"
    for a in args:
        if not _NAME.match(a) or a not in constants:
            return f"undeclared constant {a!r}"
    return GroundTask(name, args, PRIMITIVE)


def parse_predicates(
    text: str, domain: Domain, constants: Iterable[str], policy: str = STRICT
) -> ParseResult:
    """Parse newline-separated operator calls.

    Blank lines are skipped.  Under ``strict`` any bad line raises
    :class:`OracleFailure` (``unparseable``) listing every rejection; under
    ``salvage`` bad lines are dropped and reported.
    """
    if policy not in (STRICT, SALVAGE):
        raise ValueError(f"unknown parse policy {policy!r}")
    known = frozenset(constants)
    tasks: list[GroundTask] = []
    rejected: list[Rejection] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        out = parse_line(line, domain, known)
        if isinstance(out, GroundTask):
            tasks.append(out)
        else:
            rejected.append(Rejection(number, line, out))
    if rejected and policy == STRICT:
        first = rejected[0]
        raise OracleFailure(UNPARSEABLE, f"line {first.line} {first.text!r}: {first.reason}", rejected)
    return ParseResult(tuple(tasks), tuple(rejected))
