"""Load domain and problem files (YAML).

Domain file sections: ``types``, ``predicates``, ``objects`` (domain-level
constants), ``axioms``, ``actions``, ``compound_tasks``, ``methods``.
Problem file sections: ``domain``, ``objects``, ``initial_state``,
``task_list``.  Schemas are keyed by their signature, e.g.
``drive(?t, ?s, ?d)``; lists of conditions use YAML block sequences.

Every object of type ``T`` contributes the atom ``T(obj)`` to the initial
state, so type checks are ordinary preconditions.
"""

from __future__ import annotations

import graphlib
import re
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

import yaml

from .model import (
    ActionSchema,
    Axiom,
    CompoundTaskSchema,
    Domain,
    DomainError,
    GroundTask,
    Method,
    Problem,
    State,
    TaskTemplate,
)
from .syntax import (
    EQUALITY,
    Atom,
    Const,
    Formula,
    Literal,
    Quantified,
    SyntaxProblem,
    Var,
    free_variables,
    literals,
    parse_atom,
    parse_formula,
    parse_ground,
    parse_literal,
)

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _read(source: str | Path | Mapping[str, Any]) -> tuple[dict, str]:
    if isinstance(source, Mapping):
        return dict(source), "<mapping>"
    path = Path(source)
    try:
        data = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"{path}: expected a mapping at top level")
    return data, str(path)


def _signature(text: str, where: str) -> tuple[str, tuple[Var, ...]]:
    try:
        atom = parse_atom(text)
    except SyntaxProblem as exc:
        raise DomainError(f"{where}: {exc}") from exc
    params = []
    for a in atom.args:
        if not isinstance(a, Var):
            raise DomainError(f"{where}: parameter {a} of {atom.predicate} is not a variable")
        params.append(a)
    if len({p.name for p in params}) != len(params):
        raise DomainError(f"{where}: duplicate parameter in {text!r}")
    return atom.predicate, tuple(params)


def _vars(text: Any, where: str) -> tuple[Var, ...]:
    if text is None:
        return ()
    names = str(text).replace(",", " ").split()
    for n in names:
        if not n.startswith("?") or not _NAME.match(n[1:]):
            raise DomainError(f"{where}: {n!r} is not a variable")
    return tuple(Var(n) for n in names)


def _list(value: Any, where: str) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    if not isinstance(value, list):
        raise DomainError(f"{where}: expected a list")
    return [str(v) for v in value]


class _DomainBuilder:
    def __init__(self, data: dict, origin: str):
        self.data = data
        self.origin = origin
        self.types: tuple[str, ...] = ()
        self.predicates: dict[str, int] = {}
        self.axiom_arity: dict[str, int] = {}
        self.constants: dict[str, tuple[str, ...]] = {}

    def fail(self, msg: str) -> DomainError:
        return DomainError(f"{self.origin}: {msg}")

    def build(self) -> Domain:
        data = self.data
        unknown = set(data) - {
            "name", "types", "predicates", "objects", "axioms", "actions", "compound_tasks", "methods",
        }
        if unknown:
            raise self.fail(f"unknown sections {sorted(unknown)}")
        self.types = tuple(_list(data.get("types"), "types"))
        for t in self.types:
            if not _NAME.match(t):
                raise self.fail(f"bad type name {t!r}")
        for name, arity in (data.get("predicates") or {}).items():
            if not _NAME.match(str(name)) or not isinstance(arity, int) or arity < 0:
                raise self.fail(f"bad predicate declaration {name!r}: {arity!r}")
            self.predicates[str(name)] = arity
        for t in self.types:
            if self.predicates.get(t, 1) != 1:
                raise self.fail(f"type {t!r} is also declared as a predicate of arity {self.predicates[t]}")
            self.predicates[t] = 1
        self.constants = _objects(data.get("objects"), self.types, self.origin)

        raw_axioms = data.get("axioms") or {}
        parsed_heads = {}
        for sig in raw_axioms:
            name, params = _signature(str(sig), f"{self.origin}: axiom")
            if name in self.predicates or name in parsed_heads:
                raise self.fail(f"axiom {name!r} clashes with another predicate or axiom")
            parsed_heads[name] = (sig, params)
            self.axiom_arity[name] = len(params)
        axioms = {}
        for name, (sig, params) in parsed_heads.items():
            where = f"axiom {name}"
            body = self._formula(raw_axioms[sig], where)
            free = free_variables(body) - {p.name for p in params}
            if free:
                raise self.fail(f"{where}: variables {sorted(free)} are not parameters")
            axioms[name] = Axiom(name, params, body)
        self._check_acyclic(axioms)

        actions = {}
        for sig, spec in (data.get("actions") or {}).items():
            name, params = _signature(str(sig), f"{self.origin}: action")
            where = f"action {name}"
            spec = spec or {}
            pre = self._literals(spec.get("pre"), where)
            add = tuple(self._effect_atom(t, where) for t in _list(spec.get("add"), where))
            delete = tuple(self._effect_atom(t, where) for t in _list(spec.get("delete"), where))
            self._vars_within(params, [l.atom for l in pre] + list(add) + list(delete), where)
            actions[name] = ActionSchema(name, params, pre, add, delete)

        tasks = {}
        for sig, spec in (data.get("compound_tasks") or {}).items():
            name, params = _signature(str(sig), f"{self.origin}: compound task")
            where = f"compound task {name}"
            if name in actions:
                raise self.fail(f"{name!r} is both an action and a compound task")
            spec = spec or {}
            pre = self._literals(spec.get("pre"), where)
            effects = self._literals(spec.get("effects"), where)
            self._vars_within(params, [l.atom for l in pre + effects], where)
            tasks[name] = CompoundTaskSchema(name, params, pre, effects)

        methods = []
        seen = set()
        for i, spec in enumerate(data.get("methods") or []):
            methods.append(self._method(spec, i, actions, tasks))
            if methods[-1].name in seen:
                raise self.fail(f"duplicate method name {methods[-1].name!r}")
            seen.add(methods[-1].name)

        return Domain(
            name=str(data.get("name", Path(self.origin).stem)),
            predicates=self.predicates,
            types=self.types,
            axioms=axioms,
            actions=actions,
            tasks=tasks,
            methods=tuple(methods),
            constants=self.constants,
        )

    def _formula(self, text: Any, where: str) -> Formula:
        try:
            formula = parse_formula(str(text))
        except SyntaxProblem as exc:
            raise self.fail(f"{where}: {exc}") from exc
        self._check_formula(formula, where)
        return formula

    def _check_formula(self, formula: Formula, where: str) -> None:
        for lit in literals(formula):
            self._check_atom(lit.atom, where)
        stack = [formula]
        while stack:
            f = stack.pop()
            if isinstance(f, Quantified):
                if f.type not in self.types:
                    raise self.fail(f"{where}: quantifier over undeclared type {f.type!r}")
                stack.append(f.body)
            elif hasattr(f, "parts"):
                stack.extend(f.parts)
            elif hasattr(f, "part"):
                stack.append(f.part)

    def _check_atom(self, atom: Atom, where: str) -> None:
        name = atom.predicate
        if name == EQUALITY:
            arity = 2
        elif name in self.predicates:
            arity = self.predicates[name]
        elif name in self.axiom_arity:
            arity = self.axiom_arity[name]
        else:
            raise self.fail(f"{where}: undeclared predicate {name!r}")
        if len(atom.args) != arity:
            raise self.fail(f"{where}: {name} expects {arity} arguments, got {len(atom.args)}")
        for a in atom.args:
            if isinstance(a, Const) and a.name not in self.constants:
                raise self.fail(f"{where}: undeclared constant {a.name!r}")

    def _literals(self, value: Any, where: str) -> tuple[Literal, ...]:
        out = []
        for text in _list(value, where):
            try:
                lit = parse_literal(text)
            except SyntaxProblem as exc:
                raise self.fail(f"{where}: {exc}") from exc
            self._check_atom(lit.atom, where)
            out.append(lit)
        return tuple(out)

    def _effect_atom(self, text: str, where: str) -> Atom:
        try:
            atom = parse_atom(text)
        except SyntaxProblem as exc:
            raise self.fail(f"{where}: {exc}") from exc
        if atom.predicate not in self.predicates:
            raise self.fail(f"{where}: effect on undeclared or derived predicate {atom.predicate!r}")
        self._check_atom(atom, where)
        return atom

    def _vars_within(self, params: Iterable[Var], atoms: Iterable[Atom], where: str) -> None:
        allowed = {p.name for p in params}
        for atom in atoms:
            stray = set(atom.variables()) - allowed
            if stray:
                raise self.fail(f"{where}: variables {sorted(stray)} are not parameters")

    def _template(self, text: str, where: str, actions: Mapping, tasks: Mapping) -> TaskTemplate:
        try:
            atom = parse_atom(text)
        except SyntaxProblem as exc:
            raise self.fail(f"{where}: {exc}") from exc
        schema = actions.get(atom.predicate) or tasks.get(atom.predicate)
        if schema is None:
            raise self.fail(f"{where}: unknown task {atom.predicate!r}")
        if len(schema.params) != len(atom.args):
            raise self.fail(f"{where}: {atom.predicate} expects {len(schema.params)} arguments")
        for a in atom.args:
            if isinstance(a, Const) and a.name not in self.constants:
                raise self.fail(f"{where}: undeclared constant {a.name!r}")
        return TaskTemplate(atom.predicate, atom.args)

    def _method(self, spec: Any, index: int, actions: Mapping, tasks: Mapping) -> Method:
        if not isinstance(spec, dict) or "task" not in spec:
            raise self.fail(f"method #{index}: expected a mapping with a 'task' entry")
        head = self._template(str(spec["task"]), f"method #{index}", actions, tasks)
        if head.name not in tasks:
            raise self.fail(f"method #{index}: {head.name!r} is not a compound task")
        name = str(spec.get("name", f"{head.name}M"))
        where = f"method {name}"
        extra = _vars(spec.get("extra"), f"{self.origin}: {where}")
        pre = self._literals(spec.get("pre"), where)
        subtasks = tuple(self._template(t, where, actions, tasks) for t in _list(spec.get("subtasks"), where))
        head_vars = {a.name for a in head.args if isinstance(a, Var)}
        clash = head_vars & {v.name for v in extra}
        if clash:
            raise self.fail(f"{where}: extra parameters {sorted(clash)} already bound by the task head")
        bound = head_vars | {v.name for v in extra}
        for lit in pre:
            if lit.positive and lit.atom.predicate in self.predicates:
                bound |= set(lit.atom.variables())
        for sub in subtasks:
            stray = {a.name for a in sub.args if isinstance(a, Var)} - bound
            if stray:
                raise self.fail(f"{where}: subtask {sub} uses unbound variables {sorted(stray)}")
        return Method(name, head, extra, pre, subtasks)

    def _check_acyclic(self, axioms: Mapping[str, Axiom]) -> None:
        graph = {
            name: {l.atom.predicate for l in literals(ax.body) if l.atom.predicate in axioms}
            for name, ax in axioms.items()
        }
        try:
            tuple(graphlib.TopologicalSorter(graph).static_order())
        except graphlib.CycleError as exc:
            raise self.fail(f"cyclic axioms: {exc.args[1]}") from exc


def _objects(value: Any, types: Iterable[str], origin: str) -> dict[str, tuple[str, ...]]:
    types = set(types)
    out: dict[str, list[str]] = {}
    for type_name, names in (value or {}).items():
        if type_name not in types:
            raise DomainError(f"{origin}: objects of undeclared type {type_name!r}")
        for n in _list(names, "objects"):
            if not _NAME.match(n):
                raise DomainError(f"{origin}: bad object name {n!r}")
            out.setdefault(n, [])
            if type_name not in out[n]:
                out[n].append(type_name)
    return {k: tuple(v) for k, v in out.items()}


def load_domain(source: str | Path | Mapping[str, Any]) -> Domain:
    data, origin = _read(source)
    return _DomainBuilder(data, origin).build()


def load_problem(source: str | Path | Mapping[str, Any], domain: Domain) -> Problem:
    data, origin = _read(source)
    unknown = set(data) - {"name", "domain", "objects", "initial_state", "task_list"}
    if unknown:
        raise DomainError(f"{origin}: unknown sections {sorted(unknown)}")
    if data.get("domain") not in (None, domain.name):
        raise DomainError(f"{origin}: problem is for domain {data['domain']!r}, not {domain.name!r}")
    objects = _objects(data.get("objects"), domain.types, origin)
    overlap = set(objects) & set(domain.constants)
    if overlap:
        raise DomainError(f"{origin}: objects {sorted(overlap)} are already domain constants")
    known = {**domain.constants, **objects}

    atoms = set()
    for obj, obj_types in known.items():
        atoms.update((t, obj) for t in obj_types)
    for text in _list(data.get("initial_state"), "initial_state"):
        atoms.add(_ground_fact(text, domain, known, origin))

    tasks = []
    for text in _list(data.get("task_list"), "task_list"):
        tasks.append(_ground_task(text, domain, known, origin))
    return Problem(
        name=str(data.get("name", Path(origin).stem)),
        domain=domain,
        objects=objects,
        initial=State.of(atoms),
        tasks=tuple(tasks),
    )


def _ground_fact(text: str, domain: Domain, known: Mapping, origin: str) -> tuple:
    try:
        name, args = parse_ground(text)
    except SyntaxProblem as exc:
        raise DomainError(f"{origin}: {exc}") from exc
    if name not in domain.predicates:
        raise DomainError(f"{origin}: undeclared predicate {name!r} in {text!r}")
    if domain.predicates[name] != len(args):
        raise DomainError(f"{origin}: {name} expects {domain.predicates[name]} arguments in {text!r}")
    for a in args:
        if a not in known:
            raise DomainError(f"{origin}: undeclared constant {a!r} in {text!r}")
    return (name, *args)


def _ground_task(text: str, domain: Domain, known: Mapping, origin: str) -> GroundTask:
    try:
        name, args = parse_ground(text)
    except SyntaxProblem as exc:
        raise DomainError(f"{origin}: {exc}") from exc
    schema = domain.actions.get(name) or domain.tasks.get(name)
    if schema is None:
        raise DomainError(f"{origin}: unknown task {name!r}")
    if len(schema.params) != len(args):
        raise DomainError(f"{origin}: {name} expects {len(schema.params)} arguments")
    for a in args:
        if a not in known:
            raise DomainError(f"{origin}: undeclared constant {a!r} in {text!r}")
    return GroundTask(name, args, domain.kind_of(name))


def parse_task(text: str, domain: Domain, constants: Optional[Iterable[str]] = None) -> GroundTask:
    """Parse a ground task string such as ``drive(truck1, ap1, src)``."""
    known = {c: () for c in (constants if constants is not None else domain.constants)}
    return _ground_task(text, domain, known, "<task>")

