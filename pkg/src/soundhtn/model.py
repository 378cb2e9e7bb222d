"""Domain model: states, schemas, condition evaluation and state transitions.

Ground atoms are plain tuples ``(predicate, arg1, ...)``.  A :class:`State`
is an immutable set of them with a canonical sorted serialization, whose
digest keys the planner's visited set.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .syntax import (
    EQUALITY,
    And,
    Atom,
    Const,
    Formula,
    Literal,
    Not,
    Or,
    Quantified,
    Term,
    Var,
)

GroundAtom = tuple  # (predicate, *constants)
Binding = dict[str, str]

PRIMITIVE = "primitive"
COMPOUND = "compound"
VERIFIER = "verifier"


class HTNError(Exception):
    """Base class for errors raised by this package."""


class DomainError(HTNError):
    """A domain or problem file is malformed."""


class UnboundVariable(HTNError):
    pass


class UnknownPredicate(HTNError):
    pass


class UnknownAction(HTNError):
    pass


class MissingSemantics(HTNError):
    """A compound task declares no effects, so it cannot be verified."""


def format_ground(name: str, args: Sequence[str]) -> str:
    return f"{name}({', '.join(args)})"


@dataclass(frozen=True)
class State:
    atoms: frozenset

    @classmethod
    def of(cls, atoms: Iterable[GroundAtom]) -> State:
        return cls(frozenset(tuple(a) for a in atoms))

    def __contains__(self, atom: GroundAtom) -> bool:
        return atom in self.atoms

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def sorted_atoms(self) -> tuple[GroundAtom, ...]:
        return tuple(sorted(self.atoms))

    @cached_property
    def canonical(self) -> str:
        return "\n".join(format_ground(a[0], a[1:]) for a in self.sorted_atoms)

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical.encode()).hexdigest()[:16]

    @cached_property
    def by_predicate(self) -> dict[str, tuple[GroundAtom, ...]]:
        index: dict[str, list[GroundAtom]] = {}
        for atom in self.sorted_atoms:
            index.setdefault(atom[0], []).append(atom)
        return {k: tuple(v) for k, v in index.items()}

    @cached_property
    def objects(self) -> frozenset[str]:
        return frozenset(c for atom in self.atoms for c in atom[1:])

    def of_type(self, type_name: str) -> list[str]:
        return [a[1] for a in self.by_predicate.get(type_name, ()) if len(a) == 2]

    def transition(self, delete: Iterable[GroundAtom], add: Iterable[GroundAtom]) -> State:
        return State((self.atoms - frozenset(delete)) | frozenset(add))

    def __str__(self) -> str:
        return "{" + ", ".join(format_ground(a[0], a[1:]) for a in self.sorted_atoms) + "}"


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[Var, ...]
    preconditions: tuple[Literal, ...] = ()
    add: tuple[Atom, ...] = ()
    delete: tuple[Atom, ...] = ()


@dataclass(frozen=True)
class CompoundTaskSchema:
    name: str
    params: tuple[Var, ...]
    preconditions: tuple[Literal, ...] = ()
    effects: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class TaskTemplate:
    name: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return f"{self.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Method:
    name: str
    task: TaskTemplate
    extra_params: tuple[Var, ...] = ()
    preconditions: tuple[Literal, ...] = ()
    subtasks: tuple[TaskTemplate, ...] = ()


@dataclass(frozen=True)
class Axiom:
    name: str
    params: tuple[Var, ...]
    body: Formula


@dataclass(frozen=True, order=True)
class GroundTask:
    """A ground task.  Verifier tasks carry the name and arguments of the
    compound task whose effects they check."""

    name: str
    args: tuple[str, ...]
    kind: str = PRIMITIVE

    @property
    def is_compound(self) -> bool:
        return self.kind == COMPOUND

    @property
    def verified_task(self) -> GroundTask:
        if self.kind != VERIFIER:
            raise ValueError(f"{self} is not a verifier task")
        return GroundTask(self.name, self.args, COMPOUND)

    def __str__(self) -> str:
        text = format_ground(self.name, self.args)
        return f"verify[{text}]" if self.kind == VERIFIER else text


@dataclass(frozen=True, eq=False)
class Domain:
    name: str
    predicates: Mapping[str, int]
    types: tuple[str, ...]
    axioms: Mapping[str, Axiom]
    actions: Mapping[str, ActionSchema]
    tasks: Mapping[str, CompoundTaskSchema]
    methods: tuple[Method, ...]
    constants: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def kind_of(self, name: str) -> str:
        if name in self.actions:
            return PRIMITIVE
        if name in self.tasks:
            return COMPOUND
        raise UnknownAction(f"no action or compound task named {name!r}")

    def task(self, name: str, *args: str) -> GroundTask:
        return GroundTask(name, tuple(args), self.kind_of(name))

    def methods_for(self, task_name: str) -> list[Method]:
        return [m for m in self.methods if m.task.name == task_name]

    def with_methods(self, methods: Iterable[Method]) -> Domain:
        return Domain(
            self.name, self.predicates, self.types, self.axioms,
            self.actions, self.tasks, tuple(methods), self.constants,
        )


@dataclass(frozen=True, eq=False)
class Problem:
    name: str
    domain: Domain
    objects: Mapping[str, tuple[str, ...]]
    initial: State
    tasks: tuple[GroundTask, ...]

    @property
    def constants(self) -> frozenset[str]:
        return frozenset(self.objects) | frozenset(self.domain.constants)


# ---------------------------------------------------------------------------
# evaluation


def _ground_term(term: Term, binding: Mapping[str, str]) -> str:
    if isinstance(term, Const):
        return term.name
    try:
        return binding[term.name]
    except KeyError:
        raise UnboundVariable(f"variable {term.name} is unbound") from None


def ground_atom(atom: Atom, binding: Mapping[str, str]) -> GroundAtom:
    return (atom.predicate,) + tuple(_ground_term(t, binding) for t in atom.args)


def ground_literal_text(lit: Literal, binding: Mapping[str, str]) -> str:
    args = [_ground_term(t, binding) for t in lit.atom.args]
    if lit.atom.predicate == EQUALITY:
        return f"{args[0]} {'==' if lit.positive else '!='} {args[1]}"
    text = format_ground(lit.atom.predicate, args)
    return text if lit.positive else f"not {text}"


def evaluate(domain: Domain, state: State, condition: Formula, binding: Mapping[str, str]) -> bool:
    """Decide whether ``condition`` holds in ``state`` under ``binding``.

    Negative literals use negation as failure.  Literals naming an axiom are
    evaluated by recursively evaluating the axiom body.  Quantifiers range
    over the objects of the named type, i.e. the constants ``c`` with
    ``type(c)`` in the state.
    """
    if isinstance(condition, Literal):
        return _holds(domain, state, condition.atom, binding) == condition.positive
    if isinstance(condition, And):
        return all(evaluate(domain, state, p, binding) for p in condition.parts)
    if isinstance(condition, Or):
        return any(evaluate(domain, state, p, binding) for p in condition.parts)
    if isinstance(condition, Not):
        return not evaluate(domain, state, condition.part, binding)
    if isinstance(condition, Quantified):
        scope = dict(binding)
        test = all if condition.universal else any

        def each(obj: str) -> bool:
            scope[condition.var] = obj
            return evaluate(domain, state, condition.body, scope)

        return test(each(o) for o in state.of_type(condition.type))
    raise TypeError(f"not a condition: {condition!r}")


def _holds(domain: Domain, state: State, atom: Atom, binding: Mapping[str, str]) -> bool:
    if atom.predicate == EQUALITY:
        return _ground_term(atom.args[0], binding) == _ground_term(atom.args[1], binding)
    axiom = domain.axioms.get(atom.predicate)
    if axiom is not None:
        inner = {p.name: _ground_term(t, binding) for p, t in zip(axiom.params, atom.args)}
        return evaluate(domain, state, axiom.body, inner)
    if atom.predicate not in domain.predicates:
        raise UnknownPredicate(f"undeclared predicate {atom.predicate!r}")
    return ground_atom(atom, binding) in state


def universe(domain: Domain, state: State) -> list[str]:
    """Constants that unbound variables may range over."""
    return sorted(state.objects | frozenset(domain.constants))


def satisfiers(
    domain: Domain,
    state: State,
    conditions: Sequence[Literal],
    seed: Optional[Mapping[str, str]] = None,
) -> list[Binding]:
    """Every extension of ``seed`` under which all ``conditions`` hold.

    Conditions are processed left to right.  A positive literal over a state
    predicate binds its free variables by matching state atoms; any other
    literal with free variables enumerates them over :func:`universe`.  The
    result is ordered lexicographically by the constants assigned to new
    variables, in order of first appearance.
    """
    bindings: list[Binding] = [dict(seed or {})]
    for cond in conditions:
        extended: list[Binding] = []
        for b in bindings:
            extended.extend(_extend(domain, state, cond, b))
        bindings = extended
        if not bindings:
            break
    return bindings


def _extend(domain: Domain, state: State, cond: Literal, binding: Binding) -> Iterator[Binding]:
    atom = cond.atom
    free = [v for v in dict.fromkeys(atom.variables()) if v not in binding]
    if not free:
        if evaluate(domain, state, cond, binding):
            yield binding
        return
    if cond.positive and atom.predicate in domain.predicates:
        for fact in state.by_predicate.get(atom.predicate, ()):
            if len(fact) - 1 != len(atom.args):
                continue
            out = _match(atom.args, fact[1:], binding)
            if out is not None:
                yield out
        return
    for values in itertools.product(universe(domain, state), repeat=len(free)):
        out = dict(binding)
        out.update(zip(free, values))
        if evaluate(domain, state, cond, out):
            yield out


def _match(terms: Sequence[Term], values: Sequence[str], binding: Binding) -> Optional[Binding]:
    out = binding
    for term, value in zip(terms, values):
        if isinstance(term, Const):
            if term.name != value:
                return None
        elif term.name in out:
            if out[term.name] != value:
                return None
        else:
            if out is binding:
                out = dict(binding)
            out[term.name] = value
    return dict(out) if out is binding else out


# ---------------------------------------------------------------------------
# transitions and decomposition


def _bind_params(params: Sequence[Var], args: Sequence[str], what: str) -> Binding:
    if len(params) != len(args):
        raise UnknownAction(f"{what} expects {len(params)} arguments, got {len(args)}")
    return {p.name: a for p, a in zip(params, args)}


def apply_action(domain: Domain, state: State, task: GroundTask) -> Optional[State]:
    """Apply a primitive or verifier task; ``None`` means inapplicable.

    The input state is never modified.  A verifier task leaves the state
    unchanged when the verified task's effects hold.
    """
    if task.kind == VERIFIER:
        schema = domain.tasks.get(task.name)
        if schema is None:
            raise UnknownAction(f"no compound task named {task.name!r}")
        binding = _bind_params(schema.params, task.args, task.name)
        if not schema.effects:
            raise MissingSemantics(f"compound task {task.name!r} declares no effects")
        ok = all(evaluate(domain, state, e, binding) for e in schema.effects)
        return state if ok else None
    if task.kind != PRIMITIVE:
        raise UnknownAction(f"{task} is not primitive")
    action = domain.actions.get(task.name)
    if action is None:
        raise UnknownAction(f"no action named {task.name!r}")
    binding = _bind_params(action.params, task.args, task.name)
    for pre in action.preconditions:
        if not evaluate(domain, state, pre, binding):
            return None
    delete = [ground_atom(a, binding) for a in action.delete]
    add = [ground_atom(a, binding) for a in action.add]
    return state.transition(delete, add)


def make_verifier(domain: Domain, task: GroundTask) -> GroundTask:
    """Build the verifier task for a ground compound task."""
    schema = domain.tasks.get(task.name)
    if schema is None or task.kind != COMPOUND:
        raise UnknownAction(f"{task} is not a compound task")
    if len(schema.params) != len(task.args):
        raise UnknownAction(f"{task.name} expects {len(schema.params)} arguments")
    if not schema.effects:
        raise MissingSemantics(f"compound task {task.name!r} declares no effects")
    return GroundTask(task.name, task.args, VERIFIER)


def verifier_preconditions(domain: Domain, task: GroundTask) -> list[str]:
    """Ground text of the conditions checked by ``task``'s verifier."""
    target = task.verified_task if task.kind == VERIFIER else task
    schema = domain.tasks[target.name]
    binding = _bind_params(schema.params, target.args, target.name)
    return [ground_literal_text(e, binding) for e in schema.effects]


def _unify_head(template: TaskTemplate, task: GroundTask) -> Optional[Binding]:
    if template.name != task.name or len(template.args) != len(task.args):
        return None
    return _match(template.args, task.args, {})


def ground_template(domain: Domain, template: TaskTemplate, binding: Mapping[str, str]) -> GroundTask:
    args = tuple(_ground_term(t, binding) for t in template.args)
    return GroundTask(template.name, args, domain.kind_of(template.name))


@dataclass(frozen=True)
class Decomposition:
    method: Method
    binding: Mapping[str, str]
    subtasks: tuple[GroundTask, ...]


def decompositions(
    domain: Domain, state: State, task: GroundTask, methods: Optional[Sequence[Method]] = None
) -> Iterator[Decomposition]:
    """Lazily yield applicable decompositions in method order, then satisfier order."""
    if task.kind != COMPOUND:
        raise UnknownAction(f"{task} is not a compound task")
    for method in domain.methods if methods is None else methods:
        seed = _unify_head(method.task, task)
        if seed is None:
            continue
        for binding in satisfiers(domain, state, method.preconditions, seed):
            for full in _close_extra(domain, state, method, binding):
                subtasks = tuple(ground_template(domain, t, full) for t in method.subtasks)
                yield Decomposition(method, full, subtasks)


def _close_extra(domain: Domain, state: State, method: Method, binding: Binding) -> Iterator[Binding]:
    # extra parameters not constrained by any precondition range over all objects
    loose = [v.name for v in method.extra_params if v.name not in binding]
    if not loose:
        yield binding
        return
    for values in itertools.product(universe(domain, state), repeat=len(loose)):
        out = dict(binding)
        out.update(zip(loose, values))
        yield out


def applicable_decompositions(
    domain: Domain, state: State, task: GroundTask, methods: Optional[Sequence[Method]] = None
) -> list[tuple[GroundTask, ...]]:
    return [d.subtasks for d in decompositions(domain, state, task, methods)]
