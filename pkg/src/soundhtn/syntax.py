"""Terms, atoms and condition formulas, with a small text parser.

Condition text looks like::

    at(?p, ?s)
    not at(?t, ?l)
    ?s != ?d
    exists ?c - city: (inCity(?a, ?c) and inCity(?b, ?c))
    forall ?r - room: (not inHouse(?r, ?h) or clean(?r))

Variables start with ``?``; every other identifier in argument position is a
constant.  ``==`` and ``!=`` compare two terms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

EQUALITY = "="


class SyntaxProblem(ValueError):
    """Raised when condition or atom text cannot be parsed."""


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Var:
    name: str  # includes the leading "?"

    def __str__(self) -> str:
        return self.name


Term = Union[Const, Var]


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple[Term, ...]

    @property
    def is_ground(self) -> bool:
        return all(isinstance(a, Const) for a in self.args)

    def variables(self) -> list[str]:
        return [a.name for a in self.args if isinstance(a, Var)]

    def __str__(self) -> str:
        if self.predicate == EQUALITY:
            return f"{self.args[0]} == {self.args[1]}"
        return f"{self.predicate}({', '.join(map(str, self.args))})"


@dataclass(frozen=True, slots=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        if self.positive:
            return str(self.atom)
        if self.atom.predicate == EQUALITY:
            return f"{self.atom.args[0]} != {self.atom.args[1]}"
        return f"not {self.atom}"


@dataclass(frozen=True, slots=True)
class And:
    parts: tuple[Formula, ...]

    def __str__(self) -> str:
        return "(" + " and ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True, slots=True)
class Or:
    parts: tuple[Formula, ...]

    def __str__(self) -> str:
        return "(" + " or ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True, slots=True)
class Not:
    part: Formula

    def __str__(self) -> str:
        return f"not {self.part}"


@dataclass(frozen=True, slots=True)
class Quantified:
    universal: bool
    var: str
    type: str
    body: Formula

    def __str__(self) -> str:
        word = "forall" if self.universal else "exists"
        return f"{word} {self.var} - {self.type}: {self.body}"


Formula = Union[Literal, And, Or, Not, Quantified]


def free_variables(formula: Formula) -> set[str]:
    if isinstance(formula, Literal):
        return set(formula.atom.variables())
    if isinstance(formula, (And, Or)):
        out: set[str] = set()
        for part in formula.parts:
            out |= free_variables(part)
        return out
    if isinstance(formula, Not):
        return free_variables(formula.part)
    return free_variables(formula.body) - {formula.var}


def literals(formula: Formula) -> Iterator[Literal]:
    """Yield every literal occurring anywhere inside ``formula``."""
    if isinstance(formula, Literal):
        yield formula
    elif isinstance(formula, (And, Or)):
        for part in formula.parts:
            yield from literals(part)
    elif isinstance(formula, Not):
        yield from literals(formula.part)
    else:
        yield from literals(formula.body)


_TOKEN = re.compile(
    r"\s*(?:(?P<var>\?[A-Za-z_][A-Za-z0-9_]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>==|!=|[(),:\-]))"
)
_KEYWORDS = {"not", "and", "or", "forall", "exists"}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise SyntaxProblem(f"unexpected character at {pos} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, value: str | None = None, kind: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise SyntaxProblem(f"unexpected end of {self.text!r}")
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            raise SyntaxProblem(f"expected {value or kind}, got {tok[1]!r} in {self.text!r}")
        self.i += 1
        return tok[1]

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[1] == value

    def done(self) -> None:
        if self.peek() is not None:
            raise SyntaxProblem(f"trailing input {self.peek()[1]!r} in {self.text!r}")

    def formula(self) -> Formula:
        parts = [self.conjunction()]
        while self.at("or"):
            self.take("or")
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.at("and"):
            self.take("and")
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        if self.at("not"):
            self.take("not")
            inner = self.unary()
            if isinstance(inner, Literal):
                return Literal(inner.atom, not inner.positive)
            return Not(inner)
        if self.at("forall") or self.at("exists"):
            universal = self.take() == "forall"
            var = self.take(kind="var")
            self.take("-")
            type_name = self.take(kind="ident")
            self.take(":")
            return Quantified(universal, var, type_name, self.unary())
        if self.at("("):
            self.take("(")
            inner = self.formula()
            self.take(")")
            return inner
        return self.literal()

    def term(self) -> Term:
        kind, value = self.peek() or ("", "")
        if kind == "var":
            self.i += 1
            return Var(value)
        if kind == "ident" and value not in _KEYWORDS:
            self.i += 1
            return Const(value)
        raise SyntaxProblem(f"expected a term, got {value!r} in {self.text!r}")

    def literal(self) -> Literal:
        tok = self.peek()
        nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
        if tok and tok[0] == "ident" and nxt and nxt[1] == "(":
            return Literal(self.atom())
        left = self.term()
        op = self.take()
        if op not in ("==", "!="):
            raise SyntaxProblem(f"expected == or != in {self.text!r}")
        right = self.term()
        return Literal(Atom(EQUALITY, (left, right)), op == "==")

    def atom(self) -> Atom:
        name = self.take(kind="ident")
        if name in _KEYWORDS:
            raise SyntaxProblem(f"keyword {name!r} used as a name in {self.text!r}")
        self.take("(")
        args: list[Term] = []
        if not self.at(")"):
            args.append(self.term())
            while self.at(","):
                self.take(",")
                args.append(self.term())
        self.take(")")
        return Atom(name, tuple(args))


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    out = p.formula()
    p.done()
    return out


def parse_literal(text: str) -> Literal:
    out = parse_formula(text)
    if not isinstance(out, Literal):
        raise SyntaxProblem(f"expected a single literal, got {text!r}")
    return out


def parse_atom(text: str) -> Atom:
    p = _Parser(text)
    out = p.atom()
    p.done()
    return out


def parse_ground(text: str) -> tuple[str, tuple[str, ...]]:
    """Parse ``name(a, b)`` into ``("name", ("a", "b"))``; variables are rejected."""
    atom = parse_atom(text)
    if not atom.is_ground:
        raise SyntaxProblem(f"expected a ground expression, got {text!r}")
    return atom.predicate, tuple(a.name for a in atom.args)
