"""ALC abstract syntax and a KRSS-style concrete syntax.

The concrete syntax is whitespace-insensitive s-expressions with ``;``
line comments::

    (implies (some hasPet Cat) CatOwner)
    (implies OldLady (and (some hasPet Animal) (all hasPet Cat)))
    (query (implies OldLady CatOwner))

A file holds any number of ontology axioms followed by exactly one
``(query ...)`` form whose axiom is the entailment goal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass


class QueryError(Exception):
    """Base class for input errors."""


class ParseError(QueryError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class NamespaceError(QueryError):
    """A name is used in more than one of the concept/role/individual namespaces."""


# --------------------------------------------------------------------------
# concepts

class ConceptExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Top(ConceptExpr):
    pass


@dataclass(frozen=True)
class Bottom(ConceptExpr):
    pass


@dataclass(frozen=True)
class Atomic(ConceptExpr):
    name: str


@dataclass(frozen=True)
class Not(ConceptExpr):
    inner: ConceptExpr


@dataclass(frozen=True)
class And(ConceptExpr):
    left: ConceptExpr
    right: ConceptExpr


@dataclass(frozen=True)
class Or(ConceptExpr):
    left: ConceptExpr
    right: ConceptExpr


@dataclass(frozen=True)
class Exists(ConceptExpr):
    role: str
    filler: ConceptExpr


@dataclass(frozen=True)
class Forall(ConceptExpr):
    role: str
    filler: ConceptExpr


# --------------------------------------------------------------------------
# axioms and queries

class OntologyAxiom:
    __slots__ = ()


@dataclass(frozen=True)
class Subsumption(OntologyAxiom):
    lhs: ConceptExpr
    rhs: ConceptExpr


@dataclass(frozen=True)
class Equivalence(OntologyAxiom):
    lhs: ConceptExpr
    rhs: ConceptExpr


@dataclass(frozen=True)
class ConceptAssertion(OntologyAxiom):
    concept: ConceptExpr
    individual: str


@dataclass(frozen=True)
class RoleAssertion(OntologyAxiom):
    role: str
    subject: str
    object: str


@dataclass(frozen=True)
class Query:
    """An entailment problem: does the ontology entail the goal axiom?"""

    ontology: tuple[OntologyAxiom, ...]
    goal: OntologyAxiom

    def expanded_ontology(self) -> tuple[OntologyAxiom, ...]:
        """Ontology with each equivalence split into its two subsumptions."""
        out: list[OntologyAxiom] = []
        for ax in self.ontology:
            if isinstance(ax, Equivalence):
                out.append(Subsumption(ax.lhs, ax.rhs))
                out.append(Subsumption(ax.rhs, ax.lhs))
            else:
                out.append(ax)
        return tuple(out)


RESERVED = {
    "and", "or", "not", "some", "all",
    "implies", "equivalent", "instance", "related", "query",
    "top", "bot",
}

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


# --------------------------------------------------------------------------
# tokenizer

@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(_Token(ch, line, col))
            col += 1
            i += 1
        else:
            m = _NAME_RE.match(text, i)
            if not m:
                raise ParseError(f"unexpected character {ch!r}", line, col)
            word = m.group(0)
            tokens.append(_Token(word, line, col))
            col += len(word)
            i += len(word)
    return tokens


class _Reader:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, expect: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col + len(last.text))
        self.pos += 1
        if expect is not None and tok.text != expect:
            raise ParseError(f"expected {expect!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def name(self, what: str) -> _Token:
        tok = self.next()
        if tok.text in "()" or tok.text in RESERVED or not _NAME_RE.fullmatch(tok.text):
            raise ParseError(f"expected {what}, found {tok.text!r}", tok.line, tok.col)
        return tok


# --------------------------------------------------------------------------
# parser

def _parse_concept(r: _Reader, names: "_Namespaces") -> ConceptExpr:
    tok = r.next()
    if tok.text == "top":
        return Top()
    if tok.text == "bot":
        return Bottom()
    if tok.text == "(":
        head = r.next()
        if head.text == "not":
            inner = _parse_concept(r, names)
            r.next(")")
            return Not(inner)
        if head.text in ("and", "or"):
            left = _parse_concept(r, names)
            right = _parse_concept(r, names)
            r.next(")")
            return And(left, right) if head.text == "and" else Or(left, right)
        if head.text in ("some", "all"):
            role = r.name("role name")
            names.use(role, "role")
            filler = _parse_concept(r, names)
            r.next(")")
            cons = Exists if head.text == "some" else Forall
            return cons(role.text, filler)
        raise ParseError(f"unknown concept constructor {head.text!r}", head.line, head.col)
    if tok.text == ")" or tok.text in RESERVED or not _NAME_RE.fullmatch(tok.text):
        raise ParseError(f"expected concept, found {tok.text!r}", tok.line, tok.col)
    names.use(tok, "concept")
    return Atomic(tok.text)


def _parse_axiom(r: _Reader, names: "_Namespaces") -> OntologyAxiom:
    r.next("(")
    head = r.next()
    if head.text in ("implies", "equivalent"):
        lhs = _parse_concept(r, names)
        rhs = _parse_concept(r, names)
        r.next(")")
        return Subsumption(lhs, rhs) if head.text == "implies" else Equivalence(lhs, rhs)
    if head.text == "instance":
        ind = r.name("individual name")
        names.use(ind, "individual")
        concept = _parse_concept(r, names)
        r.next(")")
        return ConceptAssertion(concept, ind.text)
    if head.text == "related":
        subj = r.name("individual name")
        obj = r.name("individual name")
        role = r.name("role name")
        names.use(subj, "individual")
        names.use(obj, "individual")
        names.use(role, "role")
        r.next(")")
        return RoleAssertion(role.text, subj.text, obj.text)
    raise ParseError(f"unknown axiom form {head.text!r}", head.line, head.col)


class _Namespaces:
    """Tracks which namespace each name was first seen in and rejects clashes."""

    def __init__(self):
        self.kinds: dict[str, tuple[str, int, int]] = {}

    def use(self, tok: _Token, kind: str) -> None:
        seen = self.kinds.get(tok.text)
        if seen is None:
            self.kinds[tok.text] = (kind, tok.line, tok.col)
        elif seen[0] != kind:
            raise NamespaceError(
                f"{tok.line}:{tok.col}: name {tok.text!r} used as {kind} "
                f"but already used as {seen[0]} at {seen[1]}:{seen[2]}"
            )


def parse_query(text: str) -> Query:
    """Parse an ontology plus a single ``(query ...)`` goal.

    Raises ParseError with position information on malformed input and
    NamespaceError when a name is used in two namespaces.
    """
    reader = _Reader(_tokenize(text))
    names = _Namespaces()
    ontology: list[OntologyAxiom] = []
    goal: OntologyAxiom | None = None
    while reader.peek() is not None:
        start = reader.peek()
        assert start is not None
        if start.text != "(":
            raise ParseError(f"expected '(', found {start.text!r}", start.line, start.col)
        after = reader.tokens[reader.pos + 1] if reader.pos + 1 < len(reader.tokens) else None
        if after is not None and after.text == "query":
            if goal is not None:
                raise ParseError("more than one (query ...) form", start.line, start.col)
            reader.next("(")
            reader.next("query")
            goal = _parse_axiom(reader, names)
            reader.next(")")
        else:
            ontology.append(_parse_axiom(reader, names))
    if goal is None:
        raise ParseError("missing (query ...) form", 1, 1)
    if isinstance(goal, (Equivalence, RoleAssertion)):
        raise ParseError("the goal must be an (implies ...) or (instance ...) axiom", 1, 1)
    return Query(tuple(ontology), goal)


# --------------------------------------------------------------------------
# rendering

def render_concept(c: ConceptExpr) -> str:
    if isinstance(c, Top):
        return "top"
    if isinstance(c, Bottom):
        return "bot"
    if isinstance(c, Atomic):
        return c.name
    if isinstance(c, Not):
        return f"(not {render_concept(c.inner)})"
    if isinstance(c, And):
        return f"(and {render_concept(c.left)} {render_concept(c.right)})"
    if isinstance(c, Or):
        return f"(or {render_concept(c.left)} {render_concept(c.right)})"
    if isinstance(c, Exists):
        return f"(some {c.role} {render_concept(c.filler)})"
    if isinstance(c, Forall):
        return f"(all {c.role} {render_concept(c.filler)})"
    raise TypeError(f"not a concept: {c!r}")


def render_axiom(ax: OntologyAxiom) -> str:
    if isinstance(ax, Subsumption):
        return f"(implies {render_concept(ax.lhs)} {render_concept(ax.rhs)})"
    if isinstance(ax, Equivalence):
        return f"(equivalent {render_concept(ax.lhs)} {render_concept(ax.rhs)})"
    if isinstance(ax, ConceptAssertion):
        return f"(instance {ax.individual} {render_concept(ax.concept)})"
    if isinstance(ax, RoleAssertion):
        return f"(related {ax.subject} {ax.object} {ax.role})"
    raise TypeError(f"not an axiom: {ax!r}")


def render_query(q: Query) -> str:
    lines = [render_axiom(ax) for ax in q.ontology]
    lines.append(f"(query {render_axiom(q.goal)})")
    return "\n".join(lines) + "\n"


def concept_names(q: Query) -> set[str]:
    out: set[str] = set()

    def walk(c: ConceptExpr) -> None:
        if isinstance(c, Atomic):
            out.add(c.name)
        elif isinstance(c, Not):
            walk(c.inner)
        elif isinstance(c, (And, Or)):
            walk(c.left)
            walk(c.right)
        elif isinstance(c, (Exists, Forall)):
            walk(c.filler)

    for ax in q.ontology + (q.goal,):
        if isinstance(ax, (Subsumption, Equivalence)):
            walk(ax.lhs)
            walk(ax.rhs)
        elif isinstance(ax, ConceptAssertion):
            walk(ax.concept)
    return out


def role_names(q: Query) -> set[str]:
    out: set[str] = set()

    def walk(c: ConceptExpr) -> None:
        if isinstance(c, Not):
            walk(c.inner)
        elif isinstance(c, (And, Or)):
            walk(c.left)
            walk(c.right)
        elif isinstance(c, (Exists, Forall)):
            out.add(c.role)
            walk(c.filler)

    for ax in q.ontology + (q.goal,):
        if isinstance(ax, (Subsumption, Equivalence)):
            walk(ax.lhs)
            walk(ax.rhs)
        elif isinstance(ax, ConceptAssertion):
            walk(ax.concept)
        elif isinstance(ax, RoleAssertion):
            out.add(ax.role)
    return out


def individual_names(q: Query) -> set[str]:
    out: set[str] = set()
    for ax in q.ontology + (q.goal,):
        if isinstance(ax, ConceptAssertion):
            out.add(ax.individual)
        elif isinstance(ax, RoleAssertion):
            out.add(ax.subject)
            out.add(ax.object)
    return out


def all_names(q: Query) -> set[str]:
    return concept_names(q) | role_names(q) | individual_names(q)
