"""Non-clausal ALC matrices.

A matrix is a set of clauses; a clause is a conjunction of literals and
sub-matrices. Polarity 0 is positive, polarity 1 negative. Literals and
sub-matrices produced by a universal or existential restriction are
underlined; when the restriction spans more than one clause its members
additionally share a fresh column index.

Construction works on the entailment problem ``ontology |= goal``: the
ontology contributes polarity-1 clauses, the goal polarity-0 clauses. A
goal subsumption is instantiated at a fresh individual, mirroring the
eigenvariable reading of the implicitly quantified goal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Iterator, Union

from . import syntax
from .syntax import (
    And, Atomic, Bottom, ConceptAssertion, ConceptExpr, Exists, Forall, Not,
    Or, Query, RoleAssertion, Subsumption, Top,
)


class MatrixError(Exception):
    pass


class UnsupportedConstructError(MatrixError):
    """Raised for constructs the matrix translation does not cover (top/bot)."""


# --------------------------------------------------------------------------
# terms

@dataclass(frozen=True)
class Individual:
    name: str

    def __repr__(self):
        return f"Individual({self.name})"


VAR_SUBJECT = "subject"   # implicit variable of an ontology axiom
VAR_GAMMA = "gamma"       # variable of a single-clause restriction
VAR_DELTA = "delta"       # witness variable of a column-indexed restriction


@dataclass(frozen=True)
class Variable:
    vid: int
    copy: int = 0
    kind: str = VAR_GAMMA
    # witness variables behave like skolem terms over the term they were
    # introduced under; dep records that term
    dep: "Term | None" = None

    def __repr__(self):
        suffix = f".{self.copy}" if self.copy else ""
        return f"v{self.vid}{suffix}"


Term = Union[Individual, Variable]


def render_term(t: Term) -> str:
    if isinstance(t, Individual):
        return t.name
    return f"v{t.vid}" + (f"_{t.copy}" if t.copy else "")


# --------------------------------------------------------------------------
# matrix structure

KIND_CONCEPT = "concept"
KIND_ROLE = "role"


@dataclass(frozen=True)
class Literal:
    name: str
    polarity: int
    args: tuple[Term, ...]
    kind: str = KIND_CONCEPT
    underlined: bool = False
    col_index: int | None = None
    position: str | None = None  # formula-tree leaf, filled in by the converter

    def complement_matches(self, other: "Literal") -> bool:
        return self.name == other.name and self.polarity != other.polarity


@dataclass(frozen=True)
class SubMatrix:
    matrix: "Matrix"
    underlined: bool = False
    col_index: int | None = None


Element = Union[Literal, SubMatrix]


@dataclass(frozen=True)
class Clause:
    elements: tuple[Element, ...]
    copy_index: int = 0
    origin: int | None = None  # top-level index of the clause this copies


@dataclass(frozen=True)
class Matrix:
    clauses: tuple[Clause, ...]
    goal_indices: frozenset[int] = frozenset()


Address = tuple[int, ...]


def format_address(addr: Address) -> str:
    return ".".join(str(i) for i in addr)


def parse_address(text: str) -> Address:
    return tuple(int(p) for p in text.split("."))


def iter_literals(m: Matrix) -> Iterator[tuple[Address, Literal]]:
    """All literal occurrences in document order, with their addresses.

    An address alternates clause and element indices from the top level
    down: ``(i, j)`` is element j of top-level clause i, ``(i, j, k, l)``
    element l of clause k of the sub-matrix at ``(i, j)``.
    """
    for ci, clause in enumerate(m.clauses):
        yield from _iter_clause_literals(clause, (ci,))


def _iter_clause_literals(clause: Clause, prefix: Address) -> Iterator[tuple[Address, Literal]]:
    for ei, el in enumerate(clause.elements):
        if isinstance(el, Literal):
            yield prefix + (ei,), el
        else:
            for ci, sub in enumerate(el.matrix.clauses):
                yield from _iter_clause_literals(sub, prefix + (ei, ci))


def clause_at(m: Matrix, addr: Address) -> Clause:
    if len(addr) % 2 != 1:
        raise MatrixError(f"not a clause address: {addr}")
    clause = m.clauses[addr[0]]
    rest = addr[1:]
    while rest:
        el = clause.elements[rest[0]]
        if not isinstance(el, SubMatrix):
            raise MatrixError(f"address {addr} does not lead through a sub-matrix")
        clause = el.matrix.clauses[rest[1]]
        rest = rest[2:]
    return clause


def element_at(m: Matrix, addr: Address) -> Element:
    clause = clause_at(m, addr[:-1])
    return clause.elements[addr[-1]]


def literal_at(m: Matrix, addr: Address) -> Literal:
    el = element_at(m, addr)
    if not isinstance(el, Literal):
        raise MatrixError(f"no literal at {addr}")
    return el


def clause_literals(clause: Clause) -> Iterator[tuple[Address, Literal]]:
    yield from _iter_clause_literals(clause, ())


# --------------------------------------------------------------------------
# construction

class _Allocator:
    def __init__(self):
        self.next_var = 0
        self.next_col = 0

    def var(self, kind: str, dep: Term | None = None) -> Variable:
        v = Variable(self.next_var, 0, kind, dep)
        self.next_var += 1
        return v

    def col(self) -> int:
        self.next_col += 1
        return self.next_col


def fresh_goal_individual(q: Query) -> str:
    """A name not used anywhere in the query, preferring single letters."""
    used = syntax.all_names(q)
    for base in "abcdefghijklmnopqrstuvwxyz":
        if base not in used:
            return base
    i = 0
    while f"a{i}" in used:
        i += 1
    return f"a{i}"


def _concept_matrix(c: ConceptExpr, polarity: int, subject: Term, alloc: _Allocator) -> Matrix:
    """Raw translation of a polarized concept at a subject term."""
    if isinstance(c, (Top, Bottom)):
        raise UnsupportedConstructError(
            "top/bot cannot be translated into a matrix; rewrite the query without them"
        )
    if isinstance(c, Atomic):
        lit = Literal(c.name, polarity, (subject,), KIND_CONCEPT)
        return Matrix((Clause((lit,)),))
    if isinstance(c, Not):
        return _concept_matrix(c.inner, 1 - polarity, subject, alloc)
    if isinstance(c, (And, Or)):
        left = _concept_matrix(c.left, polarity, subject, alloc)
        right = _concept_matrix(c.right, polarity, subject, alloc)
        one_clause = (isinstance(c, And) and polarity == 0) or (isinstance(c, Or) and polarity == 1)
        if one_clause:
            return Matrix((Clause((SubMatrix(left), SubMatrix(right))),))
        return Matrix((Clause((SubMatrix(left),)), Clause((SubMatrix(right),))))
    if isinstance(c, (Exists, Forall)):
        # single-clause restriction keeps polarity on the role positive;
        # a two-clause restriction flips it and shares a fresh column index
        two_clause = (isinstance(c, Forall) and polarity == 0) or (isinstance(c, Exists) and polarity == 1)
        if two_clause:
            obj = alloc.var(VAR_DELTA, dep=subject)
            col = alloc.col()
            role = Literal(c.role, 1, (subject, obj), KIND_ROLE)
            filler = _concept_matrix(c.filler, polarity, obj, alloc)
            return Matrix((
                Clause((SubMatrix(Matrix((Clause((role,)),)), True, col),)),
                Clause((SubMatrix(filler, True, col),)),
            ))
        obj = alloc.var(VAR_GAMMA)
        role = Literal(c.role, 0, (subject, obj), KIND_ROLE)
        filler = _concept_matrix(c.filler, polarity, obj, alloc)
        return Matrix((
            Clause((
                SubMatrix(Matrix((Clause((role,)),)), True, None),
                SubMatrix(filler, True, None),
            )),
        ))
    raise TypeError(f"not a concept: {c!r}")


def build_matrix(q: Query) -> Matrix:
    """Translate a query into its (simplified) non-clausal matrix.

    Ontology axioms land in polarity-1 clauses, the goal in polarity-0
    clauses; ``goal_indices`` records which top-level clauses came from
    the goal.
    """
    alloc = _Allocator()
    ontology_clauses: list[Clause] = []
    for ax in q.expanded_ontology():
        if isinstance(ax, Subsumption):
            subject = alloc.var(VAR_SUBJECT)
            lhs = _concept_matrix(ax.lhs, 0, subject, alloc)
            rhs = _concept_matrix(ax.rhs, 1, subject, alloc)
            raw = Matrix((Clause((SubMatrix(lhs), SubMatrix(rhs))),))
        elif isinstance(ax, ConceptAssertion):
            raw = _concept_matrix(ax.concept, 1, Individual(ax.individual), alloc)
        elif isinstance(ax, RoleAssertion):
            lit = Literal(ax.role, 1, (Individual(ax.subject), Individual(ax.object)), KIND_ROLE)
            raw = Matrix((Clause((lit,)),))
        else:
            raise MatrixError(f"unexpanded axiom: {ax!r}")
        ontology_clauses.extend(simplify(raw).clauses)

    goal = q.goal
    if isinstance(goal, Subsumption):
        inst = Individual(fresh_goal_individual(q))
        lhs = _concept_matrix(goal.lhs, 1, inst, alloc)
        rhs = _concept_matrix(goal.rhs, 0, inst, alloc)
        raw = Matrix((Clause((SubMatrix(lhs),)), Clause((SubMatrix(rhs),))))
    elif isinstance(goal, ConceptAssertion):
        raw = _concept_matrix(goal.concept, 0, Individual(goal.individual), alloc)
    else:
        raise MatrixError(f"unsupported goal: {goal!r}")
    goal_clauses = list(simplify(raw).clauses)

    clauses = tuple(ontology_clauses + goal_clauses)
    goal_indices = frozenset(range(len(ontology_clauses), len(clauses)))
    return Matrix(clauses, goal_indices)


# --------------------------------------------------------------------------
# simplification

def _inherit(el: Element, underlined: bool, col: int | None) -> Element:
    if not underlined and col is None:
        return el
    new_col = el.col_index if el.col_index is not None else col
    return replace(el, underlined=el.underlined or underlined, col_index=new_col)


def _simplify_clause(clause: Clause) -> tuple[Clause, bool]:
    changed = False
    elements: list[Element] = []
    for el in clause.elements:
        if isinstance(el, SubMatrix):
            inner, inner_changed = _simplify_matrix(el.matrix)
            changed = changed or inner_changed
            if len(inner.clauses) == 1:
                # a one-clause sub-matrix is a conjunction: splice its
                # elements, passing restriction marks down
                for sub_el in inner.clauses[0].elements:
                    elements.append(_inherit(sub_el, el.underlined, el.col_index))
                changed = True
                continue
            elements.append(SubMatrix(inner, el.underlined, el.col_index))
        else:
            elements.append(el)
    return Clause(tuple(elements), clause.copy_index, clause.origin), changed


def _simplify_matrix(m: Matrix) -> tuple[Matrix, bool]:
    changed = False
    clauses: list[Clause] = []
    for clause in m.clauses:
        simped, c_changed = _simplify_clause(clause)
        changed = changed or c_changed
        if len(simped.elements) == 1 and isinstance(simped.elements[0], SubMatrix):
            el = simped.elements[0]
            # a singleton clause holding a sub-matrix is that disjunction:
            # splice its clauses into the enclosing matrix
            for sub_clause in el.matrix.clauses:
                if el.underlined or el.col_index is not None:
                    lifted = Clause(
                        tuple(_inherit(e, el.underlined, el.col_index) for e in sub_clause.elements),
                        sub_clause.copy_index,
                        sub_clause.origin,
                    )
                else:
                    lifted = sub_clause
                clauses.append(lifted)
            changed = True
            continue
        clauses.append(simped)
    return Matrix(tuple(clauses), m.goal_indices), changed


def simplify(m: Matrix) -> Matrix:
    """Flatten matrix-in-matrix and clause-in-clause nesting to a fixed point."""
    changed = True
    while changed:
        m, changed = _simplify_matrix(m)
    return m


# --------------------------------------------------------------------------
# paths

def _paths_through_element(el: Element) -> Iterator[frozenset]:
    if isinstance(el, Literal):
        yield frozenset([el])
    else:
        yield from _paths_through_matrix(el.matrix)


def _paths_through_clause(clause: Clause) -> Iterator[frozenset]:
    for el in clause.elements:
        yield from _paths_through_element(el)


def _paths_through_matrix(m: Matrix) -> Iterator[frozenset]:
    per_clause = [list(_paths_through_clause(c)) for c in m.clauses]
    for combo in product(*per_clause):
        merged: frozenset = frozenset()
        for part in combo:
            merged = merged | part
        yield merged


def enumerate_paths(m: Matrix) -> Iterator[frozenset]:
    """Yield every path: one literal per clause, recursively one clause
    choice per sub-matrix element. Literals are the frozen occurrence
    objects of the matrix."""
    yield from _paths_through_matrix(m)


def enumerate_path_addresses(m: Matrix) -> Iterator[frozenset]:
    """Like enumerate_paths but yields frozensets of addresses; address
    identity distinguishes equal literals at different occurrences."""

    def element(addr: Address, el: Element) -> Iterator[frozenset]:
        if isinstance(el, Literal):
            yield frozenset([addr])
        else:
            yield from matrix_paths(el.matrix, addr)

    def clause_paths(clause: Clause, prefix: Address) -> Iterator[frozenset]:
        for ei, el in enumerate(clause.elements):
            yield from element(prefix + (ei,), el)

    def matrix_paths(m_: Matrix, prefix: Address) -> Iterator[frozenset]:
        per_clause = [list(clause_paths(c, prefix + (ci,))) for ci, c in enumerate(m_.clauses)]
        for combo in product(*per_clause):
            merged: frozenset = frozenset()
            for part in combo:
                merged = merged | part
            yield merged

    yield from matrix_paths(m, ())


def count_paths(m: Matrix) -> int:
    def clause_count(clause: Clause) -> int:
        return sum(element_count(el) for el in clause.elements)

    def element_count(el: Element) -> int:
        if isinstance(el, Literal):
            return 1
        return matrix_count(el.matrix)

    def matrix_count(m_: Matrix) -> int:
        total = 1
        for c in m_.clauses:
            total *= clause_count(c)
        return total

    return matrix_count(m)


# --------------------------------------------------------------------------
# rendering

def _literal_args_shown(lit: Literal) -> bool:
    return any(isinstance(a, Individual) for a in lit.args)


def render_literal(lit: Literal, style: str = "linear") -> str:
    args = ""
    if _literal_args_shown(lit):
        args = "(" + ",".join(render_term(a) for a in lit.args) + ")"
    text = f"{lit.name}{args}^{lit.polarity}"
    if style == "linear":
        if lit.col_index is not None:
            text += f"@{lit.col_index}"
        if lit.underlined:
            text = "_" + text
    else:
        if lit.col_index is not None:
            text += f"_{lit.col_index}"
        elif lit.underlined:
            text += "|"
    return text


def _render_element_linear(el: Element) -> str:
    if isinstance(el, Literal):
        return render_literal(el, "linear")
    inner = _render_matrix_linear(el.matrix)
    if el.col_index is not None:
        inner += f"@{el.col_index}"
    if el.underlined:
        inner = "_" + inner
    return inner


def _render_matrix_linear(m: Matrix) -> str:
    parts = []
    for clause in m.clauses:
        parts.append("{" + ", ".join(_render_element_linear(el) for el in clause.elements) + "}")
    return "{" + ", ".join(parts) + "}"


def _box_side_by_side(boxes: list[list[str]], gap: str = " ") -> list[str]:
    height = max(len(b) for b in boxes)
    widths = [max(len(line) for line in b) for b in boxes]
    padded = [
        [line.ljust(w) for line in b] + [" " * w] * (height - len(b))
        for b, w in zip(boxes, widths)
    ]
    return [gap.join(parts[i] for parts in padded) for i in range(height)]


def _element_box(el: Element) -> list[str]:
    if isinstance(el, Literal):
        return [render_literal(el, "graphical")]
    return _matrix_box(el.matrix)


def _clause_box(clause: Clause) -> list[str]:
    lines: list[str] = []
    for el in clause.elements:
        lines.extend(_element_box(el))
    width = max(len(l) for l in lines)
    return ["[ " + l.ljust(width) + " ]" for l in lines]


def _matrix_box(m: Matrix) -> list[str]:
    boxes = [_clause_box(c) for c in m.clauses]
    return _box_side_by_side(boxes)


def render_matrix(m: Matrix, style: str = "linear") -> str:
    """Render a matrix. Linear style is the machine interchange format;
    graphical style arranges clauses as bracketed columns with ``|`` for
    in-clause restrictions and ``_k`` for column-indexed ones."""
    if style == "linear":
        return _render_matrix_linear(m)
    if style == "graphical":
        return "\n".join(_matrix_box(m))
    raise ValueError(f"unknown style {style!r}")


# --------------------------------------------------------------------------
# linear format parsing (interchange between prove and convert)

_LIT_RE = re.compile(
    r"(?P<u>_)?(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"(?:\((?P<args>[^)]*)\))?"
    r"\^(?P<pol>[01])"
    r"(?:@(?P<col>\d+))?"
)


class _MatrixReader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n,":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        self.skip_ws()
        if self.peek() != ch:
            raise MatrixError(f"expected {ch!r} at offset {self.pos} in matrix text")
        self.pos += 1

    def parse_matrix(self) -> Matrix:
        self.expect("{")
        clauses = []
        while self.peek() != "}":
            clauses.append(self.parse_clause())
        self.expect("}")
        return Matrix(tuple(clauses))

    def parse_clause(self) -> Clause:
        self.expect("{")
        elements: list[Element] = []
        while self.peek() != "}":
            elements.append(self.parse_element())
        self.expect("}")
        return Clause(tuple(elements))

    def parse_element(self) -> Element:
        self.skip_ws()
        underlined = False
        if self.text[self.pos] == "_":
            underlined = True
            self.pos += 1
        if self.peek() == "{":
            inner = self.parse_matrix()
            col = None
            if self.pos < len(self.text) and self.text[self.pos] == "@":
                self.pos += 1
                m = re.match(r"\d+", self.text[self.pos:])
                col = int(m.group(0))
                self.pos += len(m.group(0))
            return SubMatrix(inner, underlined, col)
        m = _LIT_RE.match(self.text, self.pos)
        if not m:
            raise MatrixError(f"bad literal at offset {self.pos} in matrix text")
        self.pos = m.end()
        args: tuple[Term, ...] = ()
        kind = KIND_CONCEPT
        if m.group("args"):
            parts = [a.strip() for a in m.group("args").split(",")]
            args = tuple(self._parse_term(p) for p in parts)
            kind = KIND_ROLE if len(args) == 2 else KIND_CONCEPT
        return Literal(
            m.group("name"),
            int(m.group("pol")),
            args,
            kind,
            underlined or m.group("u") is not None,
            int(m.group("col")) if m.group("col") else None,
        )

    @staticmethod
    def _parse_term(text: str) -> Term:
        vm = re.fullmatch(r"v(\d+)(?:_(\d+))?", text)
        if vm:
            return Variable(int(vm.group(1)), int(vm.group(2) or 0))
        return Individual(text)


def parse_matrix(text: str) -> Matrix:
    """Parse the linear matrix serialization back into a Matrix.

    Implicit (suppressed) variables of ontology clauses are re-minted
    deterministically in document order, so a rendered matrix parses to a
    structurally equivalent one; arities of argument-less literals are
    unknown and left empty.
    """
    reader = _MatrixReader(text)
    m = reader.parse_matrix()
    reader.skip_ws()
    if reader.pos != len(reader.text):
        raise MatrixError("trailing characters after matrix")
    return m
