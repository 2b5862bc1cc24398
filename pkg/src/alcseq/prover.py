"""Connection-method proof search over non-clausal ALC matrices.

The calculus has six rules: axiom, start, reduction, extension,
decomposition and copy, applied bottom-up to words ``C, M, Path`` where C
is the subgoal clause. Substitutions map variables to individuals or
other variables; there are no function symbols, so unification is plain
term unification with a clash check and no occurs check.

Two side conditions replace skolemization and guarantee termination:

* the column-index condition: a term may act as the witness of at most
  one column-indexed restriction (checked over the literals a branch has
  connected so far);
* the blocking condition: a clause may only be copied again if the
  concept set of its latest witness is not subsumed by the previous
  copy's witness.

``verify_connection_proof`` is an independent check of the proof by the
matrix characterization of validity: every path through the matrix (with
copied clauses applied) must contain a connection of the proof that is
complementary under its final substitution.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .matrix import (
    Address, Clause, Element, Individual, KIND_CONCEPT, Literal, Matrix,
    MatrixError, SubMatrix, Term, VAR_DELTA, Variable, clause_at,
    element_at, enumerate_path_addresses, format_address, iter_literals,
    literal_at, parse_address, parse_matrix, render_matrix, render_term,
)

Theta = dict[Variable, Term]


def resolve(term: Term, theta: Theta) -> Term:
    while isinstance(term, Variable) and term in theta:
        term = theta[term]
    return term


def _unify_terms(a: Term, b: Term, theta: Theta, trail: list[Variable]) -> bool:
    """Unify two terms. Witness variables are rigid skolem-style terms:
    they never equal an individual or a differently-introduced witness,
    and equating two copies of the same witness equates what they were
    introduced under."""
    a = resolve(a, theta)
    b = resolve(b, theta)
    if a == b:
        return True
    if isinstance(a, Individual) and isinstance(b, Individual):
        return False
    a_delta = isinstance(a, Variable) and a.kind == VAR_DELTA
    b_delta = isinstance(b, Variable) and b.kind == VAR_DELTA
    if a_delta and b_delta:
        if a.vid != b.vid:
            return False
        if (b.vid, b.copy) > (a.vid, a.copy):
            a, b = b, a
        theta[a] = b
        trail.append(a)
        if a.dep is None or b.dep is None:
            return a.dep == b.dep
        return _unify_terms(a.dep, b.dep, theta, trail)
    if a_delta or b_delta:
        if a_delta:
            a, b = b, a  # bind the plain side to the witness
        if isinstance(a, Individual):
            return False
        theta[a] = b
        trail.append(a)
        return True
    # plain variable against variable or individual
    if isinstance(a, Individual) or (
        isinstance(b, Variable) and (b.vid, b.copy) < (a.vid, a.copy)
    ):
        a, b = b, a
    assert isinstance(a, Variable)
    theta[a] = b
    trail.append(a)
    return True


def theta_unify(l1: Literal, l2: Literal, theta: Theta) -> Theta | None:
    """Extend theta so the two literals' argument lists are pairwise equal.

    Returns the extended substitution, or None when the literals cannot
    form a complementary pair (name or polarity mismatch, argument clash).
    """
    if not l1.complement_matches(l2) or len(l1.args) != len(l2.args):
        return None
    out = dict(theta)
    trail: list[Variable] = []
    for a, b in zip(l1.args, l2.args):
        if not _unify_terms(a, b, out, trail):
            return None
    return out


def terms_equal(a: Term, b: Term, theta: Theta) -> bool:
    return resolve(a, theta) == resolve(b, theta)


def complementary(l1: Literal, l2: Literal, theta: Theta) -> bool:
    if not l1.complement_matches(l2) or len(l1.args) != len(l2.args):
        return False
    return all(terms_equal(a, b, theta) for a, b in zip(l1.args, l2.args))


# --------------------------------------------------------------------------
# structural relations

def all_clause_addresses(m: Matrix) -> list[Address]:
    out: list[Address] = []

    def walk_clause(clause: Clause, addr: Address):
        out.append(addr)
        for ei, el in enumerate(clause.elements):
            if isinstance(el, SubMatrix):
                for ci, sub in enumerate(el.matrix.clauses):
                    walk_clause(sub, addr + (ei, ci))

    for i, clause in enumerate(m.clauses):
        walk_clause(clause, (i,))
    return out


def _is_prefix(p: tuple, q: tuple) -> bool:
    return len(p) <= len(q) and q[: len(p)] == p


def alpha_related(m: Matrix, clause_addr: Address, literal_addr: Address) -> bool:
    """True when some matrix of m has the clause inside clause i and the
    literal inside clause j with i != j."""
    limit = min(len(clause_addr), len(literal_addr))
    for k in range(limit):
        if clause_addr[k] != literal_addr[k]:
            return k % 2 == 0
    return False


def parent_clause(m: Matrix, clause_addr: Address) -> Address | None:
    """Address of the clause holding the sub-matrix this clause lives in."""
    if len(clause_addr) == 1:
        return None
    return clause_addr[:-2]


def is_extension_clause(m: Matrix, clause_addr: Address, path_addrs) -> bool:
    path_addrs = list(path_addrs)
    for la in path_addrs:
        if _is_prefix(clause_addr, la):
            return True
    if not all(alpha_related(m, clause_addr, la) for la in path_addrs):
        return False
    parent = parent_clause(m, clause_addr)
    if parent is not None:
        if not any(_is_prefix(parent, la) for la in path_addrs):
            return False
    return True


def extension_clauses(m: Matrix, path_addrs) -> list[Address]:
    """All clause addresses qualifying as extension clauses for the path."""
    return [a for a in all_clause_addresses(m) if is_extension_clause(m, a, path_addrs)]


def beta_clause(clause: Clause, rel_addr: tuple[int, ...]) -> Clause:
    """The clause with the literal at the relative address removed; on the
    spine toward it each sub-matrix is rebuilt in place, keeping sibling
    clauses."""
    if len(rel_addr) == 1:
        idx = rel_addr[0]
        if idx >= len(clause.elements) or not isinstance(clause.elements[idx], Literal):
            raise MatrixError(f"no literal at relative address {rel_addr}")
        els = clause.elements[:idx] + clause.elements[idx + 1:]
        return Clause(els, clause.copy_index, clause.origin)
    e_idx, c_idx, *rest = rel_addr
    el = clause.elements[e_idx]
    if not isinstance(el, SubMatrix):
        raise MatrixError(f"relative address {rel_addr} does not enter a sub-matrix")
    inner = beta_clause(el.matrix.clauses[c_idx], tuple(rest))
    new_clauses = el.matrix.clauses[:c_idx] + (inner,) + el.matrix.clauses[c_idx + 1:]
    new_el = SubMatrix(Matrix(new_clauses, el.matrix.goal_indices), el.underlined, el.col_index)
    els = clause.elements[:e_idx] + (new_el,) + clause.elements[e_idx + 1:]
    return Clause(els, clause.copy_index, clause.origin)


def beta_clause_of_literal(clause: Clause, lit: Literal) -> Clause:
    """Convenience wrapper: remove the first occurrence of lit."""
    for rel, found in _clause_literals_rel(clause):
        if found == lit:
            return beta_clause(clause, rel)
    raise MatrixError("literal does not occur in the clause")


def _clause_literals_rel(clause: Clause, prefix: tuple[int, ...] = ()):
    for ei, el in enumerate(clause.elements):
        if isinstance(el, Literal):
            yield prefix + (ei,), el
        else:
            for ci, sub in enumerate(el.matrix.clauses):
                yield from _clause_literals_rel(sub, prefix + (ei, ci))


# --------------------------------------------------------------------------
# proofs

@dataclass(frozen=True)
class ConnectionProof:
    """The matrix proof: copy counts, final substitution, connection set
    (deduplicated, in discovery order) and the full rule trace."""

    matrix: Matrix
    mu: dict[int, int]
    copies: tuple[tuple[int, int, int], ...]  # (origin clause, copy index, new top index)
    substitutions: Theta
    connections: tuple[tuple[Address, Address], ...]
    trace: tuple[str, ...]


@dataclass(frozen=True)
class ProveFailure:
    reason: str  # "exhausted" or "limit"


@dataclass
class _Limits:
    max_copies: int = 3
    max_depth: int = 50
    node_budget: int = 200_000


def _rename_term(t: Term, copy_index: int) -> Term:
    if isinstance(t, Variable):
        dep = _rename_term(t.dep, copy_index) if t.dep is not None else None
        return Variable(t.vid, copy_index, t.kind, dep)
    return t


def _rename_clause(clause: Clause, copy_index: int) -> Clause:
    def rename_el(el: Element) -> Element:
        if isinstance(el, Literal):
            args = tuple(_rename_term(a, copy_index) for a in el.args)
            return replace(el, args=args)
        return SubMatrix(
            Matrix(tuple(_rename_clause(c, copy_index) for c in el.matrix.clauses)),
            el.underlined,
            el.col_index,
        )

    return Clause(tuple(rename_el(e) for e in clause.elements), copy_index, clause.origin)


@dataclass(frozen=True)
class _LitGoal:
    addr: Address


@dataclass(frozen=True)
class _SubGoal:
    addr: Address                  # element address of the sub-matrix
    removed: Address | None = None  # connected-away literal inside it
    preferred_done: bool = False


class _Budget(Exception):
    pass


class _Search:
    def __init__(self, m: Matrix, limits: _Limits, copy_budget: int):
        self.original = m
        self.clauses: list[Clause] = list(m.clauses)
        self.goal_indices = sorted(m.goal_indices)
        self.limits = limits
        self.copy_budget = copy_budget
        self.theta: Theta = {}
        self.trail: list[Variable] = []
        self.touched: list[Literal] = []
        self.trace: list[str] = []
        self.connections: list[tuple[Address, Address]] = []
        self.copies: list[tuple[int, int, int]] = []
        self.copy_counts: dict[int, int] = {}
        self.nodes = 0
        self.depth_hit = False
        self.copy_blocked = False
        self._occ_cache: list[list] = []

    # -- live-matrix accessors -------------------------------------------
    def live_matrix(self) -> Matrix:
        return Matrix(tuple(self.clauses), self.original.goal_indices)

    def clause(self, addr: Address) -> Clause:
        clause = self.clauses[addr[0]]
        rest = addr[1:]
        while rest:
            clause = clause.elements[rest[0]].matrix.clauses[rest[1]]
            rest = rest[2:]
        return clause

    def element(self, addr: Address) -> Element:
        return self.clause(addr[:-1]).elements[addr[-1]]

    def literal(self, addr: Address) -> Literal:
        el = self.element(addr)
        assert isinstance(el, Literal)
        return el

    # -- bookkeeping with undo ---------------------------------------------
    def mark(self):
        return (len(self.trail), len(self.touched), len(self.trace),
                len(self.connections), len(self.copies))

    def rollback(self, mark):
        n_trail, n_touched, n_trace, n_conn, n_copies = mark
        while len(self.trail) > n_trail:
            del self.theta[self.trail.pop()]
        del self.touched[n_touched:]
        del self.trace[n_trace:]
        del self.connections[n_conn:]
        while len(self.copies) > n_copies:
            origin, _, idx = self.copies.pop()
            self.copy_counts[origin] -= 1
            del self.clauses[idx]

    # -- side conditions -----------------------------------------------------
    def skolem_ok(self) -> bool:
        groups: dict[Term, set[int]] = {}
        for lit in self.touched:
            if lit.kind == KIND_CONCEPT and lit.col_index is not None and lit.args:
                rep = resolve(lit.args[0], self.theta)
                cols = groups.setdefault(rep, set())
                cols.add(lit.col_index)
                if len(cols) > 1:
                    return False
        return True

    def concept_set(self, term: Term) -> set[str]:
        rep = resolve(term, self.theta)
        out = set()
        for lit in self.touched:
            if lit.kind == KIND_CONCEPT and lit.args:
                if resolve(lit.args[0], self.theta) == rep:
                    out.add(lit.name)
        return out

    def blocking_ok(self, origin: int, new_mu: int) -> bool:
        if new_mu < 2:
            return True
        delta_vars = sorted(
            {(a.vid, a.kind) for _, lit in _clause_literals_rel(self.original.clauses[origin])
             for a in lit.args if isinstance(a, Variable) and a.kind == VAR_DELTA}
        )
        for vid, kind in delta_vars:
            prev = self.concept_set(Variable(vid, new_mu - 1, kind))
            before = self.concept_set(Variable(vid, new_mu - 2, kind))
            if prev <= before:
                return False
        return True

    # -- unification ---------------------------------------------------------
    def try_connect(self, l1: Literal, l2: Literal) -> tuple | None:
        if not l1.complement_matches(l2) or len(l1.args) != len(l2.args):
            return None
        mark = self.mark()
        n_trail = len(self.trail)
        for a, b in zip(l1.args, l2.args):
            if not _unify_terms(a, b, self.theta, self.trail):
                self.rollback(mark)
                return None
        self.touched.append(l1)
        self.touched.append(l2)
        if not self.skolem_ok():
            self.rollback(mark)
            return None
        new_bindings = self.trail[n_trail:]
        return mark, new_bindings

    def render_bindings(self, new_vars) -> str:
        parts = [
            f"{render_term(v)}={render_term(resolve(v, self.theta))}"
            for v in sorted(new_vars, key=lambda v: (v.vid, v.copy))
        ]
        return "{" + ", ".join(parts) + "}"

    # -- goal item construction -----------------------------------------------
    def clause_items(self, clause_addr: Address, removed: Address | None) -> list:
        clause = self.clause(clause_addr)
        items = []
        for ei, el in enumerate(clause.elements):
            addr = clause_addr + (ei,)
            if isinstance(el, Literal):
                if removed is not None and addr == removed:
                    continue
                items.append(_LitGoal(addr))
            else:
                inner = removed if removed is not None and _is_prefix(addr, removed) else None
                items.append(_SubGoal(addr, inner))
        return items

    # -- candidate enumeration --------------------------------------------------
    def literal_occurrences(self):
        while len(self._occ_cache) < len(self.clauses):
            ci = len(self._occ_cache)
            self._occ_cache.append(list(_addressed_literals(self.clauses[ci], (ci,))))
        for ci in range(len(self.clauses)):
            yield from self._occ_cache[ci]

    def candidate_clauses(self, l2_addr: Address, path_addrs: list[Address]) -> list[Address]:
        """Qualifying extension clauses among the ancestors of l2, deepest
        first, so the search enters the smallest admissible clause."""
        ancestors = [l2_addr[:k] for k in range(len(l2_addr) - 1, 0, -2)]
        return [a for a in ancestors if is_extension_clause(self.original, a, path_addrs)]

    # -- the search -------------------------------------------------------------
    def solve(self, branches: list, depth: int) -> bool:
        self.nodes += 1
        if self.nodes > self.limits.node_budget:
            raise _Budget()
        if not branches:
            return True
        items, path = branches[0]
        if not items:
            self.trace.append("AXIOM")
            if self.solve(branches[1:], depth):
                return True
            self.trace.pop()
            return False
        if depth >= self.limits.max_depth:
            self.depth_hit = True
            return False
        head, rest = items[0], items[1:]
        if isinstance(head, _SubGoal):
            return self.solve_decomposition(head, rest, path, branches, depth)
        return self.solve_literal(head, rest, path, branches, depth)

    def solve_decomposition(self, head: _SubGoal, rest, path, branches, depth) -> bool:
        el = self.element(head.addr)
        assert isinstance(el, SubMatrix)
        order = list(range(len(el.matrix.clauses)))
        if head.removed is not None:
            spine = head.removed[len(head.addr)]
            order.remove(spine)
            order.insert(0, spine)
        for ci in order:
            clause_addr = head.addr + (ci,)
            removed = head.removed if head.removed is not None and _is_prefix(clause_addr, head.removed) else None
            mark = self.mark()
            self.trace.append(f"DEC {format_address(head.addr)} -> {format_address(clause_addr)}")
            new_items = self.clause_items(clause_addr, removed) + rest
            if self.solve([(new_items, path)] + branches[1:], depth + 1):
                return True
            self.rollback(mark)
        return False

    def solve_literal(self, head: _LitGoal, rest, path, branches, depth) -> bool:
        l1 = self.literal(head.addr)
        # reduction: close against a path literal
        for p_addr in path:
            l2 = self.literal(p_addr)
            attempt = self.try_connect(l1, l2)
            if attempt is None:
                continue
            mark, new_bindings = attempt
            self.connections.append((head.addr, p_addr))
            self.trace.append(
                f"RED {format_address(head.addr)} {format_address(p_addr)} "
                f"{self.render_bindings(new_bindings)}"
            )
            if self.solve([(rest, path)] + branches[1:], depth + 1):
                return True
            self.rollback(mark)
        # extension into an existing clause
        path_with_l1 = path + [head.addr]
        for l2_addr, l2 in list(self.literal_occurrences()):
            if not l1.complement_matches(l2):
                continue
            for c_addr in self.candidate_clauses(l2_addr, path_with_l1):
                attempt = self.try_connect(l1, l2)
                if attempt is None:
                    break
                mark, new_bindings = attempt
                self.connections.append((head.addr, l2_addr))
                self.trace.append(
                    f"EXT {format_address(head.addr)} {format_address(l2_addr)} "
                    f"via={format_address(c_addr)} {self.render_bindings(new_bindings)}"
                )
                new_items = self.clause_items(c_addr, l2_addr)
                new_branch = (new_items, path_with_l1)
                if self.solve([new_branch, (rest, path)] + branches[1:], depth + 1):
                    return True
                self.rollback(mark)
        # copy an ontology clause, then extend into the copy
        copy_origins = [
            origin
            for origin in range(len(self.original.clauses))
            if origin not in self.original.goal_indices
            and any(
                l1.complement_matches(lit)
                for _, lit in _clause_literals_rel(self.original.clauses[origin])
            )
        ]
        if copy_origins and len(self.copies) >= self.copy_budget:
            self.copy_blocked = True
        elif copy_origins:
            for origin in copy_origins:
                new_mu = self.copy_counts.get(origin, 0) + 1
                if not self.blocking_ok(origin, new_mu):
                    continue
                mark = self.mark()
                new_idx = len(self.clauses)
                self.clauses.append(_rename_clause(self.original.clauses[origin], new_mu))
                self.copies.append((origin, new_mu, new_idx))
                self.copy_counts[origin] = new_mu
                self.trace.append(f"COPY {origin} mu={new_mu} as={new_idx}")
                for l2_addr, l2 in _addressed_literals(self.clauses[new_idx], (new_idx,)):
                    if not l1.complement_matches(l2):
                        continue
                    for c_addr in self.candidate_clauses(l2_addr, path_with_l1):
                        attempt = self.try_connect(l1, l2)
                        if attempt is None:
                            break
                        inner_mark, new_bindings = attempt
                        self.connections.append((head.addr, l2_addr))
                        self.trace.append(
                            f"EXT {format_address(head.addr)} {format_address(l2_addr)} "
                            f"via={format_address(c_addr)} {self.render_bindings(new_bindings)}"
                        )
                        new_items = self.clause_items(c_addr, l2_addr)
                        if self.solve([(new_items, path_with_l1), (rest, path)] + branches[1:], depth + 1):
                            return True
                        self.rollback(inner_mark)
                self.rollback(mark)
        return False

    def run(self) -> ConnectionProof | None:
        for start in self.start_clauses():
            mark = self.mark()
            self.trace.append(f"START {start}")
            items = self.clause_items((start,), None)
            try:
                if self.solve([(items, [])], 0):
                    return self.finish()
            except _Budget:
                self.depth_hit = True
                return None
            self.rollback(mark)
        return None

    def start_clauses(self) -> list[int]:
        def all_positive(ci: int) -> bool:
            return all(lit.polarity == 0 for _, lit in _clause_literals_rel(self.clauses[ci]))

        positive = [ci for ci in self.goal_indices if all_positive(ci)]
        other = [ci for ci in self.goal_indices if ci not in positive]
        return positive + other

    def finish(self) -> ConnectionProof:
        goal_individual = None
        for gi in self.goal_indices:
            for _, lit in _clause_literals_rel(self.original.clauses[gi]):
                for a in lit.args:
                    if isinstance(a, Individual):
                        goal_individual = a
                        break
        if goal_individual is None:
            goal_individual = Individual("a")
        # ground leftover non-witness variable classes so every class has a
        # representative expressible in the position substitutions
        live = self.live_matrix()
        for a1, a2 in self.connections:
            for addr in (a1, a2):
                for t in literal_at(live, addr).args:
                    rep = resolve(t, self.theta)
                    if isinstance(rep, Variable) and rep.kind != VAR_DELTA:
                        self.theta[rep] = goal_individual
                        self.trail.append(rep)
        final_theta = {v: resolve(v, self.theta) for v in self.theta}
        theta_line = ", ".join(
            f"{render_term(v)}={render_term(t)}"
            for v, t in sorted(final_theta.items(), key=lambda kv: (kv[0].vid, kv[0].copy))
        )
        self.trace.append("THETA {" + theta_line + "}")
        seen = set()
        conns = []
        for a1, a2 in self.connections:
            key = (min(a1, a2), max(a1, a2))
            if key not in seen:
                seen.add(key)
                conns.append((a1, a2))
        return ConnectionProof(
            matrix=self.original,
            mu=dict(self.copy_counts),
            copies=tuple(self.copies),
            substitutions=final_theta,
            connections=tuple(conns),
            trace=tuple(self.trace),
        )


def _addressed_literals(clause: Clause, prefix: Address):
    for rel, lit in _clause_literals_rel(clause):
        yield prefix + rel, lit


def prove(
    m: Matrix,
    max_copies: int = 3,
    max_depth: int = 50,
    node_budget: int = 200_000,
) -> ConnectionProof | ProveFailure:
    """Iterative deepening on the number of clause copies. Returns the
    proof, or a failure stating whether the space was exhausted under the
    copy limit or a resource bound was hit."""
    limits = _Limits(max_copies, max_depth, node_budget)
    depth_hit = False
    for budget in range(max_copies + 1):
        search = _Search(m, limits, budget)
        proof = search.run()
        if proof is not None:
            return proof
        depth_hit = depth_hit or search.depth_hit
        if not search.copy_blocked and not search.depth_hit:
            break  # more copies cannot help: the space closed without hitting the cap
    return ProveFailure("limit" if depth_hit else "exhausted")


# --------------------------------------------------------------------------
# independent verification (matrix characterization)

def materialize(m: Matrix, copies) -> Matrix:
    clauses = list(m.clauses)
    for origin, mu, idx in copies:
        if idx != len(clauses):
            raise MatrixError("copy indices out of order")
        clauses.append(_rename_clause(m.clauses[origin], mu))
    return Matrix(tuple(clauses), m.goal_indices)


def verify_connection_proof(m: Matrix, proof: ConnectionProof) -> tuple[bool, frozenset | None]:
    """Check the matrix characterization: every path through the matrix
    with the proof's copies contains a connection from the proof that is
    complementary under its substitution. Returns (ok, witness) where the
    witness is the first uncovered path."""
    grown = materialize(m, proof.copies)
    conns = []
    for a1, a2 in proof.connections:
        l1 = literal_at(grown, a1)
        l2 = literal_at(grown, a2)
        if not complementary(l1, l2, proof.substitutions):
            return False, frozenset([a1, a2])
        conns.append((a1, a2))
    for path in enumerate_path_addresses(grown):
        if not any(a1 in path and a2 in path for a1, a2 in conns):
            return False, path
    return True, None
