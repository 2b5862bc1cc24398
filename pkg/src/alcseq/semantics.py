"""Finite-model semantics for ALC queries: a brute-force entailment oracle.

Interpretations over a domain of size n are enumerated exhaustively:
concepts as subsets (bitmasks), roles as per-element successor masks,
individuals mapped injectively. The oracle searches for a model of the
ontology that violates the goal. It is deliberately independent of the
matrix and proof machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product

from . import syntax
from .syntax import (
    And, Atomic, Bottom, ConceptAssertion, ConceptExpr, Equivalence, Exists,
    Forall, Not, OntologyAxiom, Or, Query, RoleAssertion, Subsumption, Top,
)


@dataclass
class Interpretation:
    size: int
    concepts: dict[str, int]
    roles: dict[str, tuple[int, ...]]
    individuals: dict[str, int]

    def describe(self) -> str:
        def mask(m: int) -> str:
            return "{" + ",".join(str(d) for d in range(self.size) if m >> d & 1) + "}"

        parts = [f"domain size {self.size}"]
        for name in sorted(self.concepts):
            parts.append(f"{name}={mask(self.concepts[name])}")
        for name in sorted(self.roles):
            pairs = [
                f"({d},{e})"
                for d in range(self.size)
                for e in range(self.size)
                if self.roles[name][d] >> e & 1
            ]
            parts.append(f"{name}={{{','.join(pairs)}}}")
        for name in sorted(self.individuals):
            parts.append(f"{name}->{self.individuals[name]}")
        return " ".join(parts)


def eval_concept(c: ConceptExpr, interp: Interpretation) -> int:
    full = (1 << interp.size) - 1
    if isinstance(c, Top):
        return full
    if isinstance(c, Bottom):
        return 0
    if isinstance(c, Atomic):
        return interp.concepts[c.name]
    if isinstance(c, Not):
        return full & ~eval_concept(c.inner, interp)
    if isinstance(c, And):
        return eval_concept(c.left, interp) & eval_concept(c.right, interp)
    if isinstance(c, Or):
        return eval_concept(c.left, interp) | eval_concept(c.right, interp)
    if isinstance(c, Exists):
        filler = eval_concept(c.filler, interp)
        succ = interp.roles[c.role]
        return sum(1 << d for d in range(interp.size) if succ[d] & filler)
    if isinstance(c, Forall):
        filler = eval_concept(c.filler, interp)
        succ = interp.roles[c.role]
        return sum(1 << d for d in range(interp.size) if not (succ[d] & ~filler))
    raise TypeError(f"not a concept: {c!r}")


def axiom_holds(ax: OntologyAxiom, interp: Interpretation) -> bool:
    if isinstance(ax, Subsumption):
        return not (eval_concept(ax.lhs, interp) & ~eval_concept(ax.rhs, interp))
    if isinstance(ax, Equivalence):
        return eval_concept(ax.lhs, interp) == eval_concept(ax.rhs, interp)
    if isinstance(ax, ConceptAssertion):
        return bool(eval_concept(ax.concept, interp) >> interp.individuals[ax.individual] & 1)
    if isinstance(ax, RoleAssertion):
        return bool(interp.roles[ax.role][interp.individuals[ax.subject]]
                    >> interp.individuals[ax.object] & 1)
    raise TypeError(f"not an axiom: {ax!r}")


def _concept_names_of(c: ConceptExpr, out: set[str]) -> None:
    if isinstance(c, Atomic):
        out.add(c.name)
    elif isinstance(c, Not):
        _concept_names_of(c.inner, out)
    elif isinstance(c, (And, Or)):
        _concept_names_of(c.left, out)
        _concept_names_of(c.right, out)
    elif isinstance(c, (Exists, Forall)):
        _concept_names_of(c.filler, out)


def _axiom_names(ax: OntologyAxiom) -> tuple[set[str], set[str], set[str]]:
    concepts: set[str] = set()
    if isinstance(ax, (Subsumption, Equivalence)):
        _concept_names_of(ax.lhs, concepts)
        _concept_names_of(ax.rhs, concepts)
    elif isinstance(ax, ConceptAssertion):
        _concept_names_of(ax.concept, concepts)
    single = Query((ax,), Subsumption(Atomic("X__"), Atomic("X__")))
    return concepts, syntax.role_names(single), syntax.individual_names(single)


@dataclass
class OracleResult:
    status: str  # "valid" | "countermodel" | "inconclusive"
    countermodel: Interpretation | None = None
    sizes_checked: list[int] = field(default_factory=list)
    nodes: int = 0

    def __bool__(self):
        return self.status == "valid"


class _BudgetHit(Exception):
    pass


def validity_oracle(q: Query, max_domain: int = 3, node_budget: int = 300_000) -> OracleResult:
    """Look for a countermodel of the entailment over domains of size
    1..max_domain. "valid" means every domain size was exhausted without
    finding one; a hit node budget downgrades the answer to
    "inconclusive"."""
    concepts = sorted(syntax.concept_names(q))
    roles = sorted(syntax.role_names(q))
    individuals = sorted(syntax.individual_names(q))
    axioms = list(q.expanded_ontology())
    goal = q.goal

    per_axiom = []
    for ax in axioms:
        c, r, i = _axiom_names(ax)
        per_axiom.append((ax, c, r, i))

    # order concepts so ontology axioms become checkable early
    ordered: list[str] = []
    remaining = list(concepts)
    pending = list(per_axiom)
    while remaining:
        best = None
        for name in remaining:
            closes = sum(1 for _, c, _, _ in pending if name in c and c <= set(ordered) | {name})
            if best is None or closes > best[0]:
                best = (closes, name)
        ordered.append(best[1])
        remaining.remove(best[1])
        pending = [(ax, c, r, i) for ax, c, r, i in pending if not c <= set(ordered)]

    result = OracleResult("valid")

    def check(interp: Interpretation, assigned_concepts: set[str]) -> bool:
        """False when some fully-assigned ontology axiom fails."""
        for ax, c, r, i in per_axiom:
            if c <= assigned_concepts:
                if not axiom_holds(ax, interp):
                    return False
        return True

    def assign_concepts(interp: Interpretation, idx: int) -> Interpretation | None:
        result.nodes += 1
        if result.nodes > node_budget:
            raise _BudgetHit()
        assigned = set(ordered[:idx])
        if idx == len(ordered):
            for ax in axioms:
                if not axiom_holds(ax, interp):
                    return None
            if not axiom_holds(goal, interp):
                return interp
            return None
        name = ordered[idx]
        for mask in range(1 << interp.size):
            interp.concepts[name] = mask
            newly = assigned | {name}
            ok = True
            for ax, c, r, i in per_axiom:
                if name in c and c <= newly and not axiom_holds(ax, interp):
                    ok = False
                    break
            if ok:
                found = assign_concepts(interp, idx + 1)
                if found is not None:
                    return found
        del interp.concepts[name]
        return None

    try:
        for size in range(1, max_domain + 1):
            if len(individuals) > size:
                continue
            succ_vectors = list(product(range(1 << size), repeat=size))
            ind_maps = list(permutations(range(size), len(individuals))) or [()]
            for ind_map in ind_maps:
                ind_assign = dict(zip(individuals, ind_map))
                for role_combo in product(succ_vectors, repeat=len(roles)):
                    interp = Interpretation(size, {}, dict(zip(roles, role_combo)), ind_assign)
                    found = assign_concepts(interp, 0)
                    if found is not None:
                        return OracleResult("countermodel", found, result.sizes_checked, result.nodes)
            result.sizes_checked.append(size)
    except _BudgetHit:
        return OracleResult("inconclusive", None, result.sizes_checked, result.nodes)
    return OracleResult("valid", None, result.sizes_checked, result.nodes)
