"""Serialization and replay of connection proof traces.

A proof file is line oriented::

    MATRIX {{...}}
    GOALS 2 3
    START 3
    EXT 3.0 0.2 via=0 {v0=a}
    DEC 1.1 -> 1.1.0
    RED ... / COPY ... / AXIOM
    THETA {v0=a, ...}

The replayer re-applies the rule applications against the matrix,
re-checking every side condition, so a trace doubles as an independently
checkable certificate of the search's discipline.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .matrix import (
    Address, Individual, KIND_CONCEPT, Literal, Matrix, SubMatrix, Term,
    Variable, format_address, iter_literals, literal_at, parse_address,
    render_matrix,
)
from . import prover as pv
from .prover import (
    ConnectionProof, _LitGoal, _SubGoal, _addressed_literals,
    _clause_literals_rel, _is_prefix, _rename_clause, complementary,
    is_extension_clause, resolve,
)


class TraceError(Exception):
    pass


def serialize_proof(proof: ConnectionProof) -> str:
    lines = [
        "MATRIX " + render_matrix(proof.matrix, "linear"),
        "GOALS " + " ".join(str(i) for i in sorted(proof.matrix.goal_indices)),
    ]
    lines.extend(proof.trace)
    return "\n".join(lines) + "\n"


_BINDING_RE = re.compile(r"(v\d+(?:_\d+)?)=([A-Za-z0-9_]+)")


def _parse_term_token(token: str, vars_by_key: dict[tuple[int, int], Variable]) -> Term:
    m = re.fullmatch(r"v(\d+)(?:_(\d+))?", token)
    if m:
        key = (int(m.group(1)), int(m.group(2) or 0))
        if key not in vars_by_key:
            raise TraceError(f"unknown variable {token}")
        return vars_by_key[key]
    return Individual(token)


def _collect_vars(m: Matrix) -> dict[tuple[int, int], Variable]:
    out: dict[tuple[int, int], Variable] = {}
    for _, lit in iter_literals(m):
        for a in lit.args:
            if isinstance(a, Variable):
                out[(a.vid, a.copy)] = a
    return out


def parse_proof(text: str, matrix: Matrix) -> ConnectionProof:
    """Rebuild a ConnectionProof from its serialized form.

    The caller supplies the matrix (typically rebuilt from the query);
    the MATRIX line must agree with its rendering.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("MATRIX "):
        raise TraceError("missing MATRIX header")
    if lines[0][len("MATRIX "):] != render_matrix(matrix, "linear"):
        raise TraceError("matrix in proof file does not match the query's matrix")
    if not lines[1].startswith("GOALS"):
        raise TraceError("missing GOALS header")
    goals = frozenset(int(p) for p in lines[1].split()[1:])
    if goals != matrix.goal_indices:
        raise TraceError("goal clauses in proof file do not match")

    trace = tuple(lines[2:])
    clauses = list(matrix.clauses)
    vars_by_key = _collect_vars(matrix)
    copies: list[tuple[int, int, int]] = []
    mu: dict[int, int] = {}
    connections: list[tuple[Address, Address]] = []
    theta: dict[Variable, Term] = {}
    seen = set()
    for line in trace:
        parts = line.split()
        if parts[0] == "COPY":
            origin = int(parts[1])
            k = int(parts[2].split("=")[1])
            idx = int(parts[3].split("=")[1])
            clause = _rename_clause(matrix.clauses[origin], k)
            if idx != len(clauses):
                raise TraceError("copy index out of order")
            clauses.append(clause)
            copies.append((origin, k, idx))
            mu[origin] = max(mu.get(origin, 0), k)
            for _, lit in _clause_literals_rel(clause):
                for a in lit.args:
                    if isinstance(a, Variable):
                        vars_by_key[(a.vid, a.copy)] = a
        elif parts[0] in ("EXT", "RED"):
            pair = (parse_address(parts[1]), parse_address(parts[2]))
            key = (min(pair), max(pair))
            if key not in seen:
                seen.add(key)
                connections.append(pair)
        elif parts[0] == "THETA":
            for var_tok, val_tok in _BINDING_RE.findall(line):
                var = _parse_term_token(var_tok, vars_by_key)
                val = _parse_term_token(val_tok, vars_by_key)
                theta[var] = val
    return ConnectionProof(
        matrix=matrix,
        mu=mu,
        copies=tuple(copies),
        substitutions=theta,
        connections=tuple(connections),
        trace=trace,
    )


# --------------------------------------------------------------------------
# replay

@dataclass
class ReplayReport:
    rules: list[str]
    skolem_checks: int
    blocking_checks: int


def replay_trace(matrix: Matrix, trace: tuple[str, ...]) -> ReplayReport:
    """Re-apply a trace, re-validating every side condition.

    Checks per step: subgoal discipline (the acted-on literal is the head
    of the current subgoal), theta-complementarity of each connection,
    reduction partners lie on the active path, extension clauses satisfy
    their definition, at most one column index per witness term among the
    connected literals, copies respect the blocking condition and are
    immediately followed by an extension or reduction.
    """
    clauses = list(matrix.clauses)
    theta: dict[Variable, Term] = {}
    touched: list[Literal] = []
    copy_counts: dict[int, int] = {}
    branches: list[tuple[list, list]] = []
    started = False
    pending_copy = False
    report = ReplayReport([], 0, 0)

    def live() -> Matrix:
        return Matrix(tuple(clauses), matrix.goal_indices)

    def lit_at(addr: Address) -> Literal:
        return literal_at(live(), addr)

    def clause_items(clause_addr: Address, removed: Address | None) -> list:
        from .matrix import clause_at
        clause = clause_at(live(), clause_addr)
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

    def unify_pair(l1: Literal, l2: Literal):
        nonlocal theta
        new = pv.theta_unify(l1, l2, theta)
        if new is None:
            raise TraceError(f"connection {l1.name}/{l2.name} not complementary")
        theta = new
        touched.append(l1)
        touched.append(l2)

    def skolem_check():
        report.skolem_checks += 1
        groups: dict[Term, set[int]] = {}
        for lit in touched:
            if lit.kind == KIND_CONCEPT and lit.col_index is not None and lit.args:
                rep = resolve(lit.args[0], theta)
                cols = groups.setdefault(rep, set())
                cols.add(lit.col_index)
                if len(cols) > 1:
                    raise TraceError("column-index condition violated")
        # the narrower path-only reading must hold as well
        for items, path in branches:
            path_groups: dict[Term, set[int]] = {}
            for addr in path:
                lit = lit_at(addr)
                if lit.kind == KIND_CONCEPT and lit.col_index is not None and lit.args:
                    rep = resolve(lit.args[0], theta)
                    cols = path_groups.setdefault(rep, set())
                    cols.add(lit.col_index)
                    if len(cols) > 1:
                        raise TraceError("column-index condition violated on a path")

    def concept_set(term: Term) -> set[str]:
        rep = resolve(term, theta)
        return {
            lit.name
            for lit in touched
            if lit.kind == KIND_CONCEPT and lit.args and resolve(lit.args[0], theta) == rep
        }

    for line in trace:
        parts = line.split()
        op = parts[0]
        if op == "THETA":
            continue
        if pending_copy and op not in ("EXT", "RED"):
            raise TraceError("copy not followed by extension or reduction")
        if op == "START":
            if started:
                raise TraceError("second START in trace")
            started = True
            ci = int(parts[1])
            if ci not in matrix.goal_indices:
                raise TraceError("start clause is not a goal clause")
            branches = [(clause_items((ci,), None), [])]
        elif op == "AXIOM":
            if not branches or branches[0][0]:
                raise TraceError("AXIOM with open subgoals")
            branches.pop(0)
        elif op == "DEC":
            items, path = branches[0]
            if not items or not isinstance(items[0], _SubGoal):
                raise TraceError("DEC without a sub-matrix subgoal")
            head = items[0]
            if parse_address(parts[1]) != head.addr:
                raise TraceError("DEC address mismatch")
            chosen = parse_address(parts[3])
            if chosen[:-1] != head.addr:
                raise TraceError("DEC chose a clause outside the sub-matrix")
            removed = head.removed if head.removed is not None and _is_prefix(chosen, head.removed) else None
            branches[0] = (clause_items(chosen, removed) + items[1:], path)
        elif op == "RED":
            items, path = branches[0]
            l1_addr, l2_addr = parse_address(parts[1]), parse_address(parts[2])
            if not items or not isinstance(items[0], _LitGoal) or items[0].addr != l1_addr:
                raise TraceError("RED does not act on the current subgoal head")
            if l2_addr not in path:
                raise TraceError("RED partner not on the active path")
            unify_pair(lit_at(l1_addr), lit_at(l2_addr))
            skolem_check()
            branches[0] = (items[1:], path)
            pending_copy = False
        elif op == "EXT":
            items, path = branches[0]
            l1_addr, l2_addr = parse_address(parts[1]), parse_address(parts[2])
            via = parse_address(parts[3].split("=")[1])
            if not items or not isinstance(items[0], _LitGoal) or items[0].addr != l1_addr:
                raise TraceError("EXT does not act on the current subgoal head")
            if not _is_prefix(via, l2_addr):
                raise TraceError("EXT partner not inside the extension clause")
            if not is_extension_clause(live(), via, path + [l1_addr]):
                raise TraceError("EXT clause does not satisfy the extension-clause definition")
            unify_pair(lit_at(l1_addr), lit_at(l2_addr))
            skolem_check()
            new_branch = (clause_items(via, l2_addr), path + [l1_addr])
            branches[0] = (items[1:], path)
            branches.insert(0, new_branch)
            pending_copy = False
        elif op == "COPY":
            origin = int(parts[1])
            k = int(parts[2].split("=")[1])
            idx = int(parts[3].split("=")[1])
            if idx != len(clauses):
                raise TraceError("COPY index out of order")
            if k != copy_counts.get(origin, 0) + 1:
                raise TraceError("COPY index does not increment the clause's count")
            report.blocking_checks += 1
            if k >= 2:
                delta_vars = sorted(
                    {(a.vid, a.kind)
                     for _, lit in _clause_literals_rel(matrix.clauses[origin])
                     for a in lit.args
                     if isinstance(a, Variable) and a.kind == "delta"}
                )
                for vid, kind in delta_vars:
                    prev = concept_set(Variable(vid, k - 1, kind))
                    before = concept_set(Variable(vid, k - 2, kind))
                    if prev <= before:
                        raise TraceError("blocking condition violated")
            clauses.append(_rename_clause(matrix.clauses[origin], k))
            copy_counts[origin] = k
            pending_copy = True
        else:
            raise TraceError(f"unknown trace line {line!r}")
        report.rules.append(op)
    if branches:
        raise TraceError("trace ended with open branches")
    return report
