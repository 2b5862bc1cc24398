import pytest
from hypothesis import given, settings, strategies as st

from alcseq import matrix as mx
from alcseq.matrix import (
    Clause, Individual, Literal, Matrix, SubMatrix, UnsupportedConstructError,
    Variable, build_matrix, count_paths, enumerate_paths, parse_matrix,
    render_matrix, simplify,
)
from alcseq.syntax import parse_query

CAT_OWNER = """
(implies (some hasPet Cat) CatOwner)
(implies OldLady (and (some hasPet Animal) (all hasPet Cat)))
(query (implies OldLady CatOwner))
"""

M1_LINEAR = (
    "{{_hasPet^0, _Cat^0, CatOwner^1}, "
    "{OldLady^0, {{_hasPet^1@1}, {_Animal^1@1}, {_hasPet^0, _Cat^1}}}, "
    "{OldLady(a)^1}, {CatOwner(a)^0}}"
)


def cat_owner_matrix():
    return build_matrix(parse_query(CAT_OWNER))


def test_cat_owner_matrix_matches_known_display():
    m = cat_owner_matrix()
    assert render_matrix(m, "linear") == M1_LINEAR
    assert m.goal_indices == frozenset({2, 3})


def test_cat_owner_matrix_structure():
    m = cat_owner_matrix()
    assert len(m.clauses) == 4
    first = m.clauses[0]
    assert [el.name for el in first.elements] == ["hasPet", "Cat", "CatOwner"]
    assert [el.polarity for el in first.elements] == [0, 0, 1]
    assert [el.underlined for el in first.elements] == [True, True, False]
    second = m.clauses[1]
    assert isinstance(second.elements[0], Literal)
    assert isinstance(second.elements[1], SubMatrix)
    inner = second.elements[1].matrix
    assert len(inner.clauses) == 3
    indexed = inner.clauses[0].elements[0]
    assert indexed.name == "hasPet" and indexed.polarity == 1 and indexed.col_index == 1
    animal = inner.clauses[1].elements[0]
    assert animal.name == "Animal" and animal.col_index == 1


def test_cat_owner_variable_layout():
    m = cat_owner_matrix()
    # clause 0: hasPet(x,y), Cat(y), CatOwner(x)
    h, cat, co = m.clauses[0].elements
    assert h.args[0] == co.args[0]
    assert h.args[1] == cat.args[0]
    assert h.args[0].kind == mx.VAR_SUBJECT
    assert h.args[1].kind == mx.VAR_GAMMA
    # delta witness shared between indexed role and filler
    inner = m.clauses[1].elements[1].matrix
    h1 = inner.clauses[0].elements[0]
    animal = inner.clauses[1].elements[0]
    assert h1.args[1] == animal.args[0]
    assert h1.args[1].kind == mx.VAR_DELTA
    # goal clauses are ground
    assert m.clauses[2].elements[0].args == (Individual("a"),)
    assert m.clauses[3].elements[0].args == (Individual("a"),)


def test_identity_goal_matrix():
    m = build_matrix(parse_query("(query (implies A A))"))
    assert render_matrix(m) == "{{A(a)^1}, {A(a)^0}}"
    assert m.goal_indices == frozenset({0, 1})
    assert count_paths(m) == 1


def test_unprovable_two_atoms_matrix_has_no_connection():
    m = build_matrix(parse_query("(query (implies OldLady CatOwner))"))
    assert render_matrix(m) == "{{OldLady(a)^1}, {CatOwner(a)^0}}"
    lits = [lit for _, lit in mx.iter_literals(m)]
    assert not any(a.complement_matches(b) for a in lits for b in lits)


def test_top_bottom_rejected():
    with pytest.raises(UnsupportedConstructError):
        build_matrix(parse_query("(query (implies A top))"))
    with pytest.raises(UnsupportedConstructError):
        build_matrix(parse_query("(implies bot A)\n(query (implies A A))"))


def test_abox_assertions():
    q = parse_query("(instance b OldLady)\n(related b c hasPet)\n(query (instance c Cat))")
    m = build_matrix(q)
    assert render_matrix(m) == "{{OldLady(b)^1}, {hasPet(b,c)^1}, {Cat(c)^0}}"
    assert m.goal_indices == frozenset({2})


# --------------------------------------------------------------------------
# simplification

def lit(name, pol=0):
    return Literal(name, pol, ())


def test_simplify_splices_singleton_clause_matrix():
    inner = Matrix((Clause((lit("C1"),)), Clause((lit("C2"),))))
    m = Matrix((Clause((lit("A"),)), Clause((SubMatrix(inner),)), Clause((lit("B"),))))
    simped = simplify(m)
    assert render_matrix(simped) == "{{A^0}, {C1^0}, {C2^0}, {B^0}}"


def test_simplify_splices_singleton_matrix_in_clause():
    inner = Matrix((Clause((lit("M1"), lit("M2"))),))
    m = Matrix((Clause((lit("A"), SubMatrix(inner), lit("B"))),))
    simped = simplify(m)
    assert render_matrix(simped) == "{{A^0, M1^0, M2^0, B^0}}"


def test_simplify_idempotent_on_flat_matrix():
    m = Matrix((Clause((lit("A"), lit("B"))), Clause((lit("C"),))))
    assert simplify(m) == m


def test_simplify_leaves_cat_owner_matrix_unchanged_and_preserves_paths():
    m = cat_owner_matrix()
    simped = simplify(m)
    assert simped == m

    def path_key(paths):
        return sorted(
            sorted((l.name, l.polarity, l.col_index) for l in p) for p in paths
        )

    assert path_key(enumerate_paths(simped)) == path_key(enumerate_paths(m))


# --------------------------------------------------------------------------
# paths

def test_singleton_clause_paths():
    m = Matrix((Clause((lit("A", 1),)), Clause((lit("A", 0),))))
    paths = list(enumerate_paths(m))
    assert len(paths) == 1
    assert {(l.name, l.polarity) for l in paths[0]} == {("A", 1), ("A", 0)}


def test_flat_two_by_two_paths():
    m = Matrix((Clause((lit("a"), lit("b"))), Clause((lit("c"), lit("d")))))
    assert len(list(enumerate_paths(m))) == 4
    assert count_paths(m) == 4


def test_cat_owner_path_count_regression():
    m = cat_owner_matrix()
    paths = list(mx.enumerate_path_addresses(m))
    # frozen by running the enumeration oracle on the built matrix
    assert len(paths) == 9
    assert count_paths(m) == 9


def test_cat_owner_known_paths_present():
    m = cat_owner_matrix()
    keys = {
        frozenset((l.name, l.polarity) for l in p) for p in enumerate_paths(m)
    }
    first = frozenset({("hasPet", 0), ("hasPet", 1), ("Animal", 1),
                       ("OldLady", 1), ("CatOwner", 0)})
    second = frozenset({("Cat", 0), ("hasPet", 1), ("Animal", 1), ("Cat", 1),
                        ("OldLady", 1), ("CatOwner", 0)})
    assert first in keys
    assert second in keys


# --------------------------------------------------------------------------
# rendering and parsing

def test_render_identity_linear():
    m = Matrix((Clause((lit("A", 1),)), Clause((lit("A", 0),))))
    assert render_matrix(m, "linear") == "{{A^1}, {A^0}}"


def test_graphical_rendering_shows_shared_index():
    text = render_matrix(cat_owner_matrix(), "graphical")
    assert "hasPet^1_1" in text
    assert "Animal^1_1" in text
    assert "hasPet^0|" in text


def test_linear_round_trip_reparses_to_same_rendering():
    m = cat_owner_matrix()
    text = render_matrix(m, "linear")
    assert render_matrix(parse_matrix(text), "linear") == text


# --------------------------------------------------------------------------
# invariants

def polarity_walk(expected, concept, polarity):
    """Independent recursive polarity assignment used as an oracle."""
    from alcseq import syntax as sx
    if isinstance(concept, sx.Atomic):
        expected.append((concept.name, polarity))
    elif isinstance(concept, sx.Not):
        polarity_walk(expected, concept.inner, 1 - polarity)
    elif isinstance(concept, (sx.And, sx.Or)):
        polarity_walk(expected, concept.left, polarity)
        polarity_walk(expected, concept.right, polarity)
    elif isinstance(concept, (sx.Exists, sx.Forall)):
        two_clause = (isinstance(concept, sx.Forall) and polarity == 0) or (
            isinstance(concept, sx.Exists) and polarity == 1)
        expected.append((concept.role, 1 if two_clause else 0))
        polarity_walk(expected, concept.filler, polarity)


@given(st.data())
@settings(max_examples=60)
def test_polarity_inheritance_matches_independent_walker(data):
    from tests.strategies import concepts
    lhs = data.draw(concepts(allow_top_bot=False))
    rhs = data.draw(concepts(allow_top_bot=False))
    q = parse_query(f"(query (implies {_r(lhs)} {_r(rhs)}))")
    m = build_matrix(q)
    expected: list = []
    polarity_walk(expected, q.goal.lhs, 1)
    polarity_walk(expected, q.goal.rhs, 0)
    actual = [(l.name, l.polarity) for _, l in mx.iter_literals(m)]
    assert sorted(actual) == sorted(expected)


def _r(c):
    from alcseq.syntax import render_concept
    return render_concept(c)


def random_small_matrix(draw):
    names = st.sampled_from(["P", "Q", "R", "S"])

    def literal():
        return Literal(draw(names), draw(st.integers(0, 1)), ())

    def clause(depth):
        els = []
        for _ in range(draw(st.integers(1, 2))):
            if depth > 0 and draw(st.booleans()):
                els.append(SubMatrix(matrix(depth - 1)))
            else:
                els.append(literal())
        return Clause(tuple(els))

    def matrix(depth):
        return Matrix(tuple(clause(depth) for _ in range(draw(st.integers(1, 2)))))

    return matrix(2)


@given(st.data())
@settings(max_examples=60)
def test_path_count_law_and_simplify_preservation(data):
    m = random_small_matrix(data.draw)
    paths = list(enumerate_paths(m))
    assert len(paths) == count_paths(m)
    if sum(1 for _ in mx.iter_literals(m)) <= 12:
        simped = simplify(m)

        def key(paths_):
            return sorted(sorted((l.name, l.polarity) for l in p) for p in paths_)

        assert key(enumerate_paths(simped)) == key(paths)


def test_underline_soundness_on_cat_owner():
    m = cat_owner_matrix()
    underlined = {(l.name, l.polarity, l.col_index)
                  for _, l in mx.iter_literals(m) if l.underlined}
    assert underlined == {
        ("hasPet", 0, None), ("Cat", 0, None),
        ("hasPet", 1, 1), ("Animal", 1, 1),
        ("Cat", 1, None),
    }
    plain = {l.name for _, l in mx.iter_literals(m) if not l.underlined}
    assert plain == {"CatOwner", "OldLady"}
