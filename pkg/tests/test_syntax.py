import pytest
from hypothesis import given, settings, strategies as st

from alcseq import syntax
from alcseq.syntax import (
    And, Atomic, Bottom, ConceptAssertion, Equivalence, Exists, Forall,
    NamespaceError, Not, Or, ParseError, Query, RoleAssertion, Subsumption,
    Top, parse_query, render_concept, render_query,
)

CAT_OWNER = """
; pets and their owners
(implies (some hasPet Cat) CatOwner)
(implies OldLady (and (some hasPet Animal) (all hasPet Cat)))
(query (implies OldLady CatOwner))
"""


def test_parse_cat_owner_query():
    q = parse_query(CAT_OWNER)
    assert q.ontology[0] == Subsumption(Exists("hasPet", Atomic("Cat")), Atomic("CatOwner"))
    assert q.ontology[1] == Subsumption(
        Atomic("OldLady"),
        And(Exists("hasPet", Atomic("Animal")), Forall("hasPet", Atomic("Cat"))),
    )
    assert q.goal == Subsumption(Atomic("OldLady"), Atomic("CatOwner"))


def test_parse_identity_goal_with_empty_ontology():
    q = parse_query("(query (implies A A))")
    assert q == Query((), Subsumption(Atomic("A"), Atomic("A")))


def test_parse_double_negation_kept_structurally():
    q = parse_query("(query (instance a (not (not C))))")
    assert q.goal == ConceptAssertion(Not(Not(Atomic("C"))), "a")


def test_parse_related_axiom_subject_object_role():
    q = parse_query("(related a b hasPet)\n(query (instance a Cat))")
    assert q.ontology[0] == RoleAssertion("hasPet", "a", "b")


def test_equivalence_kept_unexpanded_then_expanded_on_demand():
    q = parse_query("(equivalent A B)\n(query (implies A B))")
    assert q.ontology == (Equivalence(Atomic("A"), Atomic("B")),)
    assert q.expanded_ontology() == (
        Subsumption(Atomic("A"), Atomic("B")),
        Subsumption(Atomic("B"), Atomic("A")),
    )


def test_goal_must_be_subsumption_or_assertion():
    with pytest.raises(ParseError):
        parse_query("(query (equivalent A B))")
    with pytest.raises(ParseError):
        parse_query("(query (related a b r))")


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_query("(query (implies A )")
    assert err.value.line == 1
    assert err.value.col == 19


def test_namespace_clash_is_semantic_error():
    with pytest.raises(NamespaceError):
        parse_query("(implies (some Cat A) B)\n(query (implies Cat B))")


def test_missing_query_form():
    with pytest.raises(ParseError):
        parse_query("(implies A B)")


def test_two_query_forms_rejected():
    with pytest.raises(ParseError):
        parse_query("(query (implies A A))(query (implies B B))")


from tests.strategies import concepts  # noqa: E402


@given(concepts())
@settings(max_examples=200)
def test_concept_round_trip(c):
    text = render_concept(c)
    q = parse_query(f"(query (instance a {text}))")
    assert q.goal.concept == c


@given(st.lists(st.tuples(concepts(), concepts()), max_size=3), concepts(), concepts())
@settings(max_examples=50)
def test_query_round_trip(axioms, gl, gr):
    q = Query(tuple(Subsumption(l, r) for l, r in axioms), Subsumption(gl, gr))
    assert parse_query(render_query(q)) == q


@given(st.text(max_size=60))
@settings(max_examples=300)
def test_parser_totality_on_arbitrary_text(text):
    try:
        parse_query(text)
    except (ParseError, NamespaceError):
        pass


def test_name_helpers():
    q = parse_query(CAT_OWNER)
    assert syntax.concept_names(q) == {"Cat", "CatOwner", "OldLady", "Animal"}
    assert syntax.role_names(q) == {"hasPet"}
    assert syntax.individual_names(q) == set()
