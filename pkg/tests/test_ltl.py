import pytest

from te_mdp.ltl import (
    And, Atom, Eventually, LtlSyntaxError, NegAtom, Next, NotPositiveNormalForm, Or, TRUE, Until,
    UnsupportedOperator, accepts_some_prefix, atoms, holds, parse,
)


def test_parse_until():
    assert parse("!crash U goal") == Until(NegAtom("crash"), Atom("goal"))


def test_precedence_and_associativity():
    assert parse("a | b & c") == Or(Atom("a"), And(Atom("b"), Atom("c")))
    assert parse("a U b U c") == Until(Atom("a"), Until(Atom("b"), Atom("c")))
    assert parse("F a & X !b") == And(Eventually(Atom("a")), Next(NegAtom("b")))
    assert parse("(a | b) U c") == Until(Or(Atom("a"), Atom("b")), Atom("c"))
    assert parse("!false") == TRUE


def test_round_trip_through_str():
    for text in ["!crash U goal", "F (a & F b)", "X X a | (b U !c)", "(a U b) & F c"]:
        f = parse(text)
        assert parse(str(f)) == f


def test_atoms():
    assert atoms(parse("(a U b) & F !c")) == {"a", "b", "c"}


@pytest.mark.parametrize("text", ["G a", "a -> b", "a R b", "[] a", "a W b"])
def test_rejects_non_cosafe_operators(text):
    with pytest.raises(UnsupportedOperator):
        parse(text)


def test_rejects_negated_compound():
    with pytest.raises(NotPositiveNormalForm) as err:
        parse("!(a U b)")
    assert err.value.position == 0


@pytest.mark.parametrize("text,pos", [("a &", 3), ("(a | b", 6), ("a b", 2), ("a $ b", 2), ("", 0)])
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(LtlSyntaxError) as err:
        parse(text)
    assert err.value.position == pos


def test_finite_semantics():
    f = parse("!crash U goal")
    assert holds(f, [{"goal"}])
    assert holds(f, [set(), set(), {"goal"}])
    assert not holds(f, [{"crash"}, {"goal"}])
    assert not holds(f, [set(), set()])
    assert not holds(f, [])
    assert accepts_some_prefix(f, [set(), {"goal"}, {"crash"}])
    assert holds(parse("X a"), [set(), {"a"}])
    assert not holds(parse("X a"), [{"a"}])
    assert holds(parse("F (a & X b)"), [set(), {"a"}, {"b"}])
