import random

import pytest
from hypothesis import given, settings, strategies as st

from hytw.errors import SyntaxError_, TypeMismatch, UnboundVariable
from hytw.gen import DEFAULT_SIGNATURE, all_types, random_closed_term
from hytw.terms import (
    App, Arrow, Concat, Lam, NatLit, Param, Plus, Star, T0, T1, T2, Var, is_standard,
    parse_term, parse_term_file, parse_type, print_term, print_term_file, size, type_of,
)

SIG = {"F": T2, "r": T1, "n": T0}


def test_identity_has_type_one():
    t = Lam("x", T0, Var("x", T0))
    assert type_of(t) == Arrow(T0, T0) == T1


def test_type_two_is_standard():
    assert is_standard(Arrow(Arrow(T0, T0), T0))
    assert is_standard(T0)
    assert not is_standard(Arrow(T0, Arrow(T0, T0)))


def test_applying_a_number_is_a_type_error():
    with pytest.raises(TypeMismatch):
        type_of(App(NatLit(3), NatLit(4)))


def test_free_variable_is_unbound():
    with pytest.raises(UnboundVariable):
        type_of(Var("x", T0), {}, {})
    with pytest.raises(UnboundVariable):
        parse_term("x")


def test_parse_lambda():
    assert parse_term("(lam (x 0) (+ x 1))") == Lam("x", T0, Plus(Var("x", T0), NatLit(1)))


def test_parse_star():
    assert parse_term("(star F r)", SIG) == Star(Param("F", T2), Param("r", T1))


def test_rebinding_is_rejected():
    with pytest.raises(SyntaxError_):
        parse_term("(lam (x 0) (lam (x 0) x))")


def test_syntax_error_has_position():
    with pytest.raises(SyntaxError_) as e:
        parse_term("(+ 1")
    assert e.value.pos is not None


def test_print_examples():
    assert print_term(NatLit(0)) == "0"
    assert print_term(Star(Param("F", T2), Param("r", T1))) == "(star F r)"
    G = Param("G", Arrow(T0, Arrow(T0, T0)))
    assert print_term(App(App(G, Param("n", T0)), NatLit(1))) == "((G n) 1)"


def test_concat_has_type_one():
    assert type_of(Concat(NatLit(2), Param("r", T1)), SIG) == T1


def test_parse_type_round_trip():
    for ty in all_types(2):
        assert parse_type(str(ty)) == ty


def _standard_by_recursion(t):
    if t == T0:
        return True
    return isinstance(t, Arrow) and t.codomain == T0 and _standard_by_recursion(t.domain)


def test_is_standard_matches_recursion_up_to_height_five():
    for ty in all_types(5):
        assert is_standard(ty) == _standard_by_recursion(ty)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([T0, T1, T2]))
def test_print_parse_round_trip(seed, ty):
    t = random_closed_term(random.Random(seed), ty, 40)
    text = print_term(t)
    back = parse_term(text, DEFAULT_SIGNATURE)
    assert back == t
    assert type_of(back, DEFAULT_SIGNATURE) == type_of(t, DEFAULT_SIGNATURE) == ty


def test_generator_respects_size():
    rng = random.Random(5)
    for _ in range(200):
        assert size(random_closed_term(rng, T1, 25)) <= 25


def test_term_file_with_headers():
    text = "param r (-> 0 0)\ndef two (+ 1 1)\n(r two)\n(lam (x 0) x)\n"
    tf = parse_term_file(text)
    assert tf.signature == {"r": T1}
    assert list(tf.defs) == ["two"]
    assert len(tf.terms) == 2
    assert type_of(tf.terms[0], tf.scope()) == T0
    assert parse_term_file(print_term_file(tf)) == tf


def test_term_file_rejects_duplicate_names():
    with pytest.raises(SyntaxError_):
        parse_term_file("param r (-> 0 0)\nparam r 0\n")


def test_definitions_must_be_closed():
    with pytest.raises(UnboundVariable):
        parse_term_file("def bad (+ x 1)\n")
