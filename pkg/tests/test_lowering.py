import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from hytw.errors import NonStandardSubterm, NotNormal, WitnessSearchExhausted
from hytw.gen import DEFAULT_SIGNATURE, random_closed_term, random_env, random_functional, random_stream
from hytw.lowering import (
    code_term, coding_equation_holds, lower_closed, lower_term, qf_ac_witness, rearrange_functional,
    shift_functional, unfold_stars,
)
from hytw.normalizer import nf
from hytw.semantics import Eq, Le, Lt, Not, And, Oracle1, concat, eval_term, star
from hytw.terms import App, Lam, NatLit, Param, Plus, Star, T0, T1, T2, Times, Var, parse_term

x, yv = Var("x", T0), Var("y", T1)


def test_code_of_sum():
    code = code_term(Plus(x, App(yv, NatLit(0))), ("x",), "y")
    F = code.realize()
    rng = random.Random(1)
    for _ in range(50):
        a, b = rng.randint(0, 30), random_stream(rng)
        assert F(concat(a, b)) == a + b(0)
    assert code.purity_violations() == []


def test_code_of_identity_stream():
    code = code_term(yv, (), "y")
    F = code.realize()
    b = Oracle1.prefix([4, 8, 15])
    assert star(F, b).take(3) == [4, 8, 15]


def test_code_of_parameter_application():
    G = Param("G", T2)
    code = code_term(App(G, yv), (), "y")
    env = {"G": random_functional(random.Random(2))}
    b = random_stream(random.Random(3))
    assert code.realize(env)(b) == env["G"](b)


def test_code_term_needs_normal_input():
    with pytest.raises(NotNormal):
        code_term(App(Lam("z", T0, Var("z", T0)), NatLit(1)))


def test_code_term_rejects_two_real_variables():
    t = Plus(App(yv, NatLit(0)), App(Var("w", T1), NatLit(0)))
    with pytest.raises(NonStandardSubterm):
        code_term(t, (), "y")


def test_lower_closed_examples():
    F = lower_closed(parse_term("(lam (y (-> 0 0)) (+ (y 2) 1))")).realize()
    assert F(Oracle1.identity()) == 3
    s = lower_closed(parse_term("(lam (x 0) x)"))
    assert s.take(6) == list(range(6))
    assert lower_closed(parse_term("((lam (x 0) x) 7)")) == 7


def test_lowered_text_reparses():
    from hytw.terms import parse_term_file
    low = lower_term(parse_term("(lam (x 0) (* x x))"))
    tf = parse_term_file(low.text())
    assert len(tf.terms) == 1


def test_star_unfolding_removes_star_of_lambda():
    t = parse_term("(star (lam (s (-> 0 0)) (+ (s 0) (s 1))) (lam (x 0) x))")
    u = nf(unfold_stars(t))
    r = eval_term(t)
    assert [eval_term(App(u, NatLit(i))) for i in range(6)] == r.take(6)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32))
def test_lowering_preserves_meaning(seed):
    rng = random.Random(seed)
    ty = rng.choice([T0, T1, T2])
    t = random_closed_term(rng, ty, 30)
    env = random_env(rng, DEFAULT_SIGNATURE)
    want = eval_term(t, env)
    if ty == T2:
        got = lower_closed(t).realize(env)
        for _ in range(5):
            f = random_stream(rng)
            assert got(f) == want(f)
    elif ty == T1:
        got = lower_term(t).value(env)
        assert got.take(10) == want.take(10)
    else:
        assert lower_term(t).value(env) == want


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32))
def test_codes_are_pure(seed):
    t = random_closed_term(random.Random(seed), T2, 30)
    assert lower_term(t).code.purity_violations() == []


# ---------------------------------------------------------------- choice witnesses

def test_witness_for_first_position():
    G = qf_ac_witness(Eq(x, App(yv, NatLit(0))))
    F = G.realize()
    rng = random.Random(4)
    for _ in range(30):
        b = Oracle1.prefix([rng.randint(0, 50)])
        assert F(b) == b(0)


def test_witness_is_integer_square_root():
    # x*x <= y(0) < (x+1)*(x+1)
    phi = And(Le(Times(x, x), App(yv, NatLit(0))),
              Lt(App(yv, NatLit(0)), Times(Plus(x, NatLit(1)), Plus(x, NatLit(1)))))
    F = qf_ac_witness(phi).realize()
    for n in range(200):
        assert F(Oracle1.const(n)) == math.isqrt(n)


def test_trivial_formula_picks_zero():
    F = qf_ac_witness(Eq(NatLit(0), NatLit(0))).realize()
    assert F(Oracle1.const(9)) == 0


def test_witness_is_least():
    phi = Lt(App(yv, NatLit(1)), x)
    F = qf_ac_witness(phi).realize()
    assert F(Oracle1.prefix([0, 6])) == 7


def test_missing_witness_exhausts_search():
    F = qf_ac_witness(Not(Eq(x, x)), search_bound=50).realize()
    with pytest.raises(WitnessSearchExhausted):
        F(Oracle1.const(0))


# ---------------------------------------------------------------- shift and rearrangement

@settings(max_examples=200, deadline=None)
@given(st.integers(0, 6), st.integers(0, 2**32))
def test_shift_law(n, seed):
    r = random_stream(random.Random(seed))
    s = star(shift_functional(n), r)
    assert all(s(i) == r(n + i) for i in range(30))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.permutations(list(range(n)))), st.integers(0, 2**32))
def test_rearrangement_law(perm, seed):
    r = random_stream(random.Random(seed))
    s = star(rearrange_functional(perm), r)
    n = len(perm)
    assert all(s(i) == (r(perm[i]) if i < n else r(i)) for i in range(30))


def test_rearrangement_rejects_non_permutations():
    with pytest.raises(ValueError):
        rearrange_functional([0, 0])


# ---------------------------------------------------------------- coding equation

def test_coding_equation_on_mixed_term():
    t = Plus(Times(x, App(yv, NatLit(2))), App(yv, x))
    code = code_term(t, ("x",), "y")
    rng = random.Random(5)
    for _ in range(50):
        assert coding_equation_holds(code, [rng.randint(0, 5)], random_stream(rng))


def test_coding_equation_on_stream_term():
    code = code_term(Star(Param("F", T2), yv), (), "y")
    env = {"F": random_functional(random.Random(6))}
    assert coding_equation_holds(code, [], random_stream(random.Random(7)), env, positions=15)
