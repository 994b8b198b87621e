import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hytw.errors import IllFormedFormula, NonterminationBudget, TypeMismatch, UnboundParameter
from hytw.gen import random_functional, random_stream
from hytw.semantics import (
    And, Eq, Exists, Forall, Functional2, Le, Lt, Not, Or, Oracle1, concat, continuity_check,
    diag_real, eval_term, even_rows, formula_depth, hat, holds, pair, parse_env_file, prim_rec,
    represent_formula, represented_value, row_extract, row_index, star, unpair,
)
from hytw.terms import (
    App, NatLit, Param, Plus, Star, T0, T1, T2, Times, Var, parse_term,
)

IDENT = Oracle1.identity()


def native2(fn, label="F"):
    return Functional2.native(fn, label)


# ---------------------------------------------------------------- concat and star

def test_concat_examples():
    assert concat(5, Oracle1.const(0)).take(4) == [5, 0, 0, 0]
    assert concat(0, IDENT)(3) == 2
    r = random_stream(random.Random(1))
    assert concat(4, concat(7, r))(1) == 7


def test_star_examples():
    r = Oracle1.prefix([6, 2, 9])
    assert [star(native2(lambda s: s(1)), r)(k) for k in range(5)] == [6] * 5
    assert [star(native2(lambda s: s(0) + 1), r)(k) for k in range(5)] == [1, 2, 3, 4, 5]
    assert star(Functional2.const(7), r).take(6) == [7] * 6


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_defining_equations(seed):
    rng = random.Random(seed)
    k, r, F = rng.randint(0, 20), random_stream(rng), random_functional(rng)
    c = concat(k, r)
    assert c(0) == k
    assert all(c(n + 1) == r(n) for n in range(50))
    s = star(F, r)
    assert all(s(j) == F(concat(j, r)) for j in range(50))


def test_eval_arithmetic():
    assert eval_term(Plus(NatLit(2), NatLit(3))) == 5
    assert eval_term(parse_term("(< 3 2)")) == 0
    assert eval_term(parse_term("(succ (* 2 3))")) == 7


def test_star_composition_matches_hat():
    rng = random.Random(3)
    for _ in range(30):
        F0, F1, r = random_functional(rng), random_functional(rng), random_stream(rng)
        env = {"F0": F0, "F1": F1, "r": r}
        t = Star(Param("F0", T2), Star(Param("F1", T2), Param("r", T1)))
        got = eval_term(t, env)
        want = hat(F0)(hat(F1)(r))
        assert all(got(i) == want(i) for i in range(20))


def test_even_row_functional():
    rng = random.Random(4)
    for _ in range(50):
        F, a = random_functional(rng), random_stream(rng)
        evens = Oracle1.native(lambda i: a(2 * i))
        assert even_rows(F)(a) == F(evens)


def test_unbound_parameter():
    with pytest.raises(UnboundParameter):
        eval_term(Param("r", T1), {})


def test_wrong_value_type():
    with pytest.raises(TypeMismatch):
        eval_term(Param("r", T1), {"r": 3})


def test_fuel_is_enforced():
    t = parse_term("(+ (+ 1 2) (+ 3 4))")
    assert eval_term(t, fuel=3) == 10
    with pytest.raises(NonterminationBudget):
        eval_term(t, fuel=2)


def test_fuel_is_renewed_per_stream_position(monkeypatch):
    monkeypatch.setenv("HYTW_BUDGET", "2")
    s = eval_term(parse_term("(lam (x 0) (+ (+ x 1) (+ x 2)))"))
    with pytest.raises(NonterminationBudget):
        s(0)


# ---------------------------------------------------------------- primitive recursion

def test_prim_rec_examples():
    assert prim_rec(1, lambda a, b: 2 * a).take(6) == [1, 2, 4, 8, 16, 32]
    # hand-unrolled: 0, 0+0+1, 1+1+1, 3+2+1, 6+3+1
    assert prim_rec(0, lambda a, b: a + b + 1).take(5) == [0, 1, 3, 6, 10]
    assert prim_rec(9, lambda a, b: a).take(4) == [9] * 4


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 50), st.integers(0, 7), st.integers(0, 7))
def test_prim_rec_clauses(x, c1, c2):
    g = lambda a, b: (c1 * a + c2 * b + 1) % 97
    out = prim_rec(x, g)
    assert out(0) == x
    assert all(out(k + 1) == g(out(k), k) for k in range(30))


# ---------------------------------------------------------------- diagonal and rows

def test_diag_real_examples():
    assert diag_real(native2(lambda s: s(0) + s(1))).take(6) == [0, 2, 4, 6, 8, 10]
    assert diag_real(Functional2.const(3)).take(4) == [3] * 4
    assert diag_real(native2(lambda s: s(5))).take(6) == list(range(6))


def test_row_extract_examples():
    assert row_extract(Oracle1.const(0), 3).take(5) == [0] * 5
    spot = row_index(1, 0)
    r = Oracle1.native(lambda n: 9 if n == spot else 0)
    assert row_extract(r, 1)(0) == 9


def test_rows_read_only_their_positions():
    rng = random.Random(8)
    for _ in range(20):
        k = rng.randint(0, 5)
        base = random_stream(rng)
        mine = {row_index(k, i) for i in range(15)}
        other = Oracle1.native(lambda n: base(n) if n in mine else base(n) + 1 + n)
        assert row_extract(base, k).take(15) == row_extract(other, k).take(15)


def test_row_index_uses_cantor_pairing():
    assert row_index(1, 0) == pair(0, 1) == 2
    assert all(unpair(pair(a, b)) == (a, b) for a in range(30) for b in range(30))


# ---------------------------------------------------------------- continuity

@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_continuity_witness(seed):
    rng = random.Random(seed)
    F, f = random_functional(rng), random_stream(rng)
    shift = rng.randint(1, 9)
    assert continuity_check(F, f, lambda n, v: v + shift)


def test_modulus_is_recorded():
    F = native2(lambda s: s(2) + s(4))
    f = Oracle1.identity()
    F(f)
    assert F.modulus[f] == frozenset({2, 4})


# ---------------------------------------------------------------- formulas

u, v, w = Var("u", T0), Var("v", T0), Var("w", T0)
yv = Var("y", T1)
FREE = [("u", T0), ("y", T1)]


def test_represent_examples():
    F = represent_formula(Eq(u, u), [("u", T0)])
    assert [represented_value(F, [n]) for n in range(5)] == [1] * 5
    phi = Exists("v", NatLit(3), Eq(Times(v, v), NatLit(4)))
    assert represented_value(represent_formula(phi, []), []) == 1
    phi2 = Exists("v", NatLit(2), Eq(Times(v, v), NatLit(4)))
    assert represented_value(represent_formula(phi2, []), []) == 0


def test_negation_flips():
    rng = random.Random(6)
    phi = Lt(App(yv, NatLit(1)), Plus(u, NatLit(2)))
    F, G = represent_formula(phi, FREE), represent_formula(Not(phi), FREE)
    for _ in range(100):
        args = [rng.randint(0, 9), random_stream(rng)]
        assert represented_value(G, args) == 1 - represented_value(F, args)


def test_formulas_reject_type1_atoms_and_two_reals():
    with pytest.raises(IllFormedFormula):
        represent_formula(Eq(yv, yv), FREE)
    with pytest.raises(IllFormedFormula):
        represent_formula(Eq(u, u), [("u", T0), ("y", T1), ("z", T1)])


ATOM_TERMS = [NatLit(0), NatLit(2), u, App(yv, NatLit(0)), Plus(u, NatLit(1))]


def _atoms():
    for a, b in itertools.product(ATOM_TERMS, repeat=2):
        for cls in (Eq, Lt, Le):
            yield cls(a, b)


def _inputs():
    streams = [Oracle1.const(0), Oracle1.prefix([3, 1]), Oracle1.identity()]
    return [(n, s) for n in range(4) for s in streams]


def _agree(phi):
    F = represent_formula(phi, FREE)
    return all(represented_value(F, [n, s]) == int(holds(phi, {"u": n, "y": s})) for n, s in _inputs())


def test_representation_agrees_on_all_small_formulas():
    # a systematic family of depth <= 2 formulas over a few atoms
    atoms = list(_atoms())[::5]
    depth1 = []
    for a in atoms:
        depth1.append(Not(a))
        depth1.append(Exists("v", NatLit(3), Eq(v, a.left) if isinstance(a.left, NatLit) else Lt(v, a.left)))
    for a, b in itertools.product(atoms[:6], repeat=2):
        depth1 += [And(a, b), Or(a, b)]
    depth2 = [Not(p) for p in depth1] + [Forall("w", u, Or(a, Lt(w, u))) for a in atoms]
    for phi in atoms + depth1 + depth2:
        assert formula_depth(phi) <= 2
        assert _agree(phi)


def _random_formula(rng, depth, bound_vars):
    terms = ATOM_TERMS + [Var(n, T0) for n in bound_vars]
    if depth == 0 or rng.random() < 0.25:
        return rng.choice((Eq, Lt, Le))(rng.choice(terms), rng.choice(terms))
    kind = rng.choice(["not", "and", "or", "ex", "all"])
    if kind == "not":
        return Not(_random_formula(rng, depth - 1, bound_vars))
    if kind in ("and", "or"):
        cls = And if kind == "and" else Or
        return cls(_random_formula(rng, depth - 1, bound_vars), _random_formula(rng, depth - 1, bound_vars))
    name = f"q{len(bound_vars)}"
    bound = rng.choice([NatLit(rng.randint(0, 5)), u])
    body = _random_formula(rng, depth - 1, bound_vars + [name])
    return (Exists if kind == "ex" else Forall)(name, bound, body)


def test_representation_agrees_on_random_deep_formulas():
    rng = random.Random(12)
    for _ in range(300):
        phi = _random_formula(rng, 4, [])
        assert formula_depth(phi) <= 4
        assert _agree(phi)


# ---------------------------------------------------------------- environment files

def test_env_file():
    sig = {"r": T1, "n": T0, "F": T2, "s": T1}
    env = parse_env_file("r = prefix 3 1 4 default 0\nn = 5\nF = (lam (t 1) (t 2))\ns = (cat n r)\n", sig)
    assert env["r"].take(5) == [3, 1, 4, 0, 0]
    assert env["n"] == 5
    assert env["F"](Oracle1.identity()) == 2
    assert env["s"].take(3) == [5, 3, 1]


def test_env_file_errors():
    from hytw.errors import SyntaxError_
    with pytest.raises(UnboundParameter):
        parse_env_file("q = 3\n", {"r": T1})
    with pytest.raises(TypeMismatch):
        parse_env_file("r = 3\n", {"r": T1})
    with pytest.raises(SyntaxError_):
        parse_env_file("r prefix 3\n", {"r": T1})
