"""Evaluation of terms of type <= 2 in the model of continuous functionals.

Type 0 values are Python ints, type 1 values are :class:`Oracle1` streams and
type 2 values are :class:`Functional2` objects.  Intermediate values of other
types (which appear inside terms before normalization) are :class:`Closure`
objects and never escape :func:`eval_term`.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import (
    IllFormedFormula, NonterminationBudget, TypeMismatch, UnboundParameter,
    WitnessSearchExhausted,
)
from .terms import (
    App, Arrow, Concat, FiniteType, Lam, Less, NatLit, Param, Plus, Star, Succ,
    T0, T1, T2, Term, Times, Var, children, print_term, type_of,
)

DEFAULT_FUEL = 10**5


def default_fuel() -> int:
    raw = os.environ.get("HYTW_BUDGET")
    if raw and raw.isdigit() and int(raw) > 0:
        return int(raw)
    return DEFAULT_FUEL


# ---------------------------------------------------------------- pairing

def pair(a: int, b: int) -> int:
    """Cantor pairing."""
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


# ---------------------------------------------------------------- values

class Oracle1:
    """A lazily materialized stream Nat -> Nat with memoization.

    ``queried`` collects every position asked for, in any evaluation.
    """

    __slots__ = ("_fn", "_memo", "queried", "label")

    def __init__(self, fn: Callable[[int], int], label: str = "<stream>"):
        self._fn = fn
        self._memo: dict[int, int] = {}
        self.queried: set[int] = set()
        self.label = label

    def __call__(self, n: int) -> int:
        if n < 0:
            raise ValueError("negative stream position")
        self.queried.add(n)
        memo = self._memo
        if n in memo:
            return memo[n]
        v = self._fn(n)
        if not isinstance(v, int) or v < 0:
            raise TypeMismatch(f"stream {self.label} produced {v!r} at {n}")
        memo[n] = v
        return v

    def take(self, n: int) -> list[int]:
        return [self(i) for i in range(n)]

    def __repr__(self) -> str:
        return f"Oracle1({self.label})"

    @staticmethod
    def prefix(values: Sequence[int], default: int = 0) -> "Oracle1":
        vals = tuple(values)
        label = "prefix " + " ".join(map(str, vals)) + f" default {default}"
        return Oracle1(lambda n: vals[n] if n < len(vals) else default, label)

    @staticmethod
    def const(c: int) -> "Oracle1":
        return Oracle1(lambda n: c, f"const {c}")

    @staticmethod
    def identity() -> "Oracle1":
        return Oracle1(lambda n: n, "identity")

    @staticmethod
    def native(fn: Callable[[int], int], label: str = "<native>") -> "Oracle1":
        return Oracle1(fn, label)

    @staticmethod
    def from_rule(term: Term, env: Mapping | None = None) -> "Oracle1":
        """A stream given by a closed type 1 term, evaluated on demand."""
        if type_of(term) != T1:
            raise TypeMismatch("a rule must have type 1")
        value = eval_term(term, env or {})
        value.label = print_term(term)
        return value


class Functional2:
    """A type 2 functional with a recorded modulus of continuity per argument."""

    __slots__ = ("_fn", "label", "term", "modulus", "_results")

    def __init__(self, fn: Callable[[Oracle1], int], label: str = "<functional>", term: Term | None = None):
        self._fn = fn
        self.label = label
        self.term = term
        self.modulus: dict[Oracle1, frozenset[int]] = {}
        self._results: dict[Oracle1, int] = {}

    def __call__(self, f: Oracle1) -> int:
        if not isinstance(f, Oracle1):
            raise TypeMismatch(f"functional {self.label} applied to {f!r}")
        cached = self._results.get(f)
        if cached is not None:
            return cached
        seen: set[int] = set()

        def probe(n, f=f, seen=seen):
            seen.add(n)
            return f(n)

        v = self._fn(Oracle1(probe, f.label))
        if not isinstance(v, int) or v < 0:
            raise TypeMismatch(f"functional {self.label} produced {v!r}")
        self.modulus[f] = frozenset(seen)
        self._results[f] = v
        return v

    def __repr__(self) -> str:
        return f"Functional2({self.label})"

    @staticmethod
    def native(fn: Callable[[Oracle1], int], label: str = "<native>") -> "Functional2":
        return Functional2(fn, label)

    @staticmethod
    def const(c: int) -> "Functional2":
        return Functional2(lambda f: c, f"const {c}")

    @staticmethod
    def from_term(term: Term, env: Mapping | None = None) -> "Functional2":
        if type_of(term) != T2:
            raise TypeMismatch("a functional term must have type 2")
        value = eval_term(term, env or {})
        if value.term is None:
            value.term = term
            value.label = print_term(term)
        return value


@dataclass
class Closure:
    """A value of a type other than 0, 1, 2 (only inside evaluation)."""

    fn: Callable
    type: FiniteType


Value = Union[int, Oracle1, Functional2, Closure]


# ---------------------------------------------------------------- coding operators

def concat(k: int, r: Oracle1) -> Oracle1:
    """``k`` followed by ``r``."""
    return Oracle1(lambda n: k if n == 0 else r(n - 1), f"{k}^{r.label}")


def star(F: Functional2, r: Oracle1) -> Oracle1:
    """The stream ``k -> F(k ^ r)``."""
    return Oracle1(lambda k: F(concat(k, r)), f"{F.label}*{r.label}")


def hat(F: Functional2) -> Callable[[Oracle1], Oracle1]:
    """``r -> <F(0^r), F(1^r), ...>``, which equals ``r -> F*r``."""
    return lambda r: Oracle1(lambda k: F(concat(k, r)), f"hat({F.label})({r.label})")


def prim_rec(x: int, g: Callable[[int, int], int]) -> Oracle1:
    """``out(0) = x`` and ``out(k+1) = g(out(k), k)``."""
    vals = [x]

    def fn(k):
        while len(vals) <= k:
            vals.append(g(vals[-1], len(vals) - 1))
        return vals[k]

    return Oracle1(fn, f"R0({x})")


def functional_I() -> Functional2:
    return Functional2(lambda s: s(1), "I")


def diag_real(F: Functional2) -> Oracle1:
    """The real r with r(n) = F(constant n), built as r(k) = F(I*(k ^ 0))."""
    I = functional_I()
    zero = Oracle1.const(0)
    return Oracle1(lambda k: F(star(I, concat(k, zero))), f"diag({F.label})")


def even_row_helper() -> Functional2:
    """H(r) = r(2 r(0) + 1), so that (H*r)(k) = r(2k)."""
    return Functional2(lambda r: r(2 * r(0) + 1), "H")


def even_rows(F: Functional2) -> Functional2:
    """G with G(a0, a1, a2, ...) = F(a0, a2, a4, ...), via G(r) = F(H*r)."""
    H = even_row_helper()
    return Functional2(lambda r: F(star(H, r)), f"even({F.label})")


def row_functional() -> Functional2:
    """s -> s(2 + <s(0), s(1)>); F*(k ^ r) is the k-th row of r."""
    return Functional2(lambda s: s(2 + pair(s(0), s(1))), "row")


def row_extract(r: Oracle1, k: int) -> Oracle1:
    """Row k of r, computed as F*(k ^ r); position i holds r(<i, k>)."""
    return star(row_functional(), concat(k, r))


def row_index(k: int, i: int) -> int:
    """Position of r read by row_extract(r, k) at i."""
    return pair(i, k)


def pair_reals(x: Oracle1, y: Oracle1) -> Oracle1:
    return Oracle1(lambda n: pair(x(n), y(n)), f"<{x.label},{y.label}>")


def tilde(c: Union[int, Oracle1]) -> Oracle1:
    """Reals stay as they are; a natural b becomes the constant stream b."""
    return c if isinstance(c, Oracle1) else Oracle1.const(c)


def encode_args(args: Sequence[Union[int, Oracle1]]) -> Oracle1:
    """Right-associated pointwise pairing of the tilde'd arguments."""
    if not args:
        return Oracle1.const(0)
    acc = tilde(args[-1])
    for c in reversed(args[:-1]):
        acc = pair_reals(tilde(c), acc)
    return acc


def project(w: Oracle1, i: int, m: int) -> Oracle1:
    """Component i of an m-fold right-associated pairing."""
    def fn(n):
        z = w(n)
        for _ in range(i):
            z = unpair(z)[1]
        return unpair(z)[0] if i < m - 1 else z
    return Oracle1(fn, f"pi{i}({w.label})")


def projection_functional(i: int, m: int) -> Functional2:
    """F_i with F_i * w = project(w, i, m)."""
    def F(s):
        k = s(0)
        z = s(k + 1)
        for _ in range(i):
            z = unpair(z)[1]
        return unpair(z)[0] if i < m - 1 else z
    return Functional2(F, f"pi{i}/{m}")


def search_functional(pred: Callable[[Oracle1, int], bool], bound: int, label: str = "search") -> Functional2:
    """G(b) = least x < bound with pred(b, x)."""
    def G(b):
        for x in range(bound):
            if pred(b, x):
                return x
        raise WitnessSearchExhausted(f"{label}: no witness below {bound}")
    return Functional2(G, label)


# ---------------------------------------------------------------- evaluation

class _Fuel:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n


def _tick(fuel):
    fuel.left -= 1
    if fuel.left < 0:
        raise NonterminationBudget("evaluation fuel exhausted")


def _apply(f, a, fuel):
    if isinstance(f, Closure):
        return f.fn(a, fuel)
    return f(a)


def _check_value(name, ty, value):
    if ty == T0:
        ok = isinstance(value, int) and value >= 0
    elif ty == T1:
        ok = isinstance(value, Oracle1)
    elif ty == T2:
        ok = isinstance(value, Functional2)
    else:
        ok = isinstance(value, Closure)
    if not ok:
        raise TypeMismatch(f"{name} is bound to {value!r}, expected type {ty}")


def compile_term(t: Term, env: Mapping[str, Value]):
    """Translate ``t`` into a Python function of (locals, fuel)."""
    fn, _ = _compile(t, env)
    return fn


def _compile(t, env):
    if isinstance(t, NatLit):
        v = t.value

        def lit(L, fuel):
            return v
        return lit, T0
    if isinstance(t, (Var, Param)):
        name = t.name
        if isinstance(t, Var):
            outer = env.get(name)

            def var(L, fuel):
                if name in L:
                    return L[name]
                if outer is None:
                    raise UnboundParameter(f"no value for free variable {name}")
                return outer
            if outer is not None:
                _check_value(name, t.type, outer)
            return var, t.type
        if name not in env:
            raise UnboundParameter(f"no value for parameter {name}")
        value = env[name]
        _check_value(name, t.type, value)

        def param(L, fuel):
            return value
        return param, t.type
    if isinstance(t, Lam):
        body, bty = _compile(t.body, env)
        x = t.var
        ty = Arrow(t.var_type, bty)
        label = print_term(t)
        if ty == T1:
            def lam1(L, fuel):
                return Oracle1(lambda n: body({**L, x: n}, _Fuel(default_fuel())), label)
            return lam1, ty
        if ty == T2:
            def lam2(L, fuel):
                return Functional2(lambda f: body({**L, x: f}, _Fuel(default_fuel())), label)
            return lam2, ty

        def lamc(L, fuel):
            return Closure(lambda a, fuel2: body({**L, x: a}, fuel2), ty)
        return lamc, ty
    if isinstance(t, App):
        f, fty = _compile(t.fun, env)
        a, aty = _compile(t.arg, env)
        if not isinstance(fty, Arrow) or fty.domain != aty:
            raise TypeMismatch(f"cannot apply {fty} to {aty}")

        def app(L, fuel):
            _tick(fuel)
            return _apply(f(L, fuel), a(L, fuel), fuel)
        return app, fty.codomain
    if isinstance(t, (Plus, Times, Less)):
        l, lt = _compile(t.left, env)
        r, rt = _compile(t.right, env)
        if lt != T0 or rt != T0:
            raise TypeMismatch("arithmetic on non-numbers")
        if isinstance(t, Plus):
            def plus(L, fuel):
                _tick(fuel)
                return l(L, fuel) + r(L, fuel)
            return plus, T0
        if isinstance(t, Times):
            def times(L, fuel):
                _tick(fuel)
                return l(L, fuel) * r(L, fuel)
            return times, T0

        def less(L, fuel):
            _tick(fuel)
            return 1 if l(L, fuel) < r(L, fuel) else 0
        return less, T0
    if isinstance(t, Succ):
        a, at = _compile(t.arg, env)
        if at != T0:
            raise TypeMismatch("succ of a non-number")

        def suc(L, fuel):
            _tick(fuel)
            return a(L, fuel) + 1
        return suc, T0
    if isinstance(t, Concat):
        h, ht = _compile(t.head, env)
        r, rt = _compile(t.tail, env)
        if ht != T0 or rt != T1:
            raise TypeMismatch("cat expects (0, 1)")

        def cat(L, fuel):
            _tick(fuel)
            return concat(h(L, fuel), r(L, fuel))
        return cat, T1
    if isinstance(t, Star):
        F, Ft = _compile(t.fun, env)
        r, rt = _compile(t.arg, env)
        if Ft != T2 or rt != T1:
            raise TypeMismatch("star expects (2, 1)")

        def st(L, fuel):
            _tick(fuel)
            return star(F(L, fuel), r(L, fuel))
        return st, T1
    raise TypeError(f"not a term: {t!r}")


def eval_term(t: Term, env: Mapping[str, Value] | None = None, fuel: int | None = None) -> Value:
    """Evaluate ``t`` (of type <= 2) with parameters and free variables bound by ``env``."""
    env = env or {}
    fn, ty = _compile(t, env)
    from .terms import level_at_most
    if not level_at_most(ty, 2):
        raise TypeMismatch(f"cannot evaluate a term of type {ty}")
    return fn({}, _Fuel(default_fuel() if fuel is None else fuel))


def continuity_check(F: Functional2, f: Oracle1, alter: Callable[[int, int], int]) -> bool:
    """Re-evaluate F on an oracle that agrees with f on the recorded modulus only."""
    value = F(f)
    modulus = F.modulus[f]
    g = Oracle1(lambda n: f(n) if n in modulus else alter(n, f(n)), "altered")
    fresh = Functional2(F._fn, F.label)
    return fresh(g) == value


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Lt:
    left: Term
    right: Term


@dataclass(frozen=True)
class Le:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    arg: "Formula0"


@dataclass(frozen=True)
class And:
    left: "Formula0"
    right: "Formula0"


@dataclass(frozen=True)
class Or:
    left: "Formula0"
    right: "Formula0"


@dataclass(frozen=True)
class Exists:
    """``exists var < bound . body``"""

    var: str
    bound: Term
    body: "Formula0"


@dataclass(frozen=True)
class Forall:
    """``forall var < bound . body``"""

    var: str
    bound: Term
    body: "Formula0"


Formula0 = Union[Eq, Lt, Le, Not, And, Or, Exists, Forall]
ATOMS = (Eq, Lt, Le)


def formula_depth(phi: Formula0) -> int:
    if isinstance(phi, ATOMS):
        return 0
    if isinstance(phi, Not):
        return 1 + formula_depth(phi.arg)
    if isinstance(phi, (And, Or)):
        return 1 + max(formula_depth(phi.left), formula_depth(phi.right))
    return 1 + formula_depth(phi.body)


def is_quantifier_free(phi: Formula0) -> bool:
    if isinstance(phi, ATOMS):
        return True
    if isinstance(phi, Not):
        return is_quantifier_free(phi.arg)
    if isinstance(phi, (And, Or)):
        return is_quantifier_free(phi.left) and is_quantifier_free(phi.right)
    return False


def atom_terms(phi: Formula0) -> list[Term]:
    """The maximal terms of a formula, left to right (bounds included)."""
    if isinstance(phi, ATOMS):
        return [phi.left, phi.right]
    if isinstance(phi, Not):
        return atom_terms(phi.arg)
    if isinstance(phi, (And, Or)):
        return atom_terms(phi.left) + atom_terms(phi.right)
    return [phi.bound] + atom_terms(phi.body)


def check_formula(phi: Formula0, variables: Mapping[str, FiniteType]) -> None:
    """Raise IllFormedFormula unless every atom compares type 0 terms over ``variables``."""
    from .terms import free_vars
    if isinstance(phi, ATOMS):
        for side in (phi.left, phi.right):
            try:
                ty = type_of(side)
            except Exception as e:
                raise IllFormedFormula(f"ill-typed atom side: {e}") from None
            if ty != T0:
                raise IllFormedFormula("atoms may only compare type 0 terms")
            for name, vty in free_vars(side).items():
                if variables.get(name) != vty:
                    raise IllFormedFormula(f"variable {name} is not among the formula's variables")
        return
    if isinstance(phi, Not):
        return check_formula(phi.arg, variables)
    if isinstance(phi, (And, Or)):
        check_formula(phi.left, variables)
        return check_formula(phi.right, variables)
    if isinstance(phi, (Exists, Forall)):
        check_formula(Eq(phi.bound, phi.bound), variables)
        if phi.var in variables:
            raise IllFormedFormula(f"quantified variable {phi.var} shadows another variable")
        inner = dict(variables)
        inner[phi.var] = T0
        return check_formula(phi.body, inner)
    raise IllFormedFormula(f"not a formula: {phi!r}")


def holds(phi: Formula0, assignment: Mapping[str, Value], env: Mapping[str, Value] | None = None) -> bool:
    """Direct recursive truth evaluation."""
    scope = dict(env or {})
    scope.update(assignment)
    return _holds(phi, scope)


def _holds(phi, scope):
    if isinstance(phi, ATOMS):
        a = eval_term(phi.left, scope)
        b = eval_term(phi.right, scope)
        if isinstance(phi, Eq):
            return a == b
        if isinstance(phi, Lt):
            return a < b
        return a <= b
    if isinstance(phi, Not):
        return not _holds(phi.arg, scope)
    if isinstance(phi, And):
        return _holds(phi.left, scope) and _holds(phi.right, scope)
    if isinstance(phi, Or):
        return _holds(phi.left, scope) or _holds(phi.right, scope)
    n = eval_term(phi.bound, scope)
    results = (_holds(phi.body, {**scope, phi.var: x}) for x in range(n))
    return any(results) if isinstance(phi, Exists) else all(results)


def represent_formula(phi: Formula0, free: Sequence[tuple[str, FiniteType]],
                      env: Mapping[str, Value] | None = None) -> Functional2:
    """A functional F with F(<args>_R) = 1 iff phi holds of the args.

    ``free`` lists the formula's variables in encoding order; at most one may
    have type 1.  Quantifier-free parts are decided directly, negation is
    ``1 - F`` and a bounded existential is the counting functional built with
    :func:`prim_rec`.
    """
    names = [n for n, _ in free]
    types = dict(free)
    if len(names) != len(set(names)):
        raise IllFormedFormula("repeated variable")
    if sum(1 for _, ty in free if ty == T1) > 1:
        raise IllFormedFormula("at most one type 1 variable")
    if any(ty not in (T0, T1) for _, ty in free):
        raise IllFormedFormula("variables must have type 0 or 1")
    check_formula(phi, types)
    return _represent(phi, list(free), dict(env or {}))


def _decoder(free, env):
    m = len(free)

    def decode(w: Oracle1) -> dict:
        out = dict(env)
        for i, (name, ty) in enumerate(free):
            comp = project(w, i, m)
            out[name] = comp if ty == T1 else comp(0)
        return out
    return decode


def _represent(phi, free, env) -> Functional2:
    if is_quantifier_free(phi):
        decode = _decoder(free, env)
        return Functional2(lambda w: 1 if _holds(phi, decode(w)) else 0, "qf")
    if isinstance(phi, Not):
        F = _represent(phi.arg, free, env)
        return Functional2(lambda w: 1 - F(w), "not")
    if isinstance(phi, And):
        A, B = _represent(phi.left, free, env), _represent(phi.right, free, env)
        return Functional2(lambda w: A(w) * B(w), "and")
    if isinstance(phi, Or):
        A, B = _represent(phi.left, free, env), _represent(phi.right, free, env)
        return Functional2(lambda w: 1 if A(w) + B(w) > 0 else 0, "or")
    if isinstance(phi, Forall):
        return _represent(Not(Exists(phi.var, phi.bound, Not(phi.body))), free, env)
    # exists x < t . psi
    decode = _decoder(free, env)
    bound = phi.bound
    Fb = Functional2(lambda w: eval_term(bound, decode(w)), "bound")
    G = _represent(phi.body, [(phi.var, T0)] + free, env)
    nfree = len(free)

    def with_x(x: int, w: Oracle1) -> Oracle1:
        return Oracle1.const(x) if nfree == 0 else pair_reals(Oracle1.const(x), w)

    def H(w):
        # R0(0, g)(F(w)) with g(<a, k>) = a + G(<k, w>)
        g = lambda a, k: (lambda z: unpair(z)[0] + G(with_x(unpair(z)[1], w)))(pair(a, k))
        return prim_rec(0, g)(Fb(w))

    return Functional2(lambda w: 1 if H(w) > 0 else 0, "exists")


def represented_value(F: Functional2, args: Sequence[Union[int, Oracle1]]) -> int:
    return F(encode_args(args))


# ---------------------------------------------------------------- environment files

def parse_env_file(text: str, signature: Mapping[str, FiniteType]) -> dict[str, Value]:
    """Bind parameters, one per line: ``NAME = N``, ``NAME = prefix 3 1 4 default 0``,
    ``NAME = const N`` or ``NAME = TERM`` (a closed term that may use earlier bindings).
    """
    from .errors import SyntaxError_
    from .terms import parse_term

    env: dict[str, Value] = {}
    scope: dict[str, FiniteType] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        name, eq, rhs = line.partition("=")
        name, rhs = name.strip(), rhs.strip()
        if not eq or not name or not rhs:
            raise SyntaxError_(f"line {lineno}: expected NAME = VALUE")
        if name not in signature:
            raise UnboundParameter(f"line {lineno}: {name} is not a declared parameter")
        if name in env:
            raise SyntaxError_(f"line {lineno}: {name} bound twice")
        ty = signature[name]
        toks = rhs.split()
        try:
            if toks[0] == "prefix":
                default = 0
                if "default" in toks:
                    k = toks.index("default")
                    if k != len(toks) - 2:
                        raise ValueError("default takes one natural at the end")
                    default = int(toks[k + 1])
                    toks = toks[:k]
                vals = [int(v) for v in toks[1:]]
                if default < 0 or any(v < 0 for v in vals):
                    raise ValueError("negative value")
                value: Value = Oracle1.prefix(vals, default)
            elif toks[0] == "const" and len(toks) == 2:
                value = Oracle1.const(int(toks[1]))
            elif len(toks) == 1 and toks[0].isdigit():
                value = int(toks[0])
            else:
                t = parse_term(rhs, scope)
                value = eval_term(t, env)
                if isinstance(value, (Oracle1, Functional2)):
                    value.label = print_term(t)
        except ValueError as e:
            raise SyntaxError_(f"line {lineno}: {e}") from None
        _check_value(name, ty, value)
        env[name] = value
        scope[name] = ty
    return env
