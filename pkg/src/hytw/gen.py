"""Random generators for terms, types, streams and functionals used by the test suites."""

from __future__ import annotations

import random
from typing import Mapping

from .semantics import Functional2, Oracle1, Value
from .terms import (
    App, Arrow, Concat, FiniteType, Lam, Less, NatLit, Param, Plus, Star, Succ, T0, T1, T2,
    Term, Times, Var, Zero,
)

DEFAULT_SIGNATURE: dict[str, FiniteType] = {"a": T0, "b": T0, "r": T1, "s": T1, "F": T2, "G": T2}

NAMES = ("x", "y", "z", "u", "v", "w", "f", "g", "h", "k")


def random_type(rng: random.Random, height: int) -> FiniteType:
    """A random finite type of height at most ``height``."""
    if height <= 0 or rng.random() < 0.35:
        return T0
    return Arrow(random_type(rng, height - 1), random_type(rng, height - 1))


def all_types(height: int) -> list[FiniteType]:
    if height <= 0:
        return [T0]
    smaller = all_types(height - 1)
    return [T0] + [Arrow(a, b) for a in smaller for b in smaller]


class TermGen:
    """Type-directed generator of well-typed terms.

    ``star_lambda`` allows abstractions in the functional position of ``star``;
    by default that position holds a type 2 parameter, as in the base language
    where ``*`` combines L3 terms only.
    """

    def __init__(self, rng: random.Random, sig: Mapping[str, FiniteType] | None = None,
                 star_lambda: bool = False, max_type_height: int = 2, redex_bias: float = 0.25):
        self.rng = rng
        self.sig = dict(DEFAULT_SIGNATURE if sig is None else sig)
        self.star_lambda = star_lambda
        self.max_type_height = max_type_height
        self.redex_bias = redex_bias
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"{self.rng.choice(NAMES)}{self.counter}"

    def _vars_of(self, ctx, ty):
        return [Var(n, t) for n, t in ctx.items() if t == ty] + \
               [Param(n, t) for n, t in self.sig.items() if t == ty]

    def leaf(self, ty: FiniteType, ctx) -> Term:
        atoms = self._vars_of(ctx, ty)
        if atoms and self.rng.random() < 0.7:
            return self.rng.choice(atoms)
        if isinstance(ty, Zero):
            return NatLit(self.rng.randint(0, 4))
        x = self.fresh()
        inner = dict(ctx)
        inner[x] = ty.domain
        return Lam(x, ty.domain, self.leaf(ty.codomain, inner))

    def term(self, ty: FiniteType, size: int, ctx: Mapping[str, FiniteType] | None = None) -> Term:
        """A term of type ``ty`` with at most roughly ``size`` nodes."""
        return self._gen(ty, max(1, size), dict(ctx or {}))

    def _gen(self, ty, size, ctx) -> Term:
        rng = self.rng
        if size <= 2:
            return self.leaf(ty, ctx)
        if rng.random() < self.redex_bias and size >= 5:
            return self._redex(ty, size, ctx)
        if isinstance(ty, Zero):
            return self._gen0(size, ctx)
        choices = ["lam", "lam", "app"]
        if ty == T1:
            choices += ["cat", "star"]
        if self._vars_of(ctx, ty):
            choices.append("atom")
        pick = rng.choice(choices)
        if pick == "atom":
            return rng.choice(self._vars_of(ctx, ty))
        if pick == "cat":
            k = rng.randint(1, size - 2)
            return Concat(self._gen(T0, k, ctx), self._gen(T1, size - 1 - k, ctx))
        if pick == "star":
            return self._star(size, ctx)
        if pick == "app":
            return self._app(ty, size, ctx)
        x = self.fresh()
        inner = dict(ctx)
        inner[x] = ty.domain
        return Lam(x, ty.domain, self._gen(ty.codomain, size - 1, inner))

    def _star(self, size, ctx) -> Term:
        rng = self.rng
        k = rng.randint(1, max(1, size - 2))
        if self.star_lambda and rng.random() < 0.5:
            fun = self._gen(T2, k, ctx)
        else:
            fs = [Param(n, t) for n, t in self.sig.items() if t == T2]
            fun = rng.choice(fs) if fs else self._gen(T2, k, ctx)
            k = 1
        return Star(fun, self._gen(T1, max(1, size - 1 - k), ctx))

    def _gen0(self, size, ctx) -> Term:
        rng = self.rng
        pick = rng.choice(["plus", "times", "less", "succ", "app", "app", "app"])
        if pick == "succ":
            return Succ(self._gen(T0, size - 1, ctx))
        if pick in ("plus", "times", "less"):
            k = rng.randint(1, size - 2)
            a, b = self._gen(T0, k, ctx), self._gen(T0, size - 1 - k, ctx)
            return {"plus": Plus, "times": Times, "less": Less}[pick](a, b)
        return self._app(T0, size, ctx)

    def _app(self, ty, size, ctx) -> Term:
        """An application whose head is an atom when one fits, else any term."""
        rng = self.rng
        heads = []
        for n, t in list(ctx.items()) + list(self.sig.items()):
            args = []
            cur = t
            while isinstance(cur, Arrow):
                args.append(cur.domain)
                cur = cur.codomain
                if cur == ty:
                    heads.append((Var(n, t) if n in ctx else Param(n, t), list(args)))
        if heads and rng.random() < 0.75:
            head, args = rng.choice(heads)
            out = head
            share = max(1, (size - 1) // len(args))
            for a in args:
                out = App(out, self._gen(a, share, ctx))
            return out
        dom = random_type(rng, self.max_type_height - 1)
        k = rng.randint(1, size - 2)
        return App(self._gen(Arrow(dom, ty), size - 1 - k, ctx), self._gen(dom, k, ctx))

    def _redex(self, ty, size, ctx) -> Term:
        rng = self.rng
        dom = random_type(rng, self.max_type_height)
        x = self.fresh()
        inner = dict(ctx)
        inner[x] = dom
        k = rng.randint(1, size - 3)
        return App(Lam(x, dom, self._gen(ty, size - 2 - k, inner)), self._gen(dom, k, ctx))


def random_closed_term(rng: random.Random, ty: FiniteType, max_size: int, **kw) -> Term:
    """A closed term of type ``ty`` with at most ``max_size`` nodes (rejection on overshoot)."""
    from .terms import size as term_size
    gen = TermGen(rng, **kw)
    while True:
        t = gen.term(ty, rng.randint(1, max_size))
        if term_size(t) <= max_size:
            return t


# ---------------------------------------------------------------- semantic values

def random_stream(rng: random.Random, length: int = 12, top: int = 9) -> Oracle1:
    kind = rng.random()
    if kind < 0.6:
        return Oracle1.prefix([rng.randint(0, top) for _ in range(rng.randint(0, length))],
                              rng.randint(0, top))
    a, b, m = rng.randint(0, 3), rng.randint(0, 5), rng.randint(2, 11)
    return Oracle1.native(lambda n: (a * n + b) % m, f"({a}n+{b}) mod {m}")


def random_functional(rng: random.Random, size: int = 10) -> Functional2:
    """A continuous functional given by a random closed type 2 term without parameters."""
    gen = TermGen(rng, sig={}, redex_bias=0.1)
    return Functional2.from_term(gen.term(T2, size))


def random_env(rng: random.Random, sig: Mapping[str, FiniteType] | None = None) -> dict[str, Value]:
    env: dict[str, Value] = {}
    for name, ty in (DEFAULT_SIGNATURE if sig is None else sig).items():
        if ty == T0:
            env[name] = rng.randint(0, 9)
        elif ty == T1:
            env[name] = random_stream(rng)
        elif ty == T2:
            env[name] = random_functional(rng)
        else:
            raise ValueError(f"no random values of type {ty}")
    return env
