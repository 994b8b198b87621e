"""Ordinals below epsilon_0 in Cantor normal form, plus the tag alphabet.

An ordinal is a descending sum ``w^e1*c1 + ... + w^ek*ck`` with exponents that
are themselves ordinals.  Tags extend the ordinals by a top element ``INF``
whose order is deliberately not irreflexive: ``tag_gt(INF, INF)`` is true.
"""

from __future__ import annotations

import enum
import functools
import random
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import SyntaxError_


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@functools.total_ordering
@dataclass(frozen=True)
class Ordinal:
    """CNF ordinal.  ``terms`` holds (exponent, coefficient) pairs, exponents strictly decreasing."""

    terms: tuple[tuple["Ordinal", int], ...] = ()

    def __post_init__(self):
        prev = None
        for e, c in self.terms:
            if not isinstance(c, int) or c < 1:
                raise ValueError(f"coefficient must be a positive int, got {c!r}")
            if prev is not None and cmp(e, prev) != Ordering.LESS:
                raise ValueError("exponents must be strictly decreasing")
            prev = e

    @staticmethod
    def of(n: int) -> "Ordinal":
        if n < 0:
            raise ValueError("ordinals are non-negative")
        return _nat(n)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return all(e.is_zero for e, _ in self.terms)

    @property
    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero

    def finite_value(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def predecessor(self) -> "Ordinal":
        if not self.is_successor:
            raise ValueError(f"{self} has no predecessor")
        *head, (e, c) = self.terms
        if c > 1:
            head.append((e, c - 1))
        return Ordinal(tuple(head))

    def __lt__(self, other):
        if not isinstance(other, Ordinal):
            return NotImplemented
        return cmp(self, other) == Ordering.LESS

    def __add__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        return add(self, other)

    def __mul__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return mul_nat(self, n)

    def __str__(self) -> str:
        return print_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal({print_ordinal(self)!r})"


@functools.lru_cache(maxsize=None)
def _nat(n: int) -> Ordinal:
    return Ordinal(((ZERO, n),)) if n else ZERO


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def omega_power(e: Ordinal, c: int = 1) -> Ordinal:
    return Ordinal(((e, c),))


def cmp(a: Ordinal, b: Ordinal) -> Ordering:
    """Lexicographic comparison of Cantor normal forms."""
    if a is b:
        return Ordering.EQUAL
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = cmp(ea, eb)
        if c != Ordering.EQUAL:
            return c
        if ca != cb:
            return Ordering.LESS if ca < cb else Ordering.GREATER
    if len(a.terms) == len(b.terms):
        return Ordering.EQUAL
    return Ordering.LESS if len(a.terms) < len(b.terms) else Ordering.GREATER


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinal sum; terms of ``a`` below the leading exponent of ``b`` are absorbed."""
    if b.is_zero:
        return a
    lead, lead_c = b.terms[0]
    kept = []
    for e, c in a.terms:
        o = cmp(e, lead)
        if o == Ordering.GREATER:
            kept.append((e, c))
        elif o == Ordering.EQUAL:
            kept.append((e, c + lead_c))
            return Ordinal(tuple(kept) + b.terms[1:])
        else:
            break
    return Ordinal(tuple(kept) + b.terms)


def succ(a: Ordinal) -> Ordinal:
    return add(a, ONE)


def mul_nat(a: Ordinal, n: int) -> Ordinal:
    """Right multiplication by a natural number."""
    if n < 0:
        raise ValueError("negative multiplier")
    if n == 0 or a.is_zero:
        return ZERO
    (e, c), *rest = a.terms
    if e.is_zero:
        return Ordinal.of(c * n)
    return Ordinal(((e, c * n), *rest))


def max_plus_one(values: Iterable[Ordinal]) -> Ordinal:
    """Least ordinal strictly above every member (0 for the empty set)."""
    best = None
    for v in values:
        if best is None or v > best:
            best = v
    return ZERO if best is None else succ(best)


def cnf_size(a: Ordinal) -> int:
    return sum(1 + cnf_size(e) for e, _ in a.terms)


# ---------------------------------------------------------------- syntax

def print_ordinal(a: Ordinal) -> str:
    if a.is_zero:
        return "0"
    parts = []
    for e, c in a.terms:
        if e.is_zero:
            parts.append(str(c))
            continue
        if e == ONE:
            base = "w"
        elif e.is_finite or e == OMEGA:
            base = f"w^{print_ordinal(e)}"
        else:
            base = f"w^({print_ordinal(e)})"
        parts.append(base if c == 1 else f"{base}*{c}")
    return "+".join(parts)


class _OrdinalParser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def peek(self) -> str:
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1
        return self.text[self.i] if self.i < len(self.text) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            raise SyntaxError_(f"expected {ch!r} in ordinal {self.text!r}", self.i)
        self.i += 1

    def nat(self) -> int:
        self.peek()
        j = self.i
        while j < len(self.text) and self.text[j].isdigit():
            j += 1
        if j == self.i:
            raise SyntaxError_(f"expected a natural number in ordinal {self.text!r}", self.i)
        n = int(self.text[self.i:j])
        self.i = j
        return n

    def expr(self) -> Ordinal:
        value = self.term()
        while self.peek() == "+":
            self.i += 1
            value = add(value, self.term())
        return value

    def term(self) -> Ordinal:
        value = self.factor()
        while self.peek() == "*":
            self.i += 1
            value = mul_nat(value, self.nat())
        return value

    def factor(self) -> Ordinal:
        ch = self.peek()
        if ch.isdigit():
            return Ordinal.of(self.nat())
        if ch in ("w", "ω"):
            self.i += 1
            if self.peek() == "^":
                self.i += 1
                return omega_power(self.factor())
            return OMEGA
        if ch == "(":
            self.i += 1
            value = self.expr()
            self.take(")")
            return value
        raise SyntaxError_(f"unexpected {ch!r} in ordinal {self.text!r}" if ch else
                           f"unexpected end of ordinal {self.text!r}", self.i)


def parse_ordinal(text: str) -> Ordinal:
    """Parse ``w^E*C + ...`` notation (``w`` or ``ω``), normalizing to CNF."""
    p = _OrdinalParser(text)
    value = p.expr()
    if p.peek():
        raise SyntaxError_(f"trailing input in ordinal {text!r}", p.i)
    return value


# ---------------------------------------------------------------- tags

class Infinity:
    """The top tag.  Singleton; compares above everything including itself under ``tag_gt``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()

Tag = Union[Ordinal, Infinity]


def tag_gt(a: Tag, b: Tag) -> bool:
    """``a > b`` with ``INF > x`` for every tag x, including ``INF`` itself."""
    if a is INF:
        return True
    if b is INF:
        return False
    return a > b


def tag_lt(a: Tag, b: Tag) -> bool:
    """The ordinary strict order: ``INF < INF`` is false."""
    if a is INF:
        return False
    if b is INF:
        return True
    return a < b


def tag_at_least(t: Tag, alpha: Ordinal) -> bool:
    """True when ``t`` is ``INF`` or a finite tag ``>= alpha``."""
    return t is INF or not t < alpha


def parse_tag(text: str) -> Tag:
    s = text.strip()
    if s in ("inf", "∞"):
        return INF
    return parse_ordinal(s)


def print_tag(t: Tag) -> str:
    return "inf" if t is INF else print_ordinal(t)


# ---------------------------------------------------------------- generators

def random_ordinal(rng: random.Random, max_size: int = 8, max_coeff: int = 5, depth: int = 2) -> Ordinal:
    """A random CNF ordinal with at most ``max_size`` nodes in its term tree."""
    n_terms = rng.randint(0, max(0, min(4, max_size)))
    exps = []
    budget = max_size - n_terms
    for _ in range(n_terms):
        if depth > 0 and budget > 0 and rng.random() < 0.6:
            e = random_ordinal(rng, max_size=min(budget, 3), max_coeff=3, depth=depth - 1)
            budget -= cnf_size(e)
        else:
            e = ZERO
        exps.append(e)
    distinct = sorted(set(exps), reverse=True)
    return Ordinal(tuple((e, rng.randint(1, max_coeff)) for e in distinct))
