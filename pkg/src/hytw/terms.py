"""Finite types and the term language, with an S-expression concrete syntax.

Types are ``0`` or ``(-> s t)``.  Terms::

    n                      natural literal
    x                      variable (bound by an enclosing lam) or parameter
    (lam (x T) body)       abstraction
    (f a)                  application, printed fully parenthesized: ((F x) y)
    (+ a b) (* a b)        arithmetic
    (succ a)
    (< a b)                0/1-valued comparison
    (cat k r)              k followed by the stream r
    (star F r)             the stream k -> F(k cat r)

A term file is a sequence of ``param NAME TYPE`` header lines followed by
terms, one S-expression each.  ``;`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .errors import SyntaxError_, TypeMismatch, UnboundVariable


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class Zero:
    def __str__(self) -> str:
        return "0"


@dataclass(frozen=True)
class Arrow:
    domain: "FiniteType"
    codomain: "FiniteType"

    def __str__(self) -> str:
        return f"(-> {self.domain} {self.codomain})"


FiniteType = Union[Zero, Arrow]

T0 = Zero()
T1 = Arrow(T0, T0)
T2 = Arrow(T1, T0)
T3 = Arrow(T2, T0)


def standard_type(n: int) -> FiniteType:
    t: FiniteType = T0
    for _ in range(n):
        t = Arrow(t, T0)
    return t


def is_standard(t: FiniteType) -> bool:
    while isinstance(t, Arrow):
        if t.codomain != T0:
            return False
        t = t.domain
    return True


def standard_level(t: FiniteType) -> int | None:
    """The natural number n with t = standard type n, or None."""
    n = 0
    while isinstance(t, Arrow):
        if t.codomain != T0:
            return None
        t = t.domain
        n += 1
    return n


def type_height(t: FiniteType) -> int:
    if isinstance(t, Zero):
        return 0
    return 1 + max(type_height(t.domain), type_height(t.codomain))


def level_at_most(t: FiniteType, n: int) -> bool:
    lvl = standard_level(t)
    return lvl is not None and lvl <= n


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class NatLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str
    type: FiniteType


@dataclass(frozen=True)
class Param:
    """A parameter; its value is looked up by name in the evaluation environment."""

    name: str
    type: FiniteType


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Lam:
    var: str
    var_type: FiniteType
    body: "Term"


@dataclass(frozen=True)
class Plus:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Times:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Succ:
    arg: "Term"


@dataclass(frozen=True)
class Less:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Concat:
    head: "Term"
    tail: "Term"


@dataclass(frozen=True)
class Star:
    fun: "Term"
    arg: "Term"


Term = Union[NatLit, Var, Param, App, Lam, Plus, Times, Succ, Less, Concat, Star]

Signature = Mapping[str, FiniteType]

BINARY_ARITH = (Plus, Times, Less)


def children(t: Term) -> tuple:
    if isinstance(t, (NatLit, Var, Param)):
        return ()
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, Succ):
        return (t.arg,)
    if isinstance(t, (Plus, Times, Less)):
        return (t.left, t.right)
    if isinstance(t, Concat):
        return (t.head, t.tail)
    if isinstance(t, Star):
        return (t.fun, t.arg)
    raise TypeError(f"not a term: {t!r}")


def rebuild(t: Term, kids) -> Term:
    """Same constructor as ``t`` with new children."""
    if isinstance(t, App):
        return App(kids[0], kids[1])
    if isinstance(t, Lam):
        return Lam(t.var, t.var_type, kids[0])
    if isinstance(t, Succ):
        return Succ(kids[0])
    if isinstance(t, (Plus, Times, Less, Concat, Star)):
        return type(t)(kids[0], kids[1])
    return t


def size(t: Term) -> int:
    return 1 + sum(size(c) for c in children(t))


def subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(children(s)))


def free_vars(t: Term) -> dict[str, FiniteType]:
    out: dict[str, FiniteType] = {}

    def go(s, bound):
        if isinstance(s, Var):
            if s.name not in bound:
                out[s.name] = s.type
        elif isinstance(s, Lam):
            go(s.body, bound | {s.var})
        else:
            for c in children(s):
                go(c, bound)

    go(t, frozenset())
    return out


def params(t: Term) -> dict[str, FiniteType]:
    return {s.name: s.type for s in subterms(t) if isinstance(s, Param)}


def binder_names(t: Term) -> set[str]:
    return {s.var for s in subterms(t) if isinstance(s, Lam)}


def all_names(t: Term) -> set[str]:
    names = set()
    for s in subterms(t):
        if isinstance(s, (Var, Param)):
            names.add(s.name)
        elif isinstance(s, Lam):
            names.add(s.var)
    return names


def is_lambda_free(t: Term) -> bool:
    return not any(isinstance(s, Lam) for s in subterms(t))


def freshness_violation(t: Term) -> str | None:
    """Name of a variable bound twice along one root-to-leaf path, if any."""

    def go(s, bound):
        if isinstance(s, Lam):
            if s.var in bound:
                return s.var
            bound = bound | {s.var}
        for c in children(s):
            hit = go(c, bound)
            if hit is not None:
                return hit
        return None

    return go(t, frozenset())


# ---------------------------------------------------------------- typing

def type_of(t: Term, sig: Signature | None = None, ctx: Mapping[str, FiniteType] | None = None) -> FiniteType:
    """Type of ``t``.  Variables carry their own type; ``ctx`` only checks free ones are declared.

    Parameters must be declared in ``sig`` when ``sig`` is given.
    """
    return _type_of(t, sig, dict(ctx) if ctx is not None else None)


def _type_of(t, sig, ctx):
    if isinstance(t, NatLit):
        if t.value < 0:
            raise TypeMismatch("negative literal")
        return T0
    if isinstance(t, Var):
        if ctx is not None and t.name not in ctx:
            raise UnboundVariable(f"unbound variable {t.name}")
        if ctx is not None and ctx[t.name] != t.type:
            raise TypeMismatch(f"variable {t.name} used at type {t.type}, bound at {ctx[t.name]}")
        return t.type
    if isinstance(t, Param):
        if sig is not None:
            if t.name not in sig:
                raise UnboundVariable(f"undeclared parameter {t.name}")
            if sig[t.name] != t.type:
                raise TypeMismatch(f"parameter {t.name} declared {sig[t.name]}, used at {t.type}")
        return t.type
    if isinstance(t, Lam):
        inner = None
        if ctx is not None:
            inner = dict(ctx)
            inner[t.var] = t.var_type
        return Arrow(t.var_type, _type_of(t.body, sig, inner))
    if isinstance(t, App):
        f = _type_of(t.fun, sig, ctx)
        a = _type_of(t.arg, sig, ctx)
        if not isinstance(f, Arrow) or f.domain != a:
            raise TypeMismatch(f"cannot apply {f} to {a}")
        return f.codomain
    if isinstance(t, (Plus, Times, Less)):
        for side in (t.left, t.right):
            if _type_of(side, sig, ctx) != T0:
                raise TypeMismatch(f"{type(t).__name__} expects type 0 operands")
        return T0
    if isinstance(t, Succ):
        if _type_of(t.arg, sig, ctx) != T0:
            raise TypeMismatch("succ expects a type 0 operand")
        return T0
    if isinstance(t, Concat):
        if _type_of(t.head, sig, ctx) != T0 or _type_of(t.tail, sig, ctx) != T1:
            raise TypeMismatch("cat expects (type 0, type 1)")
        return T1
    if isinstance(t, Star):
        if _type_of(t.fun, sig, ctx) != T2 or _type_of(t.arg, sig, ctx) != T1:
            raise TypeMismatch("star expects (type 2, type 1)")
        return T1
    raise TypeError(f"not a term: {t!r}")


def typecheck_closed(t: Term, sig: Signature | None = None,
                     free: Mapping[str, FiniteType] | None = None) -> FiniteType:
    """Type of ``t``, requiring every free variable to appear in ``free``."""
    return type_of(t, sig, free or {})


# ---------------------------------------------------------------- printing

_KEYWORD = {Plus: "+", Times: "*", Less: "<", Concat: "cat", Star: "star"}
KEYWORDS = {"lam", "+", "*", "<", "succ", "cat", "star", "->", "param", "def"}


def print_type(t: FiniteType) -> str:
    return str(t)


def print_term(t: Term) -> str:
    out: list[str] = []
    _emit(t, out)
    return "".join(out)


def _emit(t, out):
    if isinstance(t, NatLit):
        out.append(str(t.value))
    elif isinstance(t, (Var, Param)):
        out.append(t.name)
    elif isinstance(t, Lam):
        out.append(f"(lam ({t.var} {t.var_type}) ")
        _emit(t.body, out)
        out.append(")")
    elif isinstance(t, App):
        out.append("(")
        _emit(t.fun, out)
        out.append(" ")
        _emit(t.arg, out)
        out.append(")")
    elif isinstance(t, Succ):
        out.append("(succ ")
        _emit(t.arg, out)
        out.append(")")
    else:
        a, b = children(t)
        out.append(f"({_KEYWORD[type(t)]} ")
        _emit(a, out)
        out.append(" ")
        _emit(b, out)
        out.append(")")


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s();]+))")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


@dataclass
class _Sexp:
    items: list
    pos: int


@dataclass
class _Atom:
    text: str
    pos: int


def _read_all(text: str) -> list:
    """Read every S-expression in ``text``."""
    stack: list[_Sexp] = []
    top: list = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None or m.end() == i:
            if text[i:].strip() == "":
                break
            raise SyntaxError_(f"unreadable input {text[i:i + 10]!r}", i)
        i = m.end()
        if m.group(1):
            continue
        if m.group(2):
            stack.append(_Sexp([], m.start(2)))
        elif m.group(3):
            if not stack:
                raise SyntaxError_("unbalanced ')'", m.start(3))
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        elif m.group(4):
            atom = _Atom(m.group(4), m.start(4))
            (stack[-1].items if stack else top).append(atom)
    if stack:
        raise SyntaxError_("unbalanced '('", stack[-1].pos)
    return top


def _type_from(sx) -> FiniteType:
    if isinstance(sx, _Atom):
        if sx.text.isdigit():
            return standard_type(int(sx.text))
        raise SyntaxError_(f"bad type {sx.text!r}", sx.pos)
    items = sx.items
    if len(items) == 3 and isinstance(items[0], _Atom) and items[0].text == "->":
        return Arrow(_type_from(items[1]), _type_from(items[2]))
    raise SyntaxError_("bad type expression", sx.pos)


def parse_type(text: str) -> FiniteType:
    forms = _read_all(text)
    if len(forms) != 1:
        raise SyntaxError_("expected exactly one type", 0)
    return _type_from(forms[0])


class _TermBuilder:
    def __init__(self, sig: Signature, free: Mapping[str, FiniteType]):
        self.sig = sig
        self.free = free

    def build(self, sx, scope: dict[str, FiniteType]) -> Term:
        if isinstance(sx, _Atom):
            return self.atom(sx, scope)
        items = sx.items
        if not items:
            raise SyntaxError_("empty list", sx.pos)
        head = items[0]
        if isinstance(head, _Atom) and head.text in KEYWORDS:
            return self.special(head, items, sx, scope)
        if len(items) < 2:
            raise SyntaxError_("application needs an argument", sx.pos)
        t = self.build(head, scope)
        for arg in items[1:]:
            t = App(t, self.build(arg, scope))
            self.check(t, sx.pos)
        return t

    def check(self, t, pos):
        try:
            _type_of(t, None, None)
        except TypeMismatch as e:
            raise TypeMismatch(f"{e} (at offset {pos})") from None

    def atom(self, a: _Atom, scope) -> Term:
        s = a.text
        if s.isdigit():
            return NatLit(int(s))
        if not _IDENT.match(s) or s in KEYWORDS:
            raise SyntaxError_(f"bad identifier {s!r}", a.pos)
        if s in scope:
            return Var(s, scope[s])
        if s in self.sig:
            return Param(s, self.sig[s])
        if s in self.free:
            return Var(s, self.free[s])
        raise UnboundVariable(f"unbound name {s!r} at offset {a.pos}")

    def special(self, head: _Atom, items, sx, scope) -> Term:
        kw = head.text
        args = items[1:]

        def arity(n):
            if len(args) != n:
                raise SyntaxError_(f"{kw} takes {n} arguments", sx.pos)

        if kw == "lam":
            arity(2)
            binder = args[0]
            if not (isinstance(binder, _Sexp) and len(binder.items) == 2 and isinstance(binder.items[0], _Atom)):
                raise SyntaxError_("lam binder must be (name type)", sx.pos)
            name = binder.items[0].text
            if not _IDENT.match(name) or name in KEYWORDS:
                raise SyntaxError_(f"bad binder name {name!r}", binder.pos)
            if name in scope:
                raise SyntaxError_(f"variable {name!r} rebound inside its own scope", binder.pos)
            ty = _type_from(binder.items[1])
            inner = dict(scope)
            inner[name] = ty
            return Lam(name, ty, self.build(args[1], inner))
        if kw == "succ":
            arity(1)
            t = Succ(self.build(args[0], scope))
        elif kw in ("+", "*", "<", "cat", "star"):
            arity(2)
            ctor = {"+": Plus, "*": Times, "<": Less, "cat": Concat, "star": Star}[kw]
            t = ctor(self.build(args[0], scope), self.build(args[1], scope))
        else:
            raise SyntaxError_(f"keyword {kw!r} not allowed here", head.pos)
        self.check(t, sx.pos)
        return t


def parse_term(text: str, sig: Signature | None = None, free: Mapping[str, FiniteType] | None = None) -> Term:
    """Parse one term.  Names resolve to enclosing binders, then ``sig`` parameters, then ``free`` variables."""
    forms = _read_all(text)
    if len(forms) != 1:
        raise SyntaxError_(f"expected exactly one term, found {len(forms)}", 0)
    return _TermBuilder(sig or {}, free or {}).build(forms[0], {})


@dataclass
class TermFile:
    """Declared parameters, named definitions (in dependency order) and the terms themselves.

    A definition ``def NAME TERM`` introduces a closed term that later lines
    may use as a parameter of its type.
    """

    signature: dict[str, FiniteType] = field(default_factory=dict)
    terms: list[Term] = field(default_factory=list)
    defs: dict[str, Term] = field(default_factory=dict)

    def scope(self) -> dict[str, FiniteType]:
        """Parameter types visible to the terms: declared params plus definitions."""
        out = dict(self.signature)
        for name, t in self.defs.items():
            out[name] = type_of(t, out)
        return out


def parse_term_file(text: str) -> TermFile:
    sig: dict[str, FiniteType] = {}
    defs: dict[str, Term] = {}
    scope: dict[str, FiniteType] = {}
    # header lines are line-oriented; blank them out before reading terms
    body_lines = []
    offset = 0
    for line in text.splitlines():
        stripped = line.split(";", 1)[0].strip()
        head = stripped.split(None, 1)[0] if stripped else ""
        if head == "param":
            parts = stripped.split(None, 2)
            if len(parts) != 3:
                raise SyntaxError_(f"bad param line {line!r}", offset)
            name = parts[1]
            _check_header_name(name, scope, offset)
            sig[name] = scope[name] = parse_type(parts[2])
            body_lines.append(" " * len(line))
        elif head == "def":
            parts = stripped.split(None, 2)
            if len(parts) != 3:
                raise SyntaxError_(f"bad def line {line!r}", offset)
            name = parts[1]
            _check_header_name(name, scope, offset)
            t = parse_term(parts[2], scope)
            if free_vars(t):
                raise UnboundVariable(f"definition {name} has free variables {sorted(free_vars(t))}")
            defs[name] = t
            scope[name] = type_of(t, scope)
            body_lines.append(" " * len(line))
        else:
            body_lines.append(line)
        offset += len(line) + 1
    builder = _TermBuilder(scope, {})
    return TermFile(sig, [builder.build(sx, {}) for sx in _read_all("\n".join(body_lines))], defs)


def _check_header_name(name: str, scope, offset: int) -> None:
    if not _IDENT.match(name) or name in KEYWORDS:
        raise SyntaxError_(f"bad name {name!r}", offset)
    if name in scope:
        raise SyntaxError_(f"{name} declared twice", offset)


def print_term_file(tf: TermFile) -> str:
    lines = [f"param {name} {print_type(ty)}" for name, ty in tf.signature.items()]
    lines += [f"def {name} {print_term(t)}" for name, t in tf.defs.items()]
    lines += [print_term(t) for t in tf.terms]
    return "\n".join(lines) + "\n"
