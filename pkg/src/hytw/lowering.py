"""Compile closed terms of type <= 2 into type 2 codes built from L3 formers only.

A code for a normal term ``t`` of type 0 or 1 over type 0 variables
``x0..x(n-1)`` and the stream variable ``y`` is a closed type 2 term ``F`` with

    F(a0 ^ ... ^ a(n-1) ^ b)   = t[a/x, b/y]        (t of type 0)
    (F * (a0 ^ ... ^ b))(k)    = t[a/x, b/y](k)     (t of type 1)

Every intermediate functional the construction needs becomes a named
parameter bound in :attr:`Type2Code.bindings`, so no code contains a type 1
binder other than its own outermost one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .errors import NonStandardSubterm, NotNormal, TypeMismatch, UnboundVariable
from .normalizer import NameSupply, check_normal_structure, is_normal, normalize, substitute
from .semantics import (
    Formula0, Functional2, Oracle1, Value, atom_terms, check_formula, concat, eval_term,
    holds, is_quantifier_free, search_functional,
)
from .semantics import And, Eq, Le, Lt, Not, Or
from .terms import (
    App, Concat, Lam, Less, NatLit, Param, Plus, Star, Succ, T0, T1, T2, Term, Times, Var,
    all_names, children, free_vars, is_lambda_free, is_standard, params, print_term,
    rebuild, standard_level, subterms, type_of,
)

DEFAULT_SEARCH_BOUND = 10**4


# ---------------------------------------------------------------- helper functionals

def _sum(terms: Sequence[Term]) -> Term:
    out = terms[0]
    for t in terms[1:]:
        out = Plus(out, t)
    return out


def shift_term(n: int, s: str = "s") -> Term:
    """P_n = (lam (s 1) (s (+ n (+ (s 0) 1)))), so (P_n * r)(i) = r(n + i)."""
    sv = Var(s, T1)
    return Lam(s, T1, App(sv, Plus(NatLit(n), Succ(App(sv, NatLit(0))))))


def rearrange_term(perm: Sequence[int], s: str = "s") -> Term:
    """R_pi with (R_pi * r)(i) = r(pi(i)) for i < n and r(i) otherwise.

    Cases are expressed arithmetically: [i = j] is [i < j+1] * [j < i+1].
    """
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n}")
    sv = Var(s, T1)
    i = App(sv, NatLit(0))
    pieces = []
    for j, pj in enumerate(perm):
        is_j = Times(Less(i, NatLit(j + 1)), Less(NatLit(j), Succ(i)))
        pieces.append(Times(is_j, App(sv, NatLit(pj + 1))))
    pieces.append(Times(Less(NatLit(n), Succ(i)), App(sv, Succ(i))))
    return Lam(s, T1, _sum(pieces))


def shift_functional(n: int) -> Functional2:
    return Functional2.from_term(shift_term(n))


def rearrange_functional(perm: Sequence[int]) -> Functional2:
    return Functional2.from_term(rearrange_term(perm))


# ---------------------------------------------------------------- codes

@dataclass(frozen=True)
class ComprehensionDef:
    """The functional b -> least x < bound with phi(b, x), phi quantifier free."""

    formula: Formula0
    xvar: str
    yvar: str
    bound: int


Binding = Union[Term, ComprehensionDef]


@dataclass
class Type2Code:
    """A closed type 2 term plus the named helper functionals it refers to.

    ``bindings`` is ordered so that each entry only mentions earlier names and
    the caller's own parameters.
    """

    term: Term
    bindings: dict[str, Binding] = field(default_factory=dict)
    source: Term | None = None
    vars: tuple[str, ...] = ()

    def realize(self, env: Mapping[str, Value] | None = None) -> Functional2:
        vals = dict(env or {})
        for name, b in self.bindings.items():
            vals[name] = _realize_binding(b, vals)
        return Functional2.from_term(self.term, vals)

    def terms(self) -> list[Term]:
        out = [b for b in self.bindings.values() if not isinstance(b, ComprehensionDef)]
        return out + [self.term]

    def purity_violations(self) -> list[str]:
        return code_purity_violations(self)

    def definition_lines(self) -> list[str]:
        lines = []
        for name, b in self.bindings.items():
            if isinstance(b, ComprehensionDef):
                lines.append(f"; {name} is defined by least-witness search below {b.bound}")
            else:
                lines.append(f"def {name} {print_term(b)}")
        return lines


def _realize_binding(b: Binding, vals: dict) -> Functional2:
    if isinstance(b, ComprehensionDef):
        scope = dict(vals)
        return search_functional(
            lambda y, x: holds(b.formula, {b.xvar: x, b.yvar: y}, scope), b.bound, "qf-ac")
    return Functional2.from_term(b, vals)


def code_purity_violations(code: Type2Code) -> list[str]:
    """Structural checks: closed, type 2, standard subterm types <= 2, one outer type 1 binder at most."""
    out = []
    for name, t in [*((n, b) for n, b in code.bindings.items() if not isinstance(b, ComprehensionDef)),
                    ("<root>", code.term)]:
        if free_vars(t):
            out.append(f"{name}: free variables {sorted(free_vars(t))}")
        try:
            ty = type_of(t)
        except Exception as e:
            out.append(f"{name}: ill-typed ({e})")
            continue
        if ty != T2:
            out.append(f"{name}: type {ty} is not 2")
        from .normalizer import subterm_types
        for sty in subterm_types(t):
            lvl = standard_level(sty)
            if lvl is None or lvl > 2:
                out.append(f"{name}: subterm of type {sty}")
                break
        inner = t.body if isinstance(t, Lam) else t
        for s in subterms(inner):
            if isinstance(s, Lam) and s.var_type != T0:
                out.append(f"{name}: inner binder {s.var} of type {s.var_type}")
        if not is_normal(t):
            out.append(f"{name}: not normal")
    return out


# ---------------------------------------------------------------- star unfolding

def unfold_stars(t: Term, supply: NameSupply | None = None) -> Term:
    """Rewrite (star (lam (y 1) b) s) to (lam (k 0) b[(cat k s)/y]).

    Sound by the defining equation of * and extensionality at type 1; it
    removes the only way a normal term of type 0 or 1 can bind a type 1
    variable in this language.
    """
    supply = supply or NameSupply(all_names(t))

    def go(s):
        kids = children(s)
        if kids:
            new = [go(c) for c in kids]
            if not all(a is b for a, b in zip(new, kids)):
                s = rebuild(s, new)
        if isinstance(s, Star) and isinstance(s.fun, Lam):
            k = supply.fresh("k")
            body = substitute(s.fun.body, s.fun.var, Concat(Var(k, T0), s.arg), supply)
            return Lam(k, T0, body)
        return s

    return go(t)


def prepare(t: Term) -> Term:
    """Normalize, unfold abstractions under *, and repeat until stable."""
    for _ in range(1000):
        t, _trace = normalize(t)
        if not any(isinstance(s, Star) and isinstance(s.fun, Lam) for s in subterms(t)):
            return t
        t = unfold_stars(t)
    raise NonStandardSubterm("star unfolding did not stabilize")


# ---------------------------------------------------------------- coding of terms as type-2 functionals

class _Coder:
    def __init__(self, reserved: set[str]):
        self.bindings: dict[str, Binding] = {}
        self.reserved = set(reserved)
        self.counter = 0
        self.u = self._fresh_var("u")

    def _fresh_var(self, base):
        name = base
        k = 0
        while name in self.reserved:
            k += 1
            name = f"{base}_{k}"
        self.reserved.add(name)
        return name

    def _name(self, base: str) -> str:
        name = base
        k = 0
        while name in self.reserved or name in self.bindings:
            k += 1
            name = f"{base}_{k}"
        return name

    def helper_shift(self, n: int) -> Param:
        name = f"_P{n}"
        if name in self.reserved:
            name = self._name(name)
        if name not in self.bindings:
            self.bindings[name] = shift_term(n)
        return Param(name, T2)

    def register(self, term: Term) -> Param:
        self.counter += 1
        name = self._name(f"_C{self.counter}")
        self.bindings[name] = term
        return Param(name, T2)

    # -- the cases

    def code(self, t: Term, vars: tuple[str, ...], y: str) -> Term:
        """A closed code term for (t, vars)."""
        u = Var(self.u, T1)
        ty = type_of(t)
        n = len(vars)
        if is_lambda_free(t):
            return self.base_case(t, vars, y, ty)
        if isinstance(t, (Plus, Times, Less)):
            a = App(self.sub(t.left, vars, y), u)
            b = App(self.sub(t.right, vars, y), u)
            return Lam(self.u, T1, type(t)(a, b))
        if isinstance(t, Succ):
            return Lam(self.u, T1, Succ(App(self.sub(t.arg, vars, y), u)))
        if isinstance(t, Lam):
            if t.var_type != T0:
                raise NonStandardSubterm(f"binder {t.var} of type {t.var_type}")
            return self.code(t.body, (t.var,) + vars, y)
        if isinstance(t, App):
            fty = type_of(t.fun)
            if fty == T1:
                F0 = self.sub(t.fun, vars, y)
                F1 = self.sub(t.arg, vars, y)
                return Lam(self.u, T1, App(Star(F0, u), App(F1, u)))
            if fty == T2:
                if not isinstance(t.fun, Param):
                    raise NonStandardSubterm(f"type 2 head is not a parameter: {print_term(t.fun)}")
                G = self.sub(t.arg, vars, y)
                return Lam(self.u, T1, App(t.fun, Star(G, u)))
            raise NonStandardSubterm(f"application of a term of type {fty}")
        if isinstance(t, Concat):
            H = self.sub(t.head, vars, y)
            R = self.sub(t.tail, vars, y)
            rest = Star(self.helper_shift(1), u)
            return Lam(self.u, T1, App(Concat(App(H, rest), Star(R, rest)), App(u, NatLit(0))))
        if isinstance(t, Star):
            if not isinstance(t.fun, Param):
                raise NonStandardSubterm(f"star of a non-parameter: {print_term(t.fun)}")
            S = self.sub(t.arg, vars, y)
            rest = Star(self.helper_shift(1), u)
            return Lam(self.u, T1, App(t.fun, Concat(App(u, NatLit(0)), Star(S, rest))))
        raise NonStandardSubterm(f"no coding case for {print_term(t)}")

    def sub(self, t: Term, vars, y) -> Param:
        return self.register(self.code(t, vars, y))

    def base_case(self, t: Term, vars, y, ty) -> Term:
        u = Var(self.u, T1)
        offset = 0 if ty == T0 else 1
        n = len(vars)
        body = t
        fv = free_vars(t)
        for i, x in enumerate(vars):
            if x in fv:
                body = substitute(body, x, App(u, NatLit(i + offset)))
        if y in fv:
            body = substitute(body, y, Star(self.helper_shift(n + offset), u))
        if ty == T1:
            body = App(body, App(u, NatLit(0)))
        return Lam(self.u, T1, body)


def _type1_free(t: Term) -> str | None:
    ones = [n for n, ty in free_vars(t).items() if ty != T0]
    if len(ones) > 1 or any(free_vars(t)[n] != T1 for n in ones):
        raise NonStandardSubterm(f"free variables {ones} beyond one of type 1")
    return ones[0] if ones else None


def code_term(t: Term, vars: Sequence[str] = (), y: str | None = None) -> Type2Code:
    """Code a normal term of type 0 or 1 whose free variables are ``vars`` (type 0) and ``y`` (type 1)."""
    if not is_normal(t):
        raise NotNormal("code_term needs a normal term")
    ty = type_of(t)
    if ty not in (T0, T1):
        raise TypeMismatch(f"code_term needs type 0 or 1, got {ty}")
    fv = free_vars(t)
    ystar = _type1_free(t)
    if y is None:
        y = ystar or "y"
    elif ystar not in (None, y):
        raise UnboundVariable(f"free type 1 variable {ystar} is not {y}")
    for name, vty in fv.items():
        if vty == T0 and name not in vars:
            raise UnboundVariable(f"free variable {name} missing from the variable list")
    report = check_normal_structure(t)
    if not (report.bound_vars_type0 and report.subterms_standard_type and report.subterm_types_le_2):
        raise NonStandardSubterm(f"term is outside the scope of the coding: {report}")
    coder = _Coder(all_names(t) | set(params(t)) | set(vars) | {y})
    root = coder.code(t, tuple(vars), y)
    return Type2Code(root, coder.bindings, t, tuple(vars))


# ---------------------------------------------------------------- closed terms

@dataclass
class Lowered:
    """Result of lowering a closed term of any type <= 2.

    ``code`` codes the body; ``term`` is a closed term of the source type built
    from ``code``'s root and bindings.
    """

    code: Type2Code
    term: Term
    source_type: object

    def value(self, env: Mapping[str, Value] | None = None):
        F = self.code.realize(env)
        zero = Oracle1.const(0)
        if self.source_type == T2:
            return F
        if self.source_type == T1:
            return Oracle1(lambda k: F(concat(k, zero)), "lowered")
        return F(zero)

    def text(self, signature: Mapping | None = None) -> str:
        lines = [f"param {n} {ty}" for n, ty in (signature or {}).items()]
        lines += self.code.definition_lines()
        lines.append(f"def _main {print_term(self.code.term)}")
        lines.append(print_term(self.term))
        return "\n".join(lines) + "\n"


def lower_term(t: Term) -> Lowered:
    if free_vars(t):
        raise UnboundVariable(f"lowering needs a closed term, free: {sorted(free_vars(t))}")
    ty = type_of(t)
    if ty not in (T0, T1, T2):
        raise TypeMismatch(f"cannot lower a term of type {ty}")
    s = prepare(t)
    reserved = all_names(s) | set(params(s))
    supply = NameSupply(reserved)
    main = Param("_main", T2)
    zero_stream = Lam(supply.fresh("z"), T0, NatLit(0))
    if ty == T2:
        if isinstance(s, Lam):
            code = code_term(s.body, (), s.var)
        else:
            code = Type2Code(s, {}, s, ())
        code.source = t
        return Lowered(code, main, T2)
    y = supply.fresh("y")
    yv = Var(y, T1)
    if ty == T1:
        if isinstance(s, Lam):
            body = substitute(s.body, s.var, App(yv, NatLit(0)))
        else:
            body = App(s, App(yv, NatLit(0)))
        body, _ = normalize(body)
        code = code_term(body, (), y)
        k = supply.fresh("k")
        wrapper = Lam(k, T0, App(main, Concat(Var(k, T0), zero_stream)))
    else:
        code = code_term(s, (), y)
        wrapper = App(main, zero_stream)
    code.source = t
    return Lowered(code, wrapper, ty)


def lower_closed(t: Term, env: Mapping[str, Value] | None = None):
    """Type 2: the code.  Type 1: the stream k -> F(k ^ 0).  Type 0: F(0)."""
    low = lower_term(t)
    if low.source_type == T2:
        return low.code
    return low.value(env)


# ---------------------------------------------------------------- QF-AC witnesses

def _map_terms(phi, f):
    if isinstance(phi, (Eq, Lt, Le)):
        return type(phi)(f(phi.left), f(phi.right))
    if isinstance(phi, Not):
        return Not(_map_terms(phi.arg, f))
    if isinstance(phi, (And, Or)):
        return type(phi)(_map_terms(phi.left, f), _map_terms(phi.right, f))
    raise TypeMismatch("quantifier-free formula expected")


def qf_ac_witness(phi: Formula0, x: str = "x", y: str = "y",
                  search_bound: int = DEFAULT_SEARCH_BOUND) -> Type2Code:
    """A choice functional G with phi(b, G(b)) for every b having a witness below ``search_bound``.

    Each maximal term is normalized and coded over (x, y); the rebuilt formula
    mentions only the codes applied to x ^ y, and G is its least-witness search.
    """
    if not is_quantifier_free(phi):
        raise TypeMismatch("qf_ac_witness needs a quantifier-free formula")
    check_formula(phi, {x: T0, y: T1})
    reserved = {x, y}
    for t in atom_terms(phi):
        reserved |= all_names(t) | set(params(t))
    codes: dict[Term, Param] = {}
    # codes of separate terms share a namespace; prefix each term's helpers
    bindings: dict[str, Binding] = {}
    for idx, t in enumerate(dict.fromkeys(atom_terms(phi))):
        s = prepare(t)
        code = code_term(s, (x,), y)
        prefix = f"_t{idx}"
        ren = {name: f"{prefix}{name}" for name in code.bindings}
        for name, b in code.bindings.items():
            bindings[ren[name]] = _rename_params(b, ren)
        fname = f"{prefix}_F"
        bindings[fname] = _rename_params(code.term, ren)
        codes[t] = Param(fname, T2)
    phi_hat = _map_terms(phi, lambda t: App(codes[t], Concat(Var(x, T0), Var(y, T1))))
    bindings["_G"] = ComprehensionDef(phi_hat, x, y, search_bound)
    yname = "b" if "b" not in reserved else "b_1"
    root = Lam(yname, T1, App(Param("_G", T2), Var(yname, T1)))
    return Type2Code(root, bindings, None, (x,))


def _rename_params(t: Term, ren: Mapping[str, str]) -> Term:
    if isinstance(t, Param):
        return Param(ren[t.name], t.type) if t.name in ren else t
    kids = children(t)
    if not kids:
        return t
    return rebuild(t, [_rename_params(c, ren) for c in kids])


# ---------------------------------------------------------------- checking

def coding_equation_holds(code: Type2Code, args: Sequence[int], b: Oracle1,
                          env: Mapping[str, Value] | None = None, positions: int = 10) -> bool:
    """Compare the code on a0 ^ ... ^ b with the source term under the same substitution."""
    env = dict(env or {})
    F = code.realize(env)
    u = b
    for a in reversed(list(args)):
        u = concat(a, u)
    scope = dict(env)
    scope.update(dict(zip(code.vars, args)))
    src = code.source
    fv = free_vars(src)
    for name, ty in fv.items():
        if ty == T1:
            scope[name] = b
    expected = eval_term(src, scope)
    if isinstance(expected, int):
        return F(u) == expected
    from .semantics import star as star_op
    got = star_op(F, u)
    return all(got(i) == expected(i) for i in range(positions))
