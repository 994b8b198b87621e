"""Beta normalization and the structural facts about normal forms.

Substitution renames the binders of every inserted copy of the argument that
would clash with a name already in use, so reducts keep the freshness
convention: no variable is bound twice along a root-to-leaf path.  Two
strategies are provided: normal order (leftmost-outermost, the default) and
rightmost-innermost, used to cross-check confluence.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from .errors import NotNormal, StepBudgetExceeded, TypeMismatch
from .terms import (
    App, Arrow, Concat, FiniteType, Lam, Less, NatLit, Param, Plus, Star, Succ, Term, Times,
    Var, T0, T1,
    all_names, children, free_vars, is_standard, rebuild, standard_level, type_of,
)

DEFAULT_STEP_BUDGET = 10**6

Path = tuple[int, ...]


def step_budget(default: int = DEFAULT_STEP_BUDGET) -> int:
    """The step budget, overridable through the HYTW_BUDGET environment variable."""
    raw = os.environ.get("HYTW_BUDGET")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            return default
        if value > 0:
            return value
    return default


# ---------------------------------------------------------------- substitution

class NameSupply:
    """Deterministic fresh names: ``base_k`` with the least unused k."""

    _SUFFIX = re.compile(r"_\d+\Z")

    def __init__(self, used=()):
        self.used = set(used)

    def fresh(self, hint: str) -> str:
        base = self._SUFFIX.sub("", hint) or "v"
        k = 1
        while f"{base}_{k}" in self.used:
            k += 1
        name = f"{base}_{k}"
        self.used.add(name)
        return name


def rename_binders(t: Term, supply: NameSupply, avoid: set[str]) -> Term:
    """Rename every binder of ``t`` whose name is in ``avoid`` to a fresh one."""

    def go(s, mapping):
        if isinstance(s, Var):
            new = mapping.get(s.name)
            return Var(new, s.type) if new else s
        if isinstance(s, Lam):
            if s.var in avoid:
                new = supply.fresh(s.var)
                inner = dict(mapping)
                inner[s.var] = new
                return Lam(new, s.var_type, go(s.body, inner))
            if s.var in mapping:
                inner = dict(mapping)
                del inner[s.var]
                return Lam(s.var, s.var_type, go(s.body, inner))
            return Lam(s.var, s.var_type, go(s.body, mapping))
        kids = children(s)
        if not kids:
            return s
        return rebuild(s, [go(c, mapping) for c in kids])

    return go(t, {})


def substitute(t: Term, x: str, s: Term, supply: NameSupply | None = None, x_type: FiniteType | None = None) -> Term:
    """Replace the free occurrences of ``x`` in ``t`` by ``s``.

    Copies of ``s`` get their binders renamed whenever they would clash with a
    binder of ``t`` or with an earlier copy, which keeps the result fresh.
    """
    if x_type is not None and type_of(s) != x_type:
        raise TypeMismatch(f"cannot substitute a term of type {type_of(s)} for {x}:{x_type}")
    if supply is None:
        supply = NameSupply(all_names(t) | all_names(s))
    s_binders = {b.var for b in _lams(s)}
    t_binders = {b.var for b in _lams(t)}
    s_free = set(free_vars(s))
    state = {"copies": 0}

    def copy():
        state["copies"] += 1
        if not s_binders:
            return s
        avoid = s_binders if state["copies"] > 1 else (s_binders & t_binders)
        return rename_binders(s, supply, avoid) if avoid else s

    def go(u):
        if isinstance(u, Var):
            if u.name == x:
                if x_type is not None and u.type != x_type:
                    raise TypeMismatch(f"variable {x} occurs at type {u.type}")
                return copy()
            return u
        if isinstance(u, Lam):
            if u.var == x:
                return u
            if u.var in s_free:
                # would capture a free variable of s
                new = supply.fresh(u.var)
                body = substitute(u.body, u.var, Var(new, u.var_type), supply)
                return Lam(new, u.var_type, go(body))
            return Lam(u.var, u.var_type, go(u.body))
        kids = children(u)
        if not kids:
            return u
        new = [go(c) for c in kids]
        if all(a is b for a, b in zip(new, kids)):
            return u
        return rebuild(u, new)

    return go(t)


def _lams(t):
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Lam):
            yield u
        stack.extend(children(u))


# ---------------------------------------------------------------- reduction

def is_redex(t: Term) -> bool:
    return isinstance(t, App) and isinstance(t.fun, Lam)


def is_normal(t: Term) -> bool:
    stack = [t]
    while stack:
        u = stack.pop()
        if is_redex(u):
            return False
        stack.extend(children(u))
    return True


def _find_outermost(t: Term, path: list[int]) -> bool:
    if is_redex(t):
        return True
    for i, c in enumerate(children(t)):
        path.append(i)
        if _find_outermost(c, path):
            return True
        path.pop()
    return False


def _find_innermost_right(t: Term, path: list[int]) -> bool:
    kids = children(t)
    for i in range(len(kids) - 1, -1, -1):
        path.append(i)
        if _find_innermost_right(kids[i], path):
            return True
        path.pop()
    return is_redex(t)


STRATEGIES = {
    "normal": _find_outermost,
    "leftmost-outermost": _find_outermost,
    "rightmost-innermost": _find_innermost_right,
}


def subterm_at(t: Term, path: Path) -> Term:
    for i in path:
        t = children(t)[i]
    return t


def replace_at(t: Term, path: Path, new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return rebuild(t, kids)


def contract(redex: Term, supply: NameSupply) -> Term:
    lam = redex.fun
    return substitute(lam.body, lam.var, redex.arg, supply)


@dataclass
class ReductionTrace:
    """Positions of contracted redexes, optionally with the term after each step."""

    steps: list[tuple[Path, Term | None]] = field(default_factory=list)
    count: int = 0

    def lines(self) -> list[str]:
        from .terms import print_term
        out = []
        for i, (path, term) in enumerate(self.steps, 1):
            pos = ".".join(map(str, path)) or "root"
            out.append(f"step {i} at {pos}: {print_term(term)}" if term is not None else f"step {i} at {pos}")
        return out


def fold_literals(t: Term) -> Term:
    """Evaluate arithmetic whose operands are literals: (+ 2 1) becomes 3."""
    kids = children(t)
    if not kids:
        return t
    new = [fold_literals(c) for c in kids]
    if all(isinstance(c, NatLit) for c in new):
        vals = [c.value for c in new]
        if isinstance(t, Plus):
            return NatLit(vals[0] + vals[1])
        if isinstance(t, Times):
            return NatLit(vals[0] * vals[1])
        if isinstance(t, Succ):
            return NatLit(vals[0] + 1)
        if isinstance(t, Less):
            return NatLit(int(vals[0] < vals[1]))
    if all(a is b for a, b in zip(new, kids)):
        return t
    return rebuild(t, new)


def normalize(t: Term, strategy: str = "normal", budget: int | None = None,
              record_terms: bool = False, fold: bool = True) -> tuple[Term, ReductionTrace]:
    """Reduce ``t`` to beta normal form, returning the result and its trace.

    With ``fold`` the final term also has literal arithmetic evaluated; the
    trace records beta steps only.
    """
    find = STRATEGIES[strategy]
    limit = step_budget() if budget is None else budget
    supply = NameSupply(all_names(t))
    trace = ReductionTrace()
    while True:
        path: list[int] = []
        if not find(t, path):
            return (fold_literals(t) if fold else t), trace
        if trace.count >= limit:
            raise StepBudgetExceeded(f"no normal form within {limit} steps")
        redex = subterm_at(t, tuple(path))
        t = replace_at(t, tuple(path), contract(redex, supply))
        trace.count += 1
        trace.steps.append((tuple(path), t if record_terms else None))


def nf(t: Term, **kw) -> Term:
    return normalize(t, **kw)[0]


# ---------------------------------------------------------------- alpha equivalence

def canonical(t: Term) -> Term:
    """Rename binders to ``_0, _1, ...`` in preorder; equal results mean alpha-equivalent terms."""
    counter = [0]

    def go(s, mapping):
        if isinstance(s, Var):
            new = mapping.get(s.name)
            return Var(new, s.type) if new else s
        if isinstance(s, Lam):
            new = f"_{counter[0]}"
            counter[0] += 1
            inner = dict(mapping)
            inner[s.var] = new
            return Lam(new, s.var_type, go(s.body, inner))
        kids = children(s)
        return rebuild(s, [go(c, mapping) for c in kids]) if kids else s

    return go(t, {})


def alpha_equal(a: Term, b: Term) -> bool:
    return canonical(a) == canonical(b)


# ---------------------------------------------------------------- combinators

def pi_combinator(sigma: FiniteType, tau: FiniteType, x: str = "X", y: str = "Y") -> Term:
    """The combinator with ``Pi X Y = Y`` exactly as axiomatized."""
    return Lam(x, sigma, Lam(y, tau, Var(y, tau)))


def k_combinator(sigma: FiniteType, tau: FiniteType, x: str = "X", y: str = "Y") -> Term:
    """The textbook K, returning its first argument (for comparison with ``pi_combinator``)."""
    return Lam(x, sigma, Lam(y, tau, Var(x, sigma)))


def sigma_combinator(rho: FiniteType, sigma: FiniteType, tau: FiniteType) -> Term:
    """S with ``((S X) Y) Z = (X Z)(Y Z)`` at X: rho->sigma->tau, Y: rho->sigma, Z: rho."""
    tx = Arrow(rho, Arrow(sigma, tau))
    ty = Arrow(rho, sigma)
    X, Y, Z = Var("X", tx), Var("Y", ty), Var("Z", rho)
    return Lam("X", tx, Lam("Y", ty, Lam("Z", rho, App(App(X, Z), App(Y, Z)))))


# ---------------------------------------------------------------- structure report

@dataclass(frozen=True)
class StructureReport:
    subterms_normal: bool
    subterms_standard_type: bool
    bound_vars_type0: bool
    at_most_one_type1_binder: bool
    subterm_types_le_2: bool
    term_type: FiniteType = T0

    def applicable(self) -> dict[str, bool]:
        """The flags every normal term of this type is expected to satisfy."""
        out = {"subterms_normal": self.subterms_normal}
        lvl = standard_level(self.term_type)
        if lvl is not None:
            out["subterms_standard_type"] = self.subterms_standard_type
        if lvl in (0, 1):
            out["bound_vars_type0"] = self.bound_vars_type0
        if lvl == 2:
            out["at_most_one_type1_binder"] = self.at_most_one_type1_binder
        if lvl is not None and lvl <= 2:
            out["subterm_types_le_2"] = self.subterm_types_le_2
        return out

    def ok(self) -> bool:
        return all(self.applicable().values())


def subterm_types(t: Term) -> list[FiniteType]:
    """Types of every subterm occurrence, in preorder."""
    out: list[FiniteType] = []

    def go(s):
        slot = len(out)
        out.append(None)
        if isinstance(s, Lam):
            ty = Arrow(s.var_type, go(s.body))
        elif isinstance(s, App):
            f = go(s.fun)
            go(s.arg)
            ty = f.codomain
        elif isinstance(s, (Var, Param)):
            ty = s.type
        else:
            for c in children(s):
                go(c)
            ty = T1 if isinstance(s, (Concat, Star)) else T0
        out[slot] = ty
        return ty

    go(t)
    return out


def check_normal_structure(t: Term) -> StructureReport:
    if not is_normal(t):
        raise NotNormal("term contains a beta redex")
    ty = type_of(t)
    types = subterm_types(t)
    binders = [lam.var_type for lam in _lams(t)]
    n_type1 = sum(1 for b in binders if b == T1)
    return StructureReport(
        subterms_normal=True,
        subterms_standard_type=all(is_standard(s) for s in types),
        bound_vars_type0=all(b == T0 for b in binders),
        at_most_one_type1_binder=n_type1 <= 1 and all(b in (T0, T1) for b in binders),
        subterm_types_le_2=all((standard_level(s) or 0) <= 2 and is_standard(s) for s in types),
        term_type=ty,
    )
