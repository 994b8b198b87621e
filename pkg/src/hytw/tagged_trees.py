"""Tagged trees: finite conditions labeled by pairs of tags, retagging and projection.

A condition is a finite prefix-closed set of natural-number sequences with a
label ``(open_tag, closed_tag)`` on every node.  Tags are ordinals below
epsilon_0 or ``INF``, compared with :func:`hytw.ordinals.tag_gt` so that
``INF > INF`` holds.

Nodes of odd length are moves of Open (coordinate 0 changes), nodes of
positive even length are moves of Closed (coordinate 1 changes).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping

from .errors import BudgetExceeded, InsufficientHeadroom, InvalidInstance, RetagObstruction, SyntaxError_
from .games import ExplicitTree, rank as tree_rank
from .ordinals import (
    INF, OMEGA, ZERO, Ordinal, Tag, add, max_plus_one, mul_nat, omega_power, parse_tag,
    print_tag, tag_at_least, tag_gt,
)

Node = tuple
Label = tuple  # (Tag, Tag)


def _is_low(t: Tag, alpha: Ordinal) -> bool:
    return t is not INF and t < alpha


def _tag_eq(a: Tag, b: Tag) -> bool:
    return a is b if (a is INF or b is INF) else a == b


# ---------------------------------------------------------------- conditions

@dataclass(frozen=True)
class Condition:
    labels: Mapping[Node, Label] = field(default_factory=lambda: {(): (INF, INF)})

    @property
    def dom(self) -> frozenset:
        return frozenset(self.labels)

    def __getitem__(self, node: Node) -> Label:
        return self.labels[node]

    def __contains__(self, node) -> bool:
        return node in self.labels

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Condition) or self.dom != other.dom:
            return False
        return all(_tag_eq(a, b) for n in self.labels
                   for a, b in zip(self.labels[n], other.labels[n]))

    def __hash__(self) -> int:
        return hash(frozenset((n, tuple(map(print_tag, lab))) for n, lab in self.labels.items()))

    def nodes(self) -> list[Node]:
        """Breadth first, children by move."""
        return sorted(self.labels, key=lambda n: (len(n), n))

    def children(self, node: Node) -> list[Node]:
        return sorted(n for n in self.labels if len(n) == len(node) + 1 and n[:-1] == node)

    def tags(self) -> list[Tag]:
        return [t for lab in self.labels.values() for t in lab]

    def restrict(self, nodes: Iterable[Node]) -> "Condition":
        keep = set(nodes)
        return Condition({n: lab for n, lab in self.labels.items() if n in keep})


def descent_triggered(c: Mapping[Node, Label], rho: Node, child: Node) -> bool:
    """Open's tag at ``rho`` is not INF and lies strictly above the tag at ``child``."""
    top = c[rho][0]
    return top is not INF and tag_gt(top, c[child][0])


def condition_violations(p: Condition) -> list[str]:
    """Every failed clause: domain shape, root label, alternation, descent."""
    out = []
    labels = p.labels
    if () not in labels:
        return ["domain does not contain the root"]
    root = labels[()]
    if root[0] is not INF or root[1] is not INF:
        out.append(f"root: label {_fmt(root)} is not (inf, inf)")
    for n in p.nodes():
        if not n:
            continue
        if n[:-1] not in labels:
            out.append(f"{_fmt_node(n)}: parent missing (domain not a tree)")
            continue
        par, lab = labels[n[:-1]], labels[n]
        keep = 1 if len(n) % 2 == 1 else 0
        if not _tag_eq(par[keep], lab[keep]):
            who = "Closed" if keep == 1 else "Open"
            out.append(f"{_fmt_node(n)}: alternation, {who} tag changed from "
                       f"{print_tag(par[keep])} to {print_tag(lab[keep])}")
        if len(n) % 2 == 0:
            rho = n[:-2]
            if descent_triggered(labels, rho, n) and not tag_gt(labels[rho][1], lab[1]):
                out.append(f"{_fmt_node(n)}: descent, Open went {print_tag(labels[rho][0])} -> "
                           f"{print_tag(lab[0])} but Closed went {print_tag(labels[rho][1])} -> "
                           f"{print_tag(lab[1])}")
    return out


def is_condition(p: Condition) -> bool:
    return not condition_violations(p)


def extends(q: Condition, p: Condition) -> bool:
    """q <= p: q's domain contains p's and the labels agree on p's domain."""
    return all(n in q.labels and all(_tag_eq(a, b) for a, b in zip(q.labels[n], lab))
               for n, lab in p.labels.items())


def retag_violations(p: Condition, q: Condition, alpha: Ordinal) -> list[str]:
    if p.dom != q.dom:
        return ["domains differ"]
    out = []
    for n in p.nodes():
        for i in (0, 1):
            a, b = p.labels[n][i], q.labels[n][i]
            if _is_low(a, alpha) or _is_low(b, alpha):
                if not _tag_eq(a, b):
                    out.append(f"{_fmt_node(n)}[{i}]: {print_tag(a)} vs {print_tag(b)} below the bound")
    return out


def retag_equiv(p: Condition, q: Condition, alpha: Ordinal) -> bool:
    """Same domain, tags below alpha equal, tags at or above alpha (or INF) on both sides."""
    return not retag_violations(p, q, alpha)


def project(p: Condition, alpha: Ordinal) -> Condition:
    """Keep tags below alpha and replace every other tag by INF."""
    return Condition({n: tuple(t if _is_low(t, alpha) else INF for t in lab)
                      for n, lab in p.labels.items()})


# ---------------------------------------------------------------- retagging

@dataclass(frozen=True)
class RetagInstance:
    p: Condition
    q: Condition
    r: Condition
    alpha: Ordinal
    gamma: Ordinal

    def problems(self) -> list[str]:
        out = []
        for name, c in (("p", self.p), ("q", self.q), ("r", self.r)):
            out += [f"{name}: {v}" for v in condition_violations(c)]
        if not retag_equiv(self.p, self.q, self.alpha):
            out.append("p and q are not alpha-retaggings of each other")
        if not extends(self.r, self.q):
            out.append("r does not extend q")
        if not self.gamma < self.alpha:
            out.append("gamma is not below alpha")
        return out

    def validate(self) -> None:
        probs = self.problems()
        if probs:
            raise InvalidInstance("; ".join(probs))

    @cached_property
    def gamma_tilde(self) -> Ordinal:
        """Strict upper bound of gamma and of every tag below alpha in r and p."""
        low = [t for t in self.r.tags() + self.p.tags() if _is_low(t, self.alpha)]
        return max_plus_one([self.gamma, *low])

    @cached_property
    def new_nodes(self) -> list[Node]:
        return [n for n in self.r.nodes() if n not in self.p.labels]

    def is_restart(self, node: Node, guarded: bool = True) -> bool:
        """Whether Open's move at odd ``node`` is a restart according to r.

        A move is a continuation when Open's previous tag is not INF and strictly
        above the new one.  With ``guarded=False`` the test is the literal
        ``r(parent)_0 > r(node)_0 != INF``, which counts a move below INF as a
        continuation.
        """
        r = self.r.labels
        prev, cur = r[node[:-1]][0], r[node][0]
        if guarded:
            return not (prev is not INF and tag_gt(prev, cur))
        return not (cur is not INF and tag_gt(prev, cur))

    def non_restart_set(self, guarded: bool = True) -> frozenset:
        """New nodes none of whose new odd prefixes (itself included) is a restart."""
        dom_p = self.p.labels
        out = set()
        for n in self.new_nodes:
            ok = True
            for k in range(1, len(n) + 1):
                tau = n[:k]
                if tau in dom_p or k % 2 == 0:
                    continue
                if self.is_restart(tau, guarded):
                    ok = False
                    break
            if ok:
                out.add(n)
        return frozenset(out)

    @cached_property
    def N(self) -> frozenset:
        return self.non_restart_set(guarded=True)

    def T(self, sigma: Node) -> ExplicitTree:
        """Extensions of ``sigma`` inside dom(r) along which Open never restarts.

        ``tau`` belongs when every proper prefix ``rho`` of ``tau`` with
        ``sigma + rho`` of odd length is a continuation move in r.
        """
        r = self.r.labels
        out = [()]
        frontier = [()]
        while frontier:
            tau = frontier.pop()
            node = sigma + tau
            if len(node) % 2 == 1 and node[:-1] in r and self.is_restart(node):
                continue
            for child in self.r.children(node):
                out.append(child[len(sigma):])
                frontier.append(child[len(sigma):])
        return ExplicitTree(out)

    @cached_property
    def ranks(self) -> dict[Node, int]:
        return {n: tree_rank(self.T(n)).finite_value() for n in self.new_nodes}

    def headroom_ok(self) -> bool:
        top = max(self.ranks.values(), default=0)
        return add(self.gamma_tilde, Ordinal.of(top)) < self.alpha


def retag(inst: RetagInstance, repairs: bool = True, check: bool = True) -> Condition:
    """Build r_hat <= p with r_hat an alpha~-retagging of r, alpha~ = ``inst.gamma_tilde``.

    Nodes of dom(p) copy p.  A new node whose Open moves since leaving dom(p)
    are all continuations gets ``min(gamma~ + rank(T_sigma), r(sigma)_i)`` in
    its moving coordinate and inherits the other one.  Remaining new nodes copy r.

    With ``repairs`` four amendments are applied (each is needed for the
    output to be a condition on some inputs):

    * a copied node inherits its non-moving coordinate from its parent in r_hat;
    * a copied Open tag at or above alpha becomes INF;
    * the continuation test for the first case requires Open's previous tag to
      be finite, matching the descent clause;
    * a copied Closed tag at or above alpha that the descent clause now
      constrains becomes ``gamma~ + rank(T_sigma)``.

    Raises InsufficientHeadroom when ``gamma~ + rank`` can reach alpha and
    RetagObstruction when the result fails a conclusion.
    """
    inst.validate()
    alpha, gt = inst.alpha, inst.gamma_tilde
    if not gt < alpha or not inst.headroom_ok():
        top = max(inst.ranks.values(), default=0)
        raise InsufficientHeadroom(
            f"gamma~ = {print_tag(gt)} and tree rank {top} leave no room below alpha = {print_tag(alpha)}")
    N = inst.N if repairs else inst.non_restart_set(guarded=False)
    p, r = inst.p.labels, inst.r.labels
    out: dict[Node, Label] = {}
    for n in inst.r.nodes():
        if n in p:
            out[n] = p[n]
            continue
        i = 0 if len(n) % 2 == 1 else 1
        par = out[n[:-1]]
        if n in N:
            v = r[n][i] if _is_low(r[n][i], alpha) else add(gt, Ordinal.of(inst.ranks[n]))
            out[n] = (v, par[1]) if i == 0 else (par[0], v)
            continue
        if not repairs:
            out[n] = r[n]
            continue
        v = r[n][i]
        if not _is_low(v, alpha):
            if i == 0:
                v = INF
            else:
                rho = n[:-2]
                if descent_triggered(out, rho, n[:-1]):
                    v = add(gt, Ordinal.of(inst.ranks[n]))
        out[n] = (v, par[1]) if i == 0 else (par[0], v)
    r_hat = Condition(out)
    if check:
        viol = retag_conclusion_violations(inst, r_hat)
        if viol:
            raise RetagObstruction("retagged labeling fails: " + "; ".join(viol[:3]), viol, r_hat)
    return r_hat


def retag_conclusion_violations(inst: RetagInstance, r_hat: Condition) -> list[str]:
    """The three conclusions: a condition, extends p, a gamma~-retagging of r."""
    out = [f"not a condition: {v}" for v in condition_violations(r_hat)]
    if not extends(r_hat, inst.p):
        out.append("does not extend p")
    out += [f"not a retagging of r: {v}" for v in retag_violations(r_hat, inst.r, inst.gamma_tilde)]
    return out


def retag_exists(inst: RetagInstance, limit: int = 10**6) -> Condition | None:
    """Exhaustive search for any r_hat meeting the three conclusions.

    Tags below gamma~ in r are forced.  Every other moving tag is drawn from
    ``{gamma~ + k : k <= #new nodes} U {INF}``; since the clauses only compare
    a new tag with tags above it in the tree, this palette loses no solutions.
    Returns None when none exists; raises InsufficientHeadroom when the
    palette itself would reach alpha and BudgetExceeded past ``limit`` steps.
    """
    gt = inst.gamma_tilde
    new = inst.new_nodes
    palette = [add(gt, Ordinal.of(k)) for k in range(len(new) + 1)] + [INF]
    if not palette[-2] < inst.alpha:
        raise InsufficientHeadroom("search palette reaches alpha")
    labels: dict[Node, Label] = dict(inst.p.labels)
    r = inst.r.labels
    steps = [0]

    def options(n):
        i = 0 if len(n) % 2 == 1 else 1
        v = r[n][i]
        return i, ([v] if _is_low(v, gt) else palette)

    def ok(n):
        if len(n) % 2 == 1:
            return True
        rho = n[:-2]
        return not descent_triggered(labels, rho, n[:-1]) or tag_gt(labels[rho][1], labels[n][1])

    def go(k):
        steps[0] += 1
        if steps[0] > limit:
            raise BudgetExceeded("existence search exceeded its step limit")
        if k == len(new):
            return True
        n = new[k]
        par = labels[n[:-1]]
        i, opts = options(n)
        for v in opts:
            labels[n] = (v, par[1]) if i == 0 else (par[0], v)
            if ok(n) and go(k + 1):
                return True
        del labels[n]
        return False

    # new nodes come parent first, so a node's label is set before its descendants are tried
    if go(0):
        return Condition(dict(labels))
    return None


# ---------------------------------------------------------------- generators

def tag_palette(ceiling: Ordinal | None, rng: random.Random | None = None) -> list[Ordinal]:
    """A spread of ordinals below ``ceiling`` used as tag values by the generators."""
    base = [Ordinal.of(k) for k in range(6)]
    w2 = omega_power(Ordinal.of(2))
    base += [OMEGA, add(OMEGA, Ordinal.of(1)), add(OMEGA, Ordinal.of(3)), mul_nat(OMEGA, 2),
             add(mul_nat(OMEGA, 2), Ordinal.of(1)), mul_nat(OMEGA, 3), w2, add(w2, OMEGA),
             add(w2, Ordinal.of(2)), mul_nat(w2, 2), omega_power(Ordinal.of(3)), omega_power(OMEGA)]
    out = sorted({b for b in base if ceiling is None or b < ceiling})
    return out


def _seeded(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def _pick_moving(rng, labels, node, palette, continue_bias=0.6):
    """A random legal moving tag for ``node`` given its ancestors, or None."""
    par = labels[node[:-1]]
    tags = palette + [INF]
    if len(node) % 2 == 1:
        below = [t for t in palette if tag_gt(par[0], t)] if par[0] is not INF else palette
        if below and rng.random() < continue_bias:
            return (rng.choice(below), par[1])
        return (rng.choice(tags), par[1])
    rho = node[:-2]
    if descent_triggered(labels, rho, node[:-1]):
        tags = [t for t in tags if tag_gt(labels[rho][1], t)]
        if not tags:
            return None
    return (par[0], rng.choice(tags))


def grow(rng: random.Random, base: Condition, extra: int, palette: list[Ordinal],
         max_branching: int = 3, max_depth: int = 6) -> Condition:
    """Add up to ``extra`` legally labeled leaves to ``base``."""
    labels = dict(base.labels)
    kids: dict[Node, int] = {}
    for n in labels:
        if n:
            kids[n[:-1]] = max(kids.get(n[:-1], 0), n[-1] + 1)
    added = attempts = 0
    nodes = sorted(labels, key=lambda n: (len(n), n))
    while added < extra and attempts < 30 * (extra + 1):
        attempts += 1
        parent = rng.choice(nodes)
        if kids.get(parent, 0) >= max_branching or len(parent) >= max_depth:
            continue
        child = parent + (kids.get(parent, 0),)
        labels[child] = (INF, INF)  # placeholder so parent lookups work
        lab = _pick_moving(rng, labels, child, palette)
        if lab is None:
            del labels[child]
            continue
        labels[child] = lab
        kids[parent] = kids.get(parent, 0) + 1
        nodes.append(child)
        added += 1
    return Condition(labels)


def generate_condition(seed, size: int, tag_ceiling: Ordinal | None = None) -> Condition:
    """A random condition with at most ``size`` nodes, tags below ``tag_ceiling`` or INF."""
    rng = _seeded(seed)
    palette = tag_palette(tag_ceiling)
    return grow(rng, Condition(), max(0, size - 1), palette)


def random_retagging(rng: random.Random, q: Condition, alpha: Ordinal, palette: list[Ordinal],
                     tries: int = 20) -> Condition:
    """A random condition p with p ~alpha q, falling back to the projection of q."""
    high = [t for t in palette if not t < alpha] + [alpha, add(alpha, Ordinal.of(1)), add(alpha, OMEGA)]
    high = sorted(set(high)) + [INF]
    for _ in range(tries):
        labels: dict[Node, Label] = {(): (INF, INF)}
        for n in q.nodes():
            if not n:
                continue
            i = 0 if len(n) % 2 == 1 else 1
            par = labels[n[:-1]]
            v = q[n][i]
            if not _is_low(v, alpha):
                v = rng.choice(high)
            labels[n] = (v, par[1]) if i == 0 else (par[0], v)
        cand = Condition(labels)
        if is_condition(cand):
            return cand
    return project(q, alpha)


DEFAULT_ALPHAS = ("w^2", "w^2*2", "w^3", "w^w")


def generate_instance(seed, base_size: int = 8, extra: int = 6,
                      alphas: Iterable[Ordinal] | None = None) -> RetagInstance:
    """A random valid RetagInstance; alpha and gamma come from the seed."""
    from .ordinals import parse_ordinal
    rng = _seeded(seed)
    choices = list(alphas) if alphas is not None else [parse_ordinal(a) for a in DEFAULT_ALPHAS]
    alpha = rng.choice(choices)
    palette = tag_palette(None)
    palette += [add(alpha, Ordinal.of(k)) for k in (0, 1, 3)] + [add(alpha, OMEGA)]
    palette = sorted(set(palette))
    q = grow(rng, Condition(), rng.randint(0, base_size - 1), palette)
    p = random_retagging(rng, q, alpha, palette)
    r = grow(rng, q, rng.randint(0, extra), palette)
    low = [t for t in palette if t < alpha]
    gamma = rng.choice(low)
    return RetagInstance(p, q, r, alpha, gamma)


def shrink_instance(inst: RetagInstance, failing: Callable[[RetagInstance], bool]) -> RetagInstance:
    """Greedily drop leaves of r outside dom(q), then leaves of q, while ``failing`` stays true."""
    cur = inst
    changed = True
    while changed:
        changed = False
        for n in sorted(cur.r.labels, key=len, reverse=True):
            if not n or cur.r.children(n):
                continue
            if n in cur.q.labels:
                keep = [m for m in cur.q.labels if m != n]
                cand = RetagInstance(cur.p.restrict(keep), cur.q.restrict(keep),
                                     cur.r.restrict([m for m in cur.r.labels if m != n]),
                                     cur.alpha, cur.gamma)
            else:
                cand = RetagInstance(cur.p, cur.q, cur.r.restrict([m for m in cur.r.labels if m != n]),
                                     cur.alpha, cur.gamma)
            if not cand.problems() and failing(cand):
                cur = cand
                changed = True
                break
    return cur


def shrink_condition(c: Condition, failing: Callable[[Condition], bool]) -> Condition:
    """Greedily drop leaves while ``failing`` stays true."""
    cur = c
    changed = True
    while changed:
        changed = False
        for n in sorted(cur.labels, key=len, reverse=True):
            if n and not cur.children(n):
                cand = cur.restrict([m for m in cur.labels if m != n])
                if failing(cand):
                    cur = cand
                    changed = True
                    break
    return cur


# ---------------------------------------------------------------- files

def _fmt_node(n: Node) -> str:
    return "()" if not n else " ".join(map(str, n))


def _fmt(lab: Label) -> str:
    return f"({print_tag(lab[0])}, {print_tag(lab[1])})"


def parse_condition_file(text: str) -> Condition:
    """One node per line: the path (naturals, or ``()`` for the root) then two tags."""
    labels: dict[Node, Label] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) < 3:
            raise SyntaxError_(f"line {lineno}: expected PATH TAG0 TAG1")
        path_toks, t0, t1 = toks[:-2], toks[-2], toks[-1]
        if path_toks == ["()"]:
            node: Node = ()
        else:
            try:
                node = tuple(int(t) for t in path_toks)
            except ValueError:
                raise SyntaxError_(f"line {lineno}: bad path {' '.join(path_toks)!r}") from None
            if any(m < 0 for m in node):
                raise SyntaxError_(f"line {lineno}: negative move")
        if node in labels:
            raise SyntaxError_(f"line {lineno}: duplicate node")
        try:
            labels[node] = (parse_tag(t0), parse_tag(t1))
        except Exception as e:
            raise SyntaxError_(f"line {lineno}: bad tag ({e})") from None
    return Condition(labels)


def print_condition_file(c: Condition) -> str:
    return "".join(f"{_fmt_node(n)} {print_tag(c[n][0])} {print_tag(c[n][1])}\n" for n in c.nodes())
