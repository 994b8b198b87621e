"""Clopen and open games on trees of finite sequences.

Player I moves at nodes of even length, player II at nodes of odd length.  In
the clopen convention the player who must move at a node with no children
loses, since any move of theirs leaves the tree.  The ordinal games
``G_alpha`` and ``O_alpha`` are presented as rule games whose per-node move
lists are finite slices of the legal ordinals.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from .errors import BudgetExceeded, IllegalMove, SyntaxError_
from .ordinals import ZERO, Ordinal, parse_ordinal, print_ordinal

Node = tuple
Move = Hashable

I, II = "I", "II"


def mover(node: Node) -> str:
    return I if len(node) % 2 == 0 else II


def opponent(player: str) -> str:
    return II if player == I else I


@dataclass(frozen=True, order=True)
class Restart:
    """An O_alpha move of player I that abandons the current run and starts over at ``value``."""

    value: Ordinal

    def __str__(self) -> str:
        return f"restart {print_ordinal(self.value)}"


def move_key(m):
    if isinstance(m, Restart):
        return (1, m.value)
    return (0, m)


def print_move(m) -> str:
    if isinstance(m, Ordinal):
        return print_ordinal(m)
    return str(m)


# ---------------------------------------------------------------- trees

class GameTree:
    """Common interface: membership and the (finite) list of moves at a node."""

    def contains(self, node: Node) -> bool:
        raise NotImplementedError

    def moves(self, node: Node) -> list:
        raise NotImplementedError

    def nodes(self, budget: int | None = None) -> list[Node]:
        """All nodes reachable through listed moves, parents before children."""
        out = [()]
        i = 0
        while i < len(out):
            node = out[i]
            i += 1
            for m in self.moves(node):
                out.append(node + (m,))
                if budget is not None and len(out) > budget:
                    raise BudgetExceeded(f"more than {budget} nodes; the tree may be ill-founded")
        return out

    def bottom_up(self, budget: int | None = None) -> list[Node]:
        """Nodes with every child listed before its parent."""
        return self.nodes(budget)[::-1]


class ExplicitTree(GameTree):
    """A finite prefix-closed set of sequences containing the empty sequence."""

    def __init__(self, nodes: Iterable[Sequence]):
        closed = {()}
        for n in nodes:
            n = tuple(n)
            for k in range(len(n) + 1):
                closed.add(n[:k])
        self._nodes = frozenset(closed)
        kids: dict[Node, list] = {n: [] for n in closed}
        for n in closed:
            if n:
                kids[n[:-1]].append(n[-1])
        self._kids = {n: sorted(ms, key=move_key) if len(ms) > 1 else ms for n, ms in kids.items()}
        self._order: list[Node] | None = None
        self._solved: tuple | None = None

    @classmethod
    def _from_order(cls, order: list[Node], kids: dict[Node, list]) -> "ExplicitTree":
        """Trusted constructor: ``order`` is breadth first and ``kids`` already sorted."""
        tree = cls.__new__(cls)
        tree._nodes = frozenset(order)
        tree._kids = kids
        tree._order = order
        tree._solved = None
        return tree

    @classmethod
    def exact(cls, nodes: Iterable[Sequence]) -> "ExplicitTree":
        """Like the constructor but rejects sets that are not already prefix closed."""
        given = {tuple(n) for n in nodes}
        tree = cls(given)
        if set(tree._nodes) != given:
            missing = sorted(set(tree._nodes) - given, key=len)[0]
            raise ValueError(f"not prefix closed: missing {missing}")
        return tree

    def contains(self, node: Node) -> bool:
        return node in self._nodes

    def moves(self, node: Node) -> list:
        return self._kids.get(node, [])

    def nodes(self, budget: int | None = None) -> list[Node]:
        if self._order is None:
            order = [()]
            i = 0
            while i < len(order):
                node = order[i]
                i += 1
                order.extend(node + (m,) for m in self._kids[node])
            self._order = order
        return list(self._order)

    def bottom_up(self, budget: int | None = None) -> list[Node]:
        self.nodes()
        return self._order[::-1]

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other):
        return isinstance(other, ExplicitTree) and self._nodes == other._nodes

    def __hash__(self):
        return hash(self._nodes)

    def __repr__(self):
        return f"ExplicitTree({len(self._nodes)} nodes)"

    @property
    def node_set(self) -> frozenset:
        return self._nodes

    def depth(self) -> int:
        return max(len(n) for n in self._nodes)


def parse_game_file(text: str) -> ExplicitTree:
    """One node per line as space-separated naturals; prefixes are added implicitly."""
    nodes = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "()":
            nodes.append(())
            continue
        try:
            nodes.append(tuple(int(tok) for tok in line.split()))
        except ValueError:
            raise SyntaxError_(f"line {lineno}: expected naturals, got {line!r}") from None
        if any(m < 0 for m in nodes[-1]):
            raise SyntaxError_(f"line {lineno}: negative move")
    return ExplicitTree(nodes)


def print_game_file(tree: ExplicitTree) -> str:
    lines = []
    for n in tree.nodes():
        lines.append(" ".join(map(str, n)) if n else "()")
    return "\n".join(lines) + "\n"


def residual(tree: GameTree, sigma: Node, pad: bool = True, budget: int | None = None) -> ExplicitTree:
    """The game played from ``sigma`` with player I moving first.

    For odd ``len(sigma)`` a padding move 0 is prepended so that the player
    who was to move at ``sigma`` keeps their role.
    """
    out = []
    for n in _subtree_nodes(tree, sigma, budget):
        rest = n[len(sigma):]
        out.append(((0,) + rest) if (pad and len(sigma) % 2 == 1) else rest)
    return ExplicitTree(out)


def _subtree_nodes(tree, sigma, budget):
    out = [sigma]
    i = 0
    while i < len(out):
        node = out[i]
        i += 1
        for m in tree.moves(node):
            out.append(node + (m,))
            if budget is not None and len(out) > budget:
                raise BudgetExceeded("residual exceeds budget")
    return out


# ---------------------------------------------------------------- solvers

DEFAULT_BUDGET = 10**6


def _bottom_up(tree: GameTree, budget: int | None) -> list[Node]:
    return tree.bottom_up(budget if budget is not None else DEFAULT_BUDGET)


def rank(tree: GameTree, sigma: Node = (), budget: int | None = None) -> Ordinal:
    """rank(leaf) = 0, rank(node) = sup of rank(child) + 1."""
    if not tree.contains(sigma):
        raise ValueError(f"{sigma} is not a node")
    table = _ranks(tree, sigma, budget)
    return Ordinal.of(table[sigma])


def _ranks(tree, sigma, budget):
    if sigma == ():
        return _solve(tree, budget)[1]
    order = _subtree_nodes(tree, sigma, budget if budget is not None else DEFAULT_BUDGET)[::-1]
    table: dict[Node, int] = {}
    for n in order:
        kids = [table[n + (m,)] for m in tree.moves(n)]
        table[n] = max(kids) + 1 if kids else 0
    return table


def _solve(tree: GameTree, budget: int | None):
    """One bottom-up pass computing h and the integer rank of every node.

    Explicit trees are immutable, so the result is cached on the tree.
    """
    cached = getattr(tree, "_solved", None)
    if cached is not None:
        return cached
    h: dict[Node, int] = {}
    rk: dict[Node, int] = {}
    moves = tree.moves
    for n in _bottom_up(tree, budget):
        win, r = 0, 0
        for m in moves(n):
            c = n + (m,)
            if h[c] == 0:
                win = 1
            if rk[c] >= r:
                r = rk[c] + 1
        h[n] = win
        rk[n] = r
    if isinstance(tree, ExplicitTree):
        tree._solved = (h, rk)
    return h, rk


def bar_recursion(tree: GameTree, budget: int | None = None) -> dict[Node, int]:
    """The labeling h with h(node) = 0 iff every child has h = 1.

    h(node) = 1 exactly when the player to move at ``node`` can win.
    """
    return dict(_solve(tree, budget)[0])


@dataclass(frozen=True)
class Entry:
    rank: Ordinal
    safe: int


def safety_table(tree: GameTree, budget: int | None = None) -> dict[Node, Entry]:
    """Rank and safety of every node; safe means player I wins the residual game."""
    h, ranks = _solve(tree, budget)
    table = {}
    for n, hv in h.items():
        i_wins = hv == 1 if len(n) % 2 == 0 else hv == 0
        table[n] = Entry(_small_ordinal(ranks[n]), 1 if i_wins else 0)
    return table


_SMALL = [Ordinal.of(k) for k in range(64)]


def _small_ordinal(k: int) -> Ordinal:
    return _SMALL[k] if k < len(_SMALL) else Ordinal.of(k)


# ---------------------------------------------------------------- strategies

class Strategy:
    """A map from nodes to moves for one player (named by ``self.player``)."""

    def __call__(self, node: Node):
        raise NotImplementedError


@dataclass
class TableStrategy(Strategy):
    player: str
    table: dict = field(default_factory=dict)
    default: object = 0

    def __call__(self, node: Node):
        return self.table.get(node, self.default)


@dataclass
class RuleStrategy(Strategy):
    player: str
    fn: Callable[[Node], object]
    name: str = "rule"

    def __call__(self, node: Node):
        return self.fn(node)


def synthesize_strategy(tree: GameTree, budget: int | None = None) -> tuple[str, TableStrategy]:
    """The root winner and its least-winning-move strategy.

    At each of the winner's nodes the strategy plays the least move whose
    target is unsafe for the opponent, and 0 where no such move exists.
    """
    table = safety_table(tree, budget)
    winner = I if table[()].safe == 1 else II
    want = 1 if winner == I else 0
    parity = 0 if winner == I else 1
    choice = {}
    for n in table:
        if len(n) % 2 != parity:
            continue
        for m in tree.moves(n):
            if table[n + (m,)].safe == want:
                choice[n] = m
                break
    return winner, TableStrategy(winner, choice, 0)


def strategy_from_labeling(tree: GameTree, h: dict[Node, int], player: str) -> TableStrategy:
    """Always move to the least child labeled 0 (a loss for whoever moves next)."""
    parity = 0 if player == I else 1
    choice = {}
    for n in h:
        if len(n) % 2 == parity:
            for m in tree.moves(n):
                if h[n + (m,)] == 0:
                    choice[n] = m
                    break
    return TableStrategy(player, choice, 0)


def verify_strategy(tree: GameTree, strategy: Strategy, player: str | None = None,
                    horizon: int | None = None, budget: int = DEFAULT_BUDGET) -> bool:
    """True if ``strategy`` wins against every sequence of opponent moves listed by ``tree``.

    Opponent moves outside the tree lose on the spot and need not be tried.
    With a horizon, surviving to it counts as a win for player II only.
    """
    player = player or strategy.player
    stack = [()]
    seen = 0
    while stack:
        node = stack.pop()
        seen += 1
        if seen > budget:
            raise BudgetExceeded("strategy verification exceeded its budget")
        if horizon is not None and len(node) >= horizon:
            if player == I:
                return False
            continue
        who = mover(node)
        if who == player:
            m = strategy(node)
            nxt = node + (m,)
            if not tree.contains(nxt):
                return False
            stack.append(nxt)
        else:
            stack.extend(node + (m,) for m in tree.moves(node))
    return True


# ---------------------------------------------------------------- plays

OPEN_WINS = "OpenWins"
CLOSED_WINS = "ClosedWins"
HORIZON_LIMITED = "ClosedWinsSoFar(horizon-limited)"


@dataclass
class Play:
    moves: list
    exit_index: int | None
    winner: str | None
    horizon_limited: bool = False

    @property
    def verdict(self) -> str:
        if self.horizon_limited:
            return HORIZON_LIMITED
        return OPEN_WINS if self.winner == I else CLOSED_WINS


def play(sigma: Strategy, pi: Strategy, tree: GameTree, horizon: int) -> Play:
    """Alternate ``sigma`` (player I) and ``pi`` (player II) for at most ``horizon`` moves.

    The first move that leaves the tree loses for the player who made it.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    moves: list = []
    for k in range(horizon):
        node = tuple(moves)
        who = sigma if k % 2 == 0 else pi
        moves.append(who(node))
        if not tree.contains(tuple(moves)):
            loser = I if k % 2 == 0 else II
            return Play(moves, k + 1, opponent(loser))
    return Play(moves, None, None, horizon_limited=True)


# ---------------------------------------------------------------- Kleene-Brouwer

def kb_key(node: Node):
    return tuple((0, move_key(m)) for m in node) + ((1,),)


def kb_less(a: Node, b: Node) -> bool:
    return kb_key(a) < kb_key(b)


def kleene_brouwer(tree: ExplicitTree) -> list[Node]:
    """Nodes in Kleene-Brouwer order: descendants first, siblings by smaller move."""
    return sorted(tree.nodes(), key=kb_key)


# ---------------------------------------------------------------- ordinal games

DEFAULT_PROBES = ("0", "1", "2", "w", "w+1", "w*2", "w^2")


def parse_probes(text: str) -> tuple[Ordinal, ...]:
    return tuple(sorted({parse_ordinal(p) for p in text.split(",") if p.strip()}))


def _slice(bound: Ordinal | None, alpha: Ordinal, probes, branching, forced=()):
    """Finite slice of the ordinals below ``bound`` (or below alpha)."""
    top = alpha if bound is None else bound
    if top.is_zero:
        return []
    cands = []
    for m in forced:
        if m < top and m not in cands:
            cands.append(m)
    if top.is_successor and top.predecessor() not in cands:
        cands.append(top.predecessor())
    for p in sorted(probes, reverse=True):
        if p < top and p not in cands:
            cands.append(p)
    if ZERO not in cands:
        cands.append(ZERO)
    if branching is not None and len(cands) > branching:
        cands = cands[:branching - 1] + [ZERO]
    return sorted(cands)


class RuleGame(GameTree):
    """A game given by a legality rule and a finite move slice per node."""

    name = "rule"

    def __init__(self, alpha: Ordinal, probes: Iterable[Ordinal] | None = None,
                 branching: int | None = 4, budget: int = DEFAULT_BUDGET):
        if alpha.is_zero:
            raise ValueError("alpha must be positive")
        self.alpha = alpha
        self.probes = tuple(probes) if probes is not None else tuple(parse_ordinal(p) for p in DEFAULT_PROBES)
        self.branching = branching
        self.budget = budget

    def legal(self, node: Node, m) -> bool:
        raise NotImplementedError

    def contains(self, node: Node) -> bool:
        return all(self.legal(node[:k], node[k]) for k in range(len(node)))

    def bound(self, node: Node) -> Ordinal:
        raise NotImplementedError

    def legal_moves_description(self, node: Node) -> str:
        raise NotImplementedError


class GGame(RuleGame):
    """G_alpha: both players play decreasing sequences of ordinals below alpha."""

    name = "G"

    def bound(self, node: Node) -> Ordinal:
        """Each player's next move must lie below this (their own previous move, or alpha)."""
        return node[-2] if len(node) >= 2 else self.alpha

    def legal(self, node: Node, m) -> bool:
        return isinstance(m, Ordinal) and m < self.bound(node)

    def moves(self, node: Node) -> list:
        forced = (node[-1],) if len(node) % 2 == 1 else ()
        return _slice(self.bound(node), self.alpha, self.probes, self.branching, forced)

    def legal_moves_description(self, node: Node) -> str:
        return f"any ordinal < {print_ordinal(self.bound(node))}"


class OGame(RuleGame):
    """O_alpha: like G_alpha, but I may restart at any ordinal below alpha.

    After a restart, II's next move is again any ordinal below alpha.
    """

    name = "O"

    def _state(self, node: Node):
        """Previous moves of I and II in the current run (None right after a start)."""
        prev_i = prev_ii = None
        for k, m in enumerate(node):
            if k % 2 == 0:
                if isinstance(m, Restart):
                    prev_i, prev_ii = m.value, None
                else:
                    prev_i = m
            else:
                prev_ii = m
        return prev_i, prev_ii

    def bound(self, node: Node) -> Ordinal:
        prev_i, prev_ii = self._state(node)
        prev = prev_i if len(node) % 2 == 0 else prev_ii
        return self.alpha if prev is None else prev

    def legal(self, node: Node, m) -> bool:
        if len(node) % 2 == 0 and isinstance(m, Restart):
            return m.value < self.alpha
        return isinstance(m, Ordinal) and m < self.bound(node)

    def moves(self, node: Node) -> list:
        if len(node) % 2 == 1:
            last = node[-1]
            forced = (last.value if isinstance(last, Restart) else last,)
            return _slice(self.bound(node), self.alpha, self.probes, self.branching, forced)
        if not node:
            return _slice(None, self.alpha, self.probes, self.branching)
        width = self.branching
        cont = _slice(self.bound(node), self.alpha, self.probes,
                      None if width is None else max(1, width // 2))
        room = None if width is None else max(1, width - len(cont))
        restarts = [Restart(v) for v in _slice(None, self.alpha, self.probes, room)]
        return cont + restarts

    def legal_moves_description(self, node: Node) -> str:
        if len(node) % 2 == 0 and node:
            return (f"any ordinal < {print_ordinal(self.bound(node))}, "
                    f"or 'restart B' with B < {print_ordinal(self.alpha)}")
        return f"any ordinal < {print_ordinal(self.bound(node))}"


def make_G(alpha: Ordinal, probes=None, branching: int | None = 4) -> GGame:
    return GGame(alpha, probes, branching)


def make_O(alpha: Ordinal, probes=None, branching: int | None = 4) -> OGame:
    return OGame(alpha, probes, branching)


def full_slice_G(n: int) -> GGame:
    """G_n for finite n with every legal move listed."""
    return GGame(Ordinal.of(n), [Ordinal.of(k) for k in range(n)], branching=None)


def copy_strategy(alpha: Ordinal) -> RuleStrategy:
    """Player II repeats I's last ordinal (the value of a restart after a restart)."""

    def copy(node: Node):
        last = node[-1]
        return last.value if isinstance(last, Restart) else last

    return RuleStrategy(II, copy, f"copy<{print_ordinal(alpha)}")


@dataclass
class SweepResult:
    plays: int = 0
    ii_lost: int = 0
    horizon_limited: int = 0
    ii_moveless_first: int = 0
    counterexample: list | None = None


def sweep_player_one(game: RuleGame, strategy: Strategy, horizon: int) -> SweepResult:
    """Run ``strategy`` (for II) against every sequence of I's sliced moves up to ``horizon``.

    A play ends when I has no legal move (II wins), when II's prescribed move
    is illegal (II loses), or at the horizon.
    """
    res = SweepResult()
    stack: list[Node] = [()]
    while stack:
        node = stack.pop()
        if len(node) >= horizon:
            res.plays += 1
            res.horizon_limited += 1
            continue
        if len(node) % 2 == 0:
            options = game.moves(node)
            if not options:
                res.plays += 1
                continue
            stack.extend(node + (m,) for m in options)
        else:
            m = strategy(node)
            if not game.legal(node, m):
                res.plays += 1
                res.ii_lost += 1
                if game.bound(node).is_zero:
                    res.ii_moveless_first += 1
                if res.counterexample is None:
                    res.counterexample = list(node) + [m]
                continue
            stack.append(node + (m,))
    return res


def explicit_from_rule(game: RuleGame, horizon: int | None = None, budget: int = DEFAULT_BUDGET) -> ExplicitTree:
    """Materialize a rule game's sliced tree (cut at ``horizon`` if given)."""
    out = [()]
    i = 0
    while i < len(out):
        node = out[i]
        i += 1
        if horizon is not None and len(node) >= horizon:
            continue
        for m in game.moves(node):
            out.append(node + (m,))
            if len(out) > budget:
                raise BudgetExceeded("rule game slice exceeds budget")
    return ExplicitTree(out)


# ---------------------------------------------------------------- generators

def random_tree(rng: random.Random, max_nodes: int = 300, max_branching: int = 4, max_depth: int = 12) -> ExplicitTree:
    """Grow a random tree by attaching children to random existing nodes."""
    target = rng.randint(1, max_nodes)
    nodes = [()]
    kids: dict[Node, int] = {(): 0}
    attempts = 0
    while len(nodes) < target and attempts < 20 * max_nodes:
        attempts += 1
        parent = rng.choice(nodes)
        if kids[parent] >= max_branching or len(parent) >= max_depth:
            continue
        child = parent + (kids[parent],)
        kids[parent] += 1
        kids[child] = 0
        nodes.append(child)
    return ExplicitTree(nodes)


def all_shapes(levels: int, branching: int) -> list[tuple]:
    """Every ordered tree shape with at most ``levels`` levels and ``branching`` children per node.

    A shape is the tuple of its children's shapes; children are labeled 0, 1, ... in order.
    """
    if levels <= 1:
        return [()]
    smaller = all_shapes(levels - 1, branching)
    out = [()]
    for k in range(1, branching + 1):
        out.extend(itertools.product(smaller, repeat=k))
    return out


def shape_nodes(shape: tuple, prefix: Node = ()) -> Iterator[Node]:
    yield prefix
    for i, child in enumerate(shape):
        yield from shape_nodes(child, prefix + (i,))


def tree_from_shape(shape: tuple) -> ExplicitTree:
    order: list[Node] = [()]
    kids: dict[Node, list] = {}
    shapes = [shape]
    i = 0
    while i < len(order):
        node, sh = order[i], shapes[i]
        i += 1
        kids[node] = list(range(len(sh)))
        for k, c in enumerate(sh):
            order.append(node + (k,))
            shapes.append(c)
    return ExplicitTree._from_order(order, kids)
