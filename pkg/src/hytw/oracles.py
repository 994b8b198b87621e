"""Brute-force reference implementations used only to cross-check the solvers.

Nothing here shares code with :mod:`hytw.games`; trees are plain sets of
tuples and every answer is computed from first principles.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Callable, Iterable, Iterator


def _children(nodes: frozenset, node: tuple) -> list[tuple]:
    return sorted(n for n in nodes if len(n) == len(node) + 1 and n[:len(node)] == node)


def _child_map(nodes: frozenset) -> dict[tuple, list[tuple]]:
    kids: dict[tuple, list[tuple]] = {n: [] for n in nodes}
    for n in nodes:
        if n:
            kids[n[:-1]].append(n)
    return kids


def minimax_mover_wins(nodes: frozenset, node: tuple = ()) -> bool:
    """True if the player to move at ``node`` wins; moving out of the tree loses."""
    kids = _child_map(nodes)

    def wins(n):
        return any(not wins(k) for k in kids[n])

    return wins(node)


def mover_wins_all(nodes: frozenset) -> dict[tuple, bool]:
    """Mover-wins for every node, deepest nodes first."""
    kids = _child_map(nodes)
    out: dict[tuple, bool] = {}
    for n in sorted(nodes, key=len, reverse=True):
        out[n] = any(not out[k] for k in kids[n])
    return out


def minimax_winner(nodes: frozenset) -> str:
    return "I" if minimax_mover_wins(nodes, ()) else "II"


def padded_residual(nodes: frozenset, sigma: tuple) -> frozenset:
    """The game from ``sigma`` on, re-rooted, with one padding move 0 in front when |sigma| is odd."""
    rest = [n[len(sigma):] for n in nodes if n[:len(sigma)] == sigma]
    if len(sigma) % 2 == 1:
        return frozenset([()] + [(0,) + r for r in rest])
    return frozenset(rest)


def safe_by_residual(nodes: frozenset, sigma: tuple) -> int:
    """1 if player I wins the padded residual game at ``sigma``."""
    return 1 if minimax_winner(padded_residual(nodes, sigma)) == "I" else 0


def rank_by_definition(nodes: frozenset, node: tuple = ()) -> int:
    kids = _child_map(nodes)

    def rk(n):
        return max((rk(k) + 1 for k in kids[n]), default=0)

    return rk(node)


def shape_at(shape: tuple, node: tuple) -> tuple:
    for m in node:
        shape = shape[m]
    return shape


def shape_safe(shape: tuple, node: tuple) -> int:
    """Safety via the padded residual built as a shape: one forced padding move on odd nodes."""
    sub = shape_at(shape, node)
    padded = (sub,) if len(node) % 2 == 1 else sub
    return 1 if _shape_wins(padded) else 0


def kb_sorted(nodes: Iterable[tuple]) -> list[tuple]:
    """Order by pairwise comparison straight from the definition (insertion sort)."""

    def less(a, b):
        for x, y in zip(a, b):
            if x != y:
                return x < y
        return len(a) > len(b)

    out: list[tuple] = []
    for n in nodes:
        i = 0
        while i < len(out) and less(out[i], n):
            i += 1
        out.insert(i, n)
    return out


def shape_mover_wins(shape: tuple) -> bool:
    """Minimax over a nested-tuple shape (children = components)."""
    return _shape_wins(shape)


@lru_cache(maxsize=None)
def _shape_wins(shape: tuple) -> bool:
    return any(not _shape_wins(c) for c in shape)


def player_nodes(nodes: frozenset, parity: int) -> list[tuple]:
    return sorted(n for n in nodes if len(n) % 2 == parity)


def all_counter_strategies(nodes: frozenset, player: str, extra_move: int = 1) -> Iterator[dict]:
    """Every strategy for ``player`` on a small tree, as a dict node -> move.

    At each of the player's nodes the options are the node's children plus one
    move that leaves the tree (so suicidal strategies are enumerated too).
    """
    parity = 0 if player == "I" else 1
    mine = player_nodes(nodes, parity)
    options = []
    for n in mine:
        kids = [k[-1] for k in _children(nodes, n)]
        out = max(kids, default=-1) + 1
        options.append(kids + [out] * extra_move)
    for choice in itertools.product(*options):
        yield dict(zip(mine, choice))


def run_play(nodes: frozenset, strat_i: Callable, strat_ii: Callable, max_len: int = 64) -> str:
    """Winner of the play; the player whose move leaves the tree loses."""
    node: tuple = ()
    while len(node) < max_len:
        who = "I" if len(node) % 2 == 0 else "II"
        m = (strat_i if who == "I" else strat_ii)(node)
        node = node + (m,)
        if node not in nodes:
            return "II" if who == "I" else "I"
    raise RuntimeError("play did not terminate on a finite tree")
