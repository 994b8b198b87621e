import random

import pytest
from hypothesis import given, settings, strategies as st

from hytw import oracles
from hytw.errors import BudgetExceeded, SyntaxError_
from hytw.games import (
    CLOSED_WINS, HORIZON_LIMITED, I, II, OPEN_WINS, ExplicitTree, Restart,
    TableStrategy, all_shapes, bar_recursion, copy_strategy, explicit_from_rule, full_slice_G,
    kleene_brouwer, make_G, make_O, parse_game_file, play, print_game_file, rank, residual,
    safety_table, strategy_from_labeling, sweep_player_one, synthesize_strategy, tree_from_shape,
    verify_strategy, random_tree,
)
from hytw.ordinals import OMEGA, Ordinal, parse_ordinal

N = Ordinal.of
CHAIN = ExplicitTree([(0, 0)])


def test_rank_examples():
    assert rank(ExplicitTree([])) == N(0)
    assert rank(CHAIN) == N(2)
    assert rank(ExplicitTree([(0,), (1, 0, 0)])) == N(3)
    assert rank(CHAIN, (0,)) == N(1)


def test_rank_of_truncated_omega_game_matches_definition():
    for n in range(1, 6):
        tree = explicit_from_rule(full_slice_G(n))
        assert rank(tree) == N(oracles.rank_by_definition(tree.node_set))


def test_bar_recursion_examples():
    h = bar_recursion(CHAIN)
    assert h == {(0, 0): 0, (0,): 1, (): 0}
    h = bar_recursion(ExplicitTree([(0,), (1, 0)]))
    assert h[()] == 1 and h[(0,)] == 0 and h[(1,)] == 1


def test_safety_examples():
    table = safety_table(CHAIN)
    # I must move at (0, 0) and cannot, so II wins from everywhere
    assert [table[n].safe for n in [(), (0,), (0, 0)]] == [0, 0, 0]
    assert table[()].rank == N(2)


def test_safety_agrees_with_residual_games():
    rng = random.Random(1)
    for _ in range(60):
        tree = random_tree(rng, 200)
        table = safety_table(tree)
        for n in tree.nodes():
            assert table[n].safe == oracles.safe_by_residual(tree.node_set, n)


def test_residual_pads_odd_positions():
    r = residual(CHAIN, (0,))
    assert r.node_set == frozenset({(), (0,), (0, 0)})
    assert residual(CHAIN, ()).node_set == CHAIN.node_set


def test_synthesis_example():
    tree = ExplicitTree([(0,), (1, 0)])
    winner, strat = synthesize_strategy(tree)
    assert winner == I and strat(()) == 0
    assert verify_strategy(tree, strat)


def test_synthesis_prefers_the_least_winning_move():
    tree = ExplicitTree([(2,), (5,), (7, 0)])
    winner, strat = synthesize_strategy(tree)
    assert winner == I and strat(()) == 2


def test_leaf_only_tree_is_won_by_ii():
    winner, strat = synthesize_strategy(ExplicitTree([]))
    assert winner == II
    assert rank(ExplicitTree([])) == N(0)


def _small_trees():
    for shape in all_shapes(3, 2) + all_shapes(4, 2)[::7]:
        tree = tree_from_shape(shape)
        if tree.depth() <= 6:
            yield tree


def test_synthesized_strategy_beats_every_counter_strategy():
    for tree in _small_trees():
        nodes = tree.node_set
        winner, strat = synthesize_strategy(tree)
        assert winner == oracles.minimax_winner(nodes)
        loser = II if winner == I else I
        for counter in oracles.all_counter_strategies(nodes, loser):
            c = lambda n, counter=counter: counter.get(n, 0)
            pair = (strat, c) if winner == I else (c, strat)
            assert oracles.run_play(nodes, *pair) == winner


def test_labeling_strategy_wins():
    rng = random.Random(2)
    for _ in range(100):
        tree = random_tree(rng, 150)
        h = bar_recursion(tree)
        winner = I if h[()] == 1 else II
        assert verify_strategy(tree, strategy_from_labeling(tree, h, winner), winner)


def test_verify_rejects_a_losing_strategy():
    tree = ExplicitTree([(0,), (1, 0)])
    assert not verify_strategy(tree, TableStrategy(I, {(): 1}), I)


# ---------------------------------------------------------------- plays

def test_play_examples():
    tree = ExplicitTree([(0, 0), (1,)])
    p = play(TableStrategy(I, {(): 1}), TableStrategy(II, {}, 0), tree, 10)
    assert p.winner == I and p.verdict == OPEN_WINS and p.exit_index == 2
    p = play(TableStrategy(I, {}, 0), TableStrategy(II, {}, 0), tree, 10)
    assert p.winner == II and p.verdict == CLOSED_WINS
    p = play(TableStrategy(I, {}, 0), TableStrategy(II, {}, 0), ExplicitTree([(0,) * 12]), 4)
    assert p.verdict == HORIZON_LIMITED


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_play_matches_literal_runner(seed):
    rng = random.Random(seed)
    tree = random_tree(rng, 60)
    si = TableStrategy(I, {n: rng.randint(0, 3) for n in tree.nodes()})
    sii = TableStrategy(II, {n: rng.randint(0, 3) for n in tree.nodes()})
    assert play(si, sii, tree, 100).winner == oracles.run_play(tree.node_set, si, sii)


# ---------------------------------------------------------------- Kleene-Brouwer and files

def test_kleene_brouwer_example():
    assert kleene_brouwer(ExplicitTree([(0,), (1,)])) == [(0,), (1,), ()]


def test_kleene_brouwer_matches_oracle():
    rng = random.Random(3)
    for _ in range(50):
        tree = random_tree(rng, 100)
        assert kleene_brouwer(tree) == oracles.kb_sorted(tree.nodes())


def test_game_file_round_trip():
    tree = parse_game_file("# a chain\n0 0\n1\n")
    assert tree == ExplicitTree([(0, 0), (1,)])
    assert parse_game_file(print_game_file(tree)) == tree
    with pytest.raises(SyntaxError_):
        parse_game_file("0 x\n")


# ---------------------------------------------------------------- ordinal games

def test_g1_trace():
    g = make_G(N(1))
    assert g.moves(()) == [N(0)]
    assert g.moves((N(0),)) == [N(0)]
    assert g.moves((N(0), N(0))) == []


def test_omega_is_illegal_in_g_omega():
    g = make_G(OMEGA)
    assert not g.legal((), OMEGA)
    assert g.legal((), N(10**6))
    # I's second move must lie below I's first
    assert not g.legal((N(5), N(3)), N(5))
    assert g.legal((N(5), N(3)), N(4))


def test_o_restart_trace():
    o = make_O(OMEGA)
    node = (N(2), N(1))
    assert o.legal(node, Restart(N(5)))
    assert not o.legal(node, N(2))
    after = node + (Restart(N(5)),)
    # after a restart II may again answer anything below alpha
    assert o.legal(after, N(40)) and o.contains(after + (N(5),))
    assert not o.legal((), Restart(OMEGA))


def test_copy_strategy_in_g5():
    g, copy = make_G(N(5)), copy_strategy(N(5))
    node = ()
    for m in (3, 1, 0):
        node = node + (N(m),)
        node = node + (copy(node),)
        assert g.contains(node)
    assert node == tuple(N(k) for k in (3, 3, 1, 1, 0, 0))
    assert g.moves(node) == []


def test_copy_strategy_survives_restarts():
    o = make_O(OMEGA)
    res = sweep_player_one(o, copy_strategy(OMEGA), 20)
    assert res.ii_lost == 0
    assert res.horizon_limited > 0


def test_player_one_never_wins_small_truncations():
    for n in range(1, 6):
        tree = explicit_from_rule(full_slice_G(n))
        assert oracles.minimax_winner(tree.node_set) == II
        winner, strat = synthesize_strategy(tree)
        assert winner == II and verify_strategy(tree, strat)


def test_sliced_g_games_are_won_by_ii():
    for alpha in ["w", "w*2+3", "w^2"]:
        g = make_G(parse_ordinal(alpha))
        res = sweep_player_one(g, copy_strategy(g.alpha), 12)
        assert res.ii_lost == 0 and res.plays > 0


def test_o_game_needs_a_horizon():
    with pytest.raises(BudgetExceeded):
        explicit_from_rule(make_O(N(3)), budget=5000)
