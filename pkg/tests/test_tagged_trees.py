import pytest
from hypothesis import given, settings, strategies as st

from hytw.errors import InsufficientHeadroom, InvalidInstance, RetagObstruction, SyntaxError_
from hytw.ordinals import INF, OMEGA, Ordinal, parse_ordinal as O, tag_gt
from hytw.tagged_trees import (
    Condition, RetagInstance, condition_violations, extends, generate_condition, generate_instance,
    is_condition, parse_condition_file, print_condition_file, project, retag,
    retag_conclusion_violations, retag_equiv, retag_exists, shrink_condition, shrink_instance,
)

N = Ordinal.of
W2 = O("w^2")
BASE = Condition({(): (INF, INF), (0,): (N(5), INF)})


def C(labels):
    return Condition({(): (INF, INF), **labels})


# ---------------------------------------------------------------- conditions

def test_condition_examples():
    assert is_condition(Condition())
    assert is_condition(BASE)
    assert is_condition(C({(0,): (N(5), INF), (0, 0): (N(5), N(9)), (0, 0, 0): (N(2), N(9)),
                           (0, 0, 0, 0): (N(2), N(4))}))


def test_condition_violation_messages():
    assert condition_violations(Condition({(): (N(1), INF)}))[0].startswith("root")
    # Closed may not change Open's tag
    bad = C({(0,): (N(5), INF), (0, 0): (N(4), N(1))})
    assert "alternation" in condition_violations(bad)[0]
    # Open descended 5 -> 2 so Closed must descend 9 -> below 9
    bad = C({(0,): (N(5), INF), (0, 0): (N(5), N(9)), (0, 0, 0): (N(2), N(9)),
             (0, 0, 0, 0): (N(2), N(9))})
    assert "descent" in condition_violations(bad)[0]
    assert "parent missing" in condition_violations(C({(0, 0): (INF, INF)}))[0]


def test_infinite_open_tag_never_triggers_descent():
    c = C({(0,): (INF, INF), (0, 0): (INF, N(3)), (0, 0, 0): (N(1), N(3)), (0, 0, 0, 0): (N(1), N(3))})
    assert is_condition(c)


def test_extends_examples():
    bigger = C({(0,): (N(5), INF), (0, 0): (N(5), N(1))})
    assert extends(bigger, BASE)
    assert not extends(BASE, bigger)
    assert not extends(C({(0,): (N(6), INF)}), BASE)


def test_retag_equiv_examples():
    a = C({(0,): (OMEGA * 2, INF)})
    b = C({(0,): (OMEGA * 3, INF)})
    assert retag_equiv(a, b, OMEGA)
    assert not retag_equiv(C({(0,): (N(1), INF)}), C({(0,): (N(2), INF)}), OMEGA)
    assert retag_equiv(a, C({(0,): (INF, INF)}), OMEGA)
    assert not retag_equiv(a, C({(0,): (INF, INF), (1,): (INF, INF)}), OMEGA)


def test_project_example():
    p = C({(0,): (N(5), INF), (0, 0): (N(5), N(1))})
    assert project(p, N(3)) == C({(0,): (INF, INF), (0, 0): (INF, N(1))})


def test_generated_conditions_are_valid():
    for seed in range(500):
        c = generate_condition(seed, 20, O("w^2"))
        assert is_condition(c), (seed, condition_violations(c))
        assert all(t is INF or t < W2 for t in c.tags())


# ---------------------------------------------------------------- retagging examples

def _inst(p, q, r, alpha=W2, gamma=N(3)):
    return RetagInstance(p, q, r, alpha, gamma)


def test_retag_with_nothing_new_returns_p():
    p, q = C({(0,): (W2 + 3, INF)}), C({(0,): (W2 + 5, INF)})
    assert retag(_inst(p, q, q)) == p


def test_retag_on_continuation_moves():
    r = C({(0,): (N(5), INF), (0, 0): (N(5), W2 + 4), (0, 0, 0): (N(2), W2 + 4)})
    inst = _inst(BASE, BASE, r)
    assert inst.gamma_tilde == N(6)
    assert inst.ranks == {(0, 0): 1, (0, 0, 0): 0}
    out = retag(inst)
    # the high Closed tag becomes gamma~ + rank = 7; low tags are kept
    assert out == C({(0,): (N(5), INF), (0, 0): (N(5), N(7)), (0, 0, 0): (N(2), N(7))})


def test_retag_on_a_restart_move():
    r = C({(0,): (N(5), INF), (0, 0): (N(5), W2 + 4), (0, 0, 0): (W2 + 1, W2 + 4)})
    inst = _inst(BASE, BASE, r)
    assert (0, 0, 0) not in inst.N
    out = retag(inst)
    assert out[(0, 0)] == (N(5), N(7))
    assert out[(0, 0, 0)] == (INF, N(7))


def test_retag_inherits_p_above_alpha():
    p = C({(0,): (W2 + 9, INF)})
    q = C({(0,): (INF, INF)})
    r = C({(0,): (INF, INF), (0, 0): (INF, N(4))})
    out = retag(_inst(p, q, r))
    assert out == C({(0,): (W2 + 9, INF), (0, 0): (W2 + 9, N(4))})
    assert not retag_conclusion_violations(_inst(p, q, r), out)


def test_retag_needs_headroom():
    r = C({(0,): (N(5), INF), (0, 0): (N(5), W2 + 4)})
    with pytest.raises(InsufficientHeadroom):
        retag(_inst(BASE, BASE, r, alpha=N(7), gamma=N(6)))


def test_invalid_instances_are_rejected():
    r = C({(1,): (N(5), INF)})
    with pytest.raises(InvalidInstance):
        retag(_inst(BASE, BASE, r))


# ---------------------------------------------------------------- generated instances

def test_generated_instances_are_valid():
    for seed in range(10_000):
        assert not generate_instance(seed).problems()


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_retag_output_meets_its_conclusions_or_reports(seed):
    inst = generate_instance(seed)
    try:
        out = retag(inst)
    except (InsufficientHeadroom, RetagObstruction):
        return
    assert is_condition(out)
    assert extends(out, inst.p)
    assert retag_equiv(out, inst.r, inst.gamma_tilde)


def test_seed_255_has_no_valid_output():
    # the construction fails here and exhaustive search confirms nothing else works
    inst = generate_instance(255)
    assert (inst.alpha, inst.gamma) == (W2, OMEGA * 2)
    with pytest.raises(RetagObstruction) as e:
        retag(inst)
    assert any("descent" in v for v in e.value.violations)
    assert retag_exists(inst) is None


DEFECT = RetagInstance(
    p=C({(0,): (O("w^w+w"), INF)}),
    q=C({(0,): (INF, INF)}),
    r=C({(0,): (INF, INF), (0, 0): (INF, INF), (0, 0, 0): (W2, INF),
         (0, 0, 0, 0): (W2, O("w^w+w")), (0, 0, 0, 0, 0): (N(0), O("w^w+w"))}),
    alpha=O("w^w"), gamma=OMEGA * 3,
)


def test_construction_misses_a_valid_output():
    # r restarts at 000 but p's Open tag makes the same move a continuation
    assert DEFECT.gamma_tilde == W2 + 1
    with pytest.raises(RetagObstruction) as e:
        retag(DEFECT)
    out = e.value.candidate
    assert out[(0, 0)][1] == out[(0, 0, 0, 0)][1] == W2 + 2
    found = retag_exists(DEFECT)
    assert found is not None and not retag_conclusion_violations(DEFECT, found)
    assert found[(0, 0, 0, 0)][1] == W2 + 1


def test_seed_9641_fails_although_an_output_exists():
    inst = generate_instance(9641)
    with pytest.raises(RetagObstruction):
        retag(inst)
    assert retag_exists(inst) is not None


def test_shrinking_keeps_the_failure():
    inst = generate_instance(255)

    def fails(i):
        try:
            retag(i)
        except RetagObstruction:
            return True
        except InsufficientHeadroom:
            return False
        return False

    small = shrink_instance(inst, fails)
    assert fails(small) and len(small.r) <= len(inst.r)


def test_shrink_condition():
    c = generate_condition(3, 15)
    small = shrink_condition(c, lambda d: len(d) >= 3)
    assert len(small) == 3


# ---------------------------------------------------------------- restart-free subtrees

def _rank_oracle(inst, node):
    """Height of the restart-free part of r below ``node``; a restart move ends the run."""
    r = inst.r.labels
    if len(node) % 2 == 1 and node[:-1] in r:
        prev, cur = r[node[:-1]][0], r[node][0]
        if not (prev is not INF and tag_gt(prev, cur)):
            return 0
    return max((1 + _rank_oracle(inst, c) for c in inst.r.children(node)), default=0)


def test_subtree_ranks_match_direct_recursion():
    for seed in range(300):
        inst = generate_instance(seed)
        for n, k in inst.ranks.items():
            assert k == _rank_oracle(inst, n)


# ---------------------------------------------------------------- files

def test_condition_file_round_trip():
    c = generate_condition(7, 12, W2)
    assert parse_condition_file(print_condition_file(c)) == c
    text = "() inf inf\n0 w+1 inf   # Open moves\n0 0 w+1 3\n"
    assert parse_condition_file(text) == C({(0,): (OMEGA + 1, INF), (0, 0): (OMEGA + 1, N(3))})


@pytest.mark.parametrize("text", ["() inf\n", "x inf inf\n", "() inf inf\n() inf inf\n", "0 w+ inf\n", "-1 0 0\n"])
def test_condition_file_errors(text):
    with pytest.raises(SyntaxError_):
        parse_condition_file(text)
