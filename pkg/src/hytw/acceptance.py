"""The seven acceptance criteria as runnable checks.

Each ``criterion_N`` returns a :class:`CriterionResult`; ``run_all`` runs them
in order.  The test suite and the ``selftest`` subcommand both call these.
"""

from __future__ import annotations

import io
import random
import tempfile
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from contextlib import redirect_stdout
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import oracles
from .errors import BudgetExceeded, HytwError, InsufficientHeadroom, RetagObstruction, StepBudgetExceeded
from .games import (
    bar_recursion, copy_strategy, explicit_from_rule, full_slice_G, make_G, make_O, opponent,
    random_tree, safety_table, strategy_from_labeling, sweep_player_one, synthesize_strategy,
    all_shapes, tree_from_shape, verify_strategy,
)
from .gen import DEFAULT_SIGNATURE, random_closed_term, random_functional, random_stream
from .lowering import lower_closed, rearrange_functional, shift_functional
from .normalizer import alpha_equal, check_normal_structure, normalize
from .ordinals import ZERO, parse_ordinal, print_ordinal, random_ordinal
from .semantics import (
    Oracle1, concat, diag_real, eval_term, even_row_helper, even_rows, star,
)
from .tagged_trees import (
    DEFAULT_ALPHAS, extends, generate_condition, generate_instance, grow, is_condition,
    parse_condition_file, print_condition_file, project, random_retagging, retag, retag_equiv,
    retag_exists, tag_palette,
)
from .terms import Concat, NatLit, Param, Star, T0, T1, T2, parse_term, print_term

POSITIONS = 50


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] criterion {self.number} ({self.title}): {self.detail}; "
                f"{self.seconds:.1f}s of {self.limit:.0f}s")


def _timed(number: int, title: str, limit: float, body: Callable[[], tuple[bool, str]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail = body()
    return CriterionResult(number, title, ok, detail, time.perf_counter() - t0, limit)


def _fmt_counts(c: Counter) -> str:
    return ", ".join(f"{k}={v}" for k, v in sorted(c.items())) or "none"


def _map(fn, chunks, jobs: int):
    if jobs <= 1:
        return [fn(c) for c in chunks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, chunks))


# ---------------------------------------------------------------- 1 normalization

def criterion_1(seed: int = 1, count: int = 2000, max_size: int = 60) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        bad: Counter = Counter()
        most = 0
        for _ in range(count):
            t = random_closed_term(rng, rng.choice((T0, T1, T2)), max_size)
            try:
                a, trace = normalize(t, "leftmost-outermost", budget=10**6)
                b, _ = normalize(t, "rightmost-innermost", budget=10**6)
            except StepBudgetExceeded:
                bad["budget"] += 1
                continue
            most = max(most, trace.count)
            if not alpha_equal(a, b):
                bad["strategies disagree"] += 1
            if not check_normal_structure(a).ok():
                bad["structure flags"] += 1
        return not bad, f"{count} terms, max {most} steps, failures: {_fmt_counts(bad)}"

    return _timed(1, "normalization", 60, body)


# ---------------------------------------------------------------- 2 lowering

def criterion_2(seed: int = 2, count: int = 500, oracles_each: int = 20, max_size: int = 40) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        bad: Counter = Counter()
        for _ in range(count):
            t = random_closed_term(rng, T2, max_size, star_lambda=True)
            env = {"a": rng.randint(0, 9), "b": rng.randint(0, 9), "r": random_stream(rng),
                   "s": random_stream(rng), "F": random_functional(rng), "G": random_functional(rng)}
            try:
                code = lower_closed(t)
                if code.purity_violations():
                    bad["nonstandard subterm"] += 1
                direct = eval_term(t, env)
                lowered = code.realize(env)
                for _ in range(oracles_each):
                    f = random_stream(rng)
                    if direct(f) != lowered(f):
                        bad["mismatch"] += 1
            except HytwError as e:
                bad[e.name] += 1
        return not bad, f"{count} terms x {oracles_each} oracles, failures: {_fmt_counts(bad)}"

    return _timed(2, "lowering differential", 120, body)


# ---------------------------------------------------------------- 3 coding operators

def _concat_by_hand(k: int, r: Oracle1) -> Oracle1:
    return Oracle1.native(lambda n: k if n == 0 else r(n - 1), "by-hand")


def criterion_3(seed: int = 3, count: int = 500) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        bad: Counter = Counter()
        rng_pos = range(POSITIONS)
        for _ in range(count):
            k, r = rng.randint(0, 9), random_stream(rng)
            c = concat(k, r)
            via_eval = eval_term(Concat(NatLit(k), Param("r", T1)), {"r": r})
            if c(0) != k or any(c(n + 1) != r(n) for n in rng_pos) or \
                    any(via_eval(n) != c(n) for n in rng_pos):
                bad["concat"] += 1
        for _ in range(count):
            F, r = random_functional(rng), random_stream(rng)
            s = star(F, r)
            via_eval = eval_term(Star(Param("F", T2), Param("r", T1)), {"F": F, "r": r})
            if any(s(k) != F(_concat_by_hand(k, r)) or via_eval(k) != s(k) for k in rng_pos):
                bad["star"] += 1
        for _ in range(count):
            F = random_functional(rng)
            d = diag_real(F)
            if any(d(n) != F(Oracle1.const(n)) for n in rng_pos):
                bad["diagonal"] += 1
        H = even_row_helper()
        for _ in range(count):
            F, a = random_functional(rng), random_stream(rng)
            evens = Oracle1.native(lambda i, a=a: a(2 * i), "evens")
            ha = star(H, a)
            if any(ha(i) != a(2 * i) for i in rng_pos) or even_rows(F)(a) != F(evens):
                bad["even rows"] += 1
        for _ in range(count):
            n, r = rng.randint(0, 6), random_stream(rng)
            perm = list(range(rng.randint(0, 6)))
            rng.shuffle(perm)
            shifted = star(shift_functional(n), r)
            moved = star(rearrange_functional(perm), r)
            if any(shifted(i) != r(n + i) for i in rng_pos):
                bad["P_n"] += 1
            if any(moved(i) != (r(perm[i]) if i < len(perm) else r(i)) for i in rng_pos):
                bad["R_pi"] += 1
        return not bad, f"5 laws x {count} instances at positions < {POSITIONS}, failures: {_fmt_counts(bad)}"

    return _timed(3, "coding-operator laws", 30, body)


# ---------------------------------------------------------------- 4 game solvers

def _check_shape(shape) -> Counter:
    bad: Counter = Counter()
    tree = tree_from_shape(shape)
    h = bar_recursion(tree)
    table = safety_table(tree)
    winner, strat = synthesize_strategy(tree)
    if winner != ("I" if oracles.shape_mover_wins(shape) else "II"):
        bad["winner"] += 1
    for n, entry in table.items():
        if entry.safe != oracles.shape_safe(shape, n):
            bad["safety"] += 1
        if h[n] != (1 if oracles.shape_mover_wins(oracles.shape_at(shape, n)) else 0):
            bad["bar recursion"] += 1
    if not verify_strategy(tree, strat, winner):
        bad["synthesized strategy loses"] += 1
    if not verify_strategy(tree, strategy_from_labeling(tree, h, winner), winner):
        bad["labeling strategy loses"] += 1
    loser = opponent(winner)
    if verify_strategy(tree, strategy_from_labeling(tree, h, loser), loser):
        bad["both players certified"] += 1
    return bad


def _check_shape_chunk(bounds) -> Counter:
    lo, hi = bounds
    shapes = all_shapes(4, 3)[lo:hi]
    total: Counter = Counter()
    for s in shapes:
        total += _check_shape(s)
    return total


def _check_random_tree(rng: random.Random, max_nodes: int) -> Counter:
    bad: Counter = Counter()
    tree = random_tree(rng, max_nodes)
    nodes = frozenset(tree.nodes())
    wins = oracles.mover_wins_all(nodes)
    h = bar_recursion(tree)
    table = safety_table(tree)
    winner, strat = synthesize_strategy(tree)
    if winner != oracles.minimax_winner(nodes):
        bad["winner"] += 1
    if any(h[n] != int(wins[n]) for n in nodes):
        bad["bar recursion"] += 1
    sample = [()] + rng.sample(sorted(nodes), min(12, len(nodes)))
    if any(table[n].safe != oracles.safe_by_residual(nodes, n) for n in sample):
        bad["safety"] += 1
    if any(table[n].rank.finite_value() != oracles.rank_by_definition(nodes, n) for n in sample[:4]):
        bad["rank"] += 1
    if not verify_strategy(tree, strat, winner):
        bad["synthesized strategy loses"] += 1
    loser = opponent(winner)
    if verify_strategy(tree, strategy_from_labeling(tree, h, loser), loser):
        bad["both players certified"] += 1
    return bad


def criterion_4(seed: int = 4, random_trees: int = 1000, max_nodes: int = 300, jobs: int = 1) -> CriterionResult:
    def body():
        total = len(all_shapes(4, 3))
        step = -(-total // max(1, jobs * 4))
        chunks = [(lo, min(total, lo + step)) for lo in range(0, total, step)]
        bad: Counter = Counter()
        for c in _map(_check_shape_chunk, chunks, jobs):
            bad += c
        rng = random.Random(seed)
        for _ in range(random_trees):
            bad += _check_random_tree(rng, max_nodes)
        return not bad, (f"{total} exhaustive trees + {random_trees} random trees <= {max_nodes} nodes, "
                         f"failures: {_fmt_counts(bad)}")

    return _timed(4, "game-solver oracle equivalence", 300, body)


# ---------------------------------------------------------------- 5 ordinal games

GAME_ALPHAS = ("5", "w", "w*2+3", "w^2")


def criterion_5(horizon: int = 16, branching: int = 4, full_slice: int = 5) -> CriterionResult:
    def body():
        bad: Counter = Counter()
        plays = 0
        for text in GAME_ALPHAS:
            alpha = parse_ordinal(text)
            for name, game in (("G", make_G(alpha, branching=branching)), ("O", make_O(alpha, branching=branching))):
                res = sweep_player_one(game, copy_strategy(alpha), horizon)
                plays += res.plays
                if res.ii_lost:
                    bad[f"{name}_{text}"] += res.ii_lost
        tree = explicit_from_rule(full_slice_G(full_slice))
        winner, _ = synthesize_strategy(tree)
        oracle = oracles.minimax_winner(frozenset(tree.nodes()))
        if winner != "II" or oracle != "II":
            bad[f"I wins G_{full_slice}"] += 1
        return not bad, (f"{plays} plays over 8 sliced games, G_{full_slice} full slice "
                         f"({len(tree.nodes())} nodes) won by {winner}, failures: {_fmt_counts(bad)}")

    return _timed(5, "ordinal games", 120, body)


# ---------------------------------------------------------------- 6 tagged trees

def _retag_chunk(bounds) -> tuple[Counter, list[int]]:
    lo, hi = bounds
    stats: Counter = Counter()
    failing: list[int] = []
    for seed in range(lo, hi):
        inst = generate_instance(seed)
        try:
            retag(inst)
            stats["ok"] += 1
        except InsufficientHeadroom:
            stats["no headroom"] += 1
        except RetagObstruction:
            failing.append(seed)
            try:
                found = retag_exists(inst)
                key = "violated, no valid output exists" if found is None else "violated, output exists"
            except (InsufficientHeadroom, BudgetExceeded):
                key = "violated, existence undecided"
            stats[key] += 1
    return stats, failing


def _alphas():
    return [parse_ordinal(a) for a in DEFAULT_ALPHAS]


def projection_check(rng: random.Random) -> list[str]:
    alpha = rng.choice(_alphas())
    palette = sorted(set(tag_palette(None)) | {alpha})
    p = grow(rng, generate_condition(rng, 1), rng.randint(0, 10), palette)
    q = grow(rng, p, rng.randint(0, 6), palette)
    pp, qp = project(p, alpha), project(q, alpha)
    out = []
    if not (is_condition(pp) and is_condition(qp)):
        out.append("(1) projection is not a condition")
    if not (retag_equiv(pp, p, alpha) and retag_equiv(qp, q, alpha)):
        out.append("(2) projection not equivalent to its input")
    if not extends(qp, pp):
        out.append("(3) projection not monotone")
    return out


def equivalence_check(rng: random.Random) -> tuple[list[str], bool]:
    """Reflexivity, symmetry and transitivity on one triple; also says whether transitivity was exercised."""
    alpha = rng.choice(_alphas())
    palette = sorted(set(tag_palette(None)) | {alpha})
    p = grow(rng, generate_condition(rng, 1), rng.randint(0, 10), palette)
    q = random_retagging(rng, p, alpha, palette)
    s = random_retagging(rng, q, alpha, palette)
    if rng.random() < 0.3:
        # all tags INF: same domain, not equivalent to p once p has a tag below alpha
        s = project(p, ZERO)
    out = []
    for x in (p, q, s):
        if not retag_equiv(x, x, alpha):
            out.append("reflexivity")
    for x, y in ((p, q), (q, s), (p, s)):
        if retag_equiv(x, y, alpha) != retag_equiv(y, x, alpha):
            out.append("symmetry")
    used = False
    for x, y, z in ((p, q, s), (q, s, p), (s, p, q)):
        if retag_equiv(x, y, alpha) and retag_equiv(y, z, alpha):
            used = True
            if not retag_equiv(x, z, alpha):
                out.append("transitivity")
    return out, used


def criterion_6(instances: int = 10_000, pairs: int = 10_000, triples: int = 1000,
                seed: int = 6, jobs: int = 1) -> CriterionResult:
    def body():
        step = -(-instances // max(1, jobs * 4))
        chunks = [(lo, min(instances, lo + step)) for lo in range(0, instances, step)]
        stats: Counter = Counter()
        failing: list[int] = []
        for s, f in _map(_retag_chunk, chunks, jobs):
            stats += s
            failing += f
        rng = random.Random(seed)
        proj: Counter = Counter()
        for _ in range(pairs):
            for v in projection_check(rng):
                proj[v] += 1
        eq: Counter = Counter()
        exercised = 0
        for _ in range(triples):
            v, used = equivalence_check(rng)
            exercised += used
            for x in v:
                eq[x] += 1
        violations = len(failing) + sum(proj.values()) + sum(eq.values())
        detail = (f"retag on {instances} instances: {_fmt_counts(stats)}"
                  f"{' (first failing seeds ' + ' '.join(map(str, failing[:5])) + ')' if failing else ''}; "
                  f"projection on {pairs} pairs: failures {_fmt_counts(proj)}; "
                  f"equivalence on {triples} triples ({exercised} exercising transitivity): failures {_fmt_counts(eq)}")
        return violations == 0, detail

    return _timed(6, "tagged-tree suite", 120, body)


# ---------------------------------------------------------------- 7 round trips

TRANSCRIPT = """game G w*2+3
I w+1
II w+1
I 3
II 3
I 0
II 0
result II (I has no legal move)
"""


def _cli_runs(workdir: Path, seed: int) -> list[str]:
    from .cli import main
    from .games import print_game_file
    from .terms import TermFile, print_term_file

    rng = random.Random(seed)
    tree = random_tree(rng, 40)
    (workdir / "tree.game").write_text(print_game_file(tree))
    terms = [random_closed_term(rng, T2, 25) for _ in range(3)]
    (workdir / "terms.hy").write_text(print_term_file(TermFile(dict(DEFAULT_SIGNATURE), terms)))
    inst = generate_instance(seed)
    for name in ("p", "q", "r"):
        (workdir / f"{name}.cond").write_text(print_condition_file(getattr(inst, name)))
    cond = [f"{workdir}/{n}.cond" for n in ("p", "q", "r")]
    commands = [
        ["normalize", str(workdir / "terms.hy"), "--trace"],
        ["lower", str(workdir / "terms.hy"), "--check", "5"],
        ["solve", str(workdir / "tree.game")],
        ["kb", str(workdir / "tree.game")],
        ["rank", str(workdir / "tree.game")],
        ["check-condition", cond[2]],
        ["project", cond[2], "--alpha", "w^2"],
        ["retag", "--p", cond[0], "--q", cond[1], "--r", cond[2],
         "--alpha", print_ordinal(inst.alpha), "--gamma", print_ordinal(inst.gamma)],
        ["play", "--replay", "-"],
    ]
    outs = []
    for argv in commands:
        buf = io.StringIO()
        with redirect_stdout(buf):
            if argv[0] == "play":
                main(argv + ["--seed", str(seed), "--format", "machine"], stdin=io.StringIO(TRANSCRIPT))
            else:
                main(argv + ["--seed", str(seed), "--format", "machine"])
        outs.append(buf.getvalue())
    return outs


def criterion_7(seed: int = 7, terms: int = 1000, ordinals_n: int = 200, conditions: int = 200) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        bad: Counter = Counter()
        for _ in range(terms):
            t = random_closed_term(rng, rng.choice((T0, T1, T2)), 60)
            text = print_term(t)
            back = parse_term(text, DEFAULT_SIGNATURE)
            if back != t or print_term(back) != text:
                bad["term"] += 1
        for _ in range(ordinals_n):
            a = random_ordinal(rng)
            text = print_ordinal(a)
            if parse_ordinal(text) != a or print_ordinal(parse_ordinal(text)) != text:
                bad["ordinal"] += 1
        alphas = _alphas()
        for _ in range(conditions):
            c = generate_condition(rng, rng.randint(1, 15), rng.choice(alphas + [None]))
            text = print_condition_file(c)
            back = parse_condition_file(text)
            if back != c or print_condition_file(back) != text:
                bad["condition"] += 1
        with tempfile.TemporaryDirectory() as d:
            first = _cli_runs(Path(d), seed)
        with tempfile.TemporaryDirectory() as d:
            second = _cli_runs(Path(d), seed)
        diff = sum(a != b for a, b in zip(first, second))
        if diff:
            bad["cli output differs"] += diff
        return not bad, (f"{terms} terms, {ordinals_n} ordinals, {conditions} condition files, "
                         f"{len(first)} CLI commands run twice, failures: {_fmt_counts(bad)}")

    return _timed(7, "round trip and determinism", 30, body)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7}


def run_all(jobs: int = 1, which=None, report: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for n, fn in CRITERIA.items():
        if which and n not in which:
            continue
        res = fn(jobs=jobs) if n in (4, 6) else fn()
        if report:
            report(res.line())
        out.append(res)
    return out
