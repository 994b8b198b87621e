"""Command line interface: ``hytw SUBCOMMAND ...``.

Every subcommand echoes ``--seed`` first and prints either aligned
``key: value`` lines (``--format human``) or ``key=value`` lines
(``--format machine``).  Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .errors import BudgetExceeded, HytwError, IllegalMove, InsufficientHeadroom, RetagObstruction, SyntaxError_

TERM_FORMAT = ("Input: a term file of S-expressions, one term per form, with optional "
               "'param NAME TYPE' and 'def NAME TERM' header lines.")
GAME_FORMAT = ("Input: a game file listing one node per line as space-separated naturals "
               "('()' is the root); missing prefixes are added.")
COND_FORMAT = ("Input: a condition file with one node per line: PATH TAG0 TAG1, PATH being "
               "naturals or '()', tags ordinals in Cantor normal form (w, w^2*3+1, ...) or 'inf'.")


class DomainFailure(HytwError):
    """A check requested on the command line came out negative."""


class ReplayMismatch(HytwError):
    pass


class Output:
    def __init__(self, fmt: str, stream: TextIO):
        self.machine = fmt == "machine"
        self.stream = stream

    def kv(self, key: str, value) -> None:
        value = str(value)
        if self.machine:
            self.stream.write(f"{key}={value}\n")
        else:
            self.stream.write(f"{key}: {value}\n")

    def block(self, key: str, text: str) -> None:
        """A multi-line value: machine format prefixes each line with the key."""
        lines = text.rstrip("\n").split("\n") if text.strip() else []
        if self.machine:
            for line in lines:
                self.stream.write(f"{key}={line}\n")
        else:
            self.stream.write(f"{key}:\n")
            for line in lines:
                self.stream.write(f"  {line}\n")


def _read(path: str, stdin: TextIO) -> str:
    if path == "-":
        return stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise FileNotFoundError(f"cannot read {path}: {e.strerror}") from None


def _node(text: str):
    text = text.strip()
    if text in ("", "()"):
        return ()
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise SyntaxError_(f"bad node {text!r}") from None


def _fmt_node(n) -> str:
    from .games import print_move
    return " ".join(print_move(m) for m in n) if n else "()"


# ---------------------------------------------------------------- term commands

def _load_terms(args, stdin):
    from .terms import parse_term_file
    return parse_term_file(_read(args.file, stdin))


def cmd_parse(args, out, stdin):
    from .terms import print_term_file
    out.block("file", print_term_file(_load_terms(args, stdin)))


def cmd_typecheck(args, out, stdin):
    from .terms import type_of
    tf = _load_terms(args, stdin)
    scope = tf.scope()
    for name, t in tf.defs.items():
        out.kv(f"def {name}", type_of(t, scope))
    for i, t in enumerate(tf.terms):
        out.kv(f"term {i}", type_of(t, scope))


def cmd_normalize(args, out, stdin):
    from .normalizer import normalize
    from .terms import print_term
    tf = _load_terms(args, stdin)
    out.kv("strategy", args.strategy)
    for i, t in enumerate(tf.terms):
        nf, trace = normalize(t, args.strategy, record_terms=args.trace)
        out.kv(f"term {i}", print_term(nf))
        out.kv(f"steps {i}", trace.count)
        if args.trace:
            out.block(f"trace {i}", "\n".join(trace.lines()))


def _show_value(out, key, value, positions):
    from .semantics import Oracle1
    if isinstance(value, int):
        out.kv(key, value)
    elif isinstance(value, Oracle1):
        out.kv(key, " ".join(str(value(i)) for i in range(positions)))
    else:
        vals = " ".join(str(value(Oracle1.const(k))) for k in range(positions))
        out.kv(f"{key} on const 0..{positions - 1}", vals)


def _env_for(tf, env_text):
    from .semantics import eval_term, parse_env_file
    env = parse_env_file(env_text, tf.signature) if env_text is not None else {}
    missing = [n for n in tf.signature if n not in env]
    if missing:
        from .errors import UnboundParameter
        raise UnboundParameter(f"no binding for {', '.join(missing)}")
    for name, t in tf.defs.items():
        env[name] = eval_term(t, env)
    return env


def cmd_eval(args, out, stdin):
    from .semantics import eval_term
    tf = _load_terms(args, stdin)
    env = _env_for(tf, _read(args.env, stdin) if args.env else None)
    for i, t in enumerate(tf.terms):
        _show_value(out, f"term {i}", eval_term(t, env), args.positions)


def cmd_lower(args, out, stdin):
    from .gen import random_functional, random_stream
    from .lowering import lower_term
    from .semantics import Oracle1, eval_term
    from .terms import T0, T1, T2
    tf = _load_terms(args, stdin)
    rng = random.Random(args.seed)
    failed = 0
    for i, t in enumerate(tf.terms):
        low = lower_term(_inline_defs(t, tf))
        out.block(f"lowered {i}", low.text())
        viol = low.code.purity_violations()
        out.kv(f"purity {i}", "ok" if not viol else "; ".join(viol))
        failed += bool(viol)
        if not args.check:
            continue
        agree = 0
        for _ in range(args.check):
            env = {}
            for name, ty in tf.signature.items():
                env[name] = (rng.randint(0, 9) if ty == T0 else random_stream(rng) if ty == T1
                             else random_functional(rng) if ty == T2 else None)
            direct, lowered = eval_term(t, _with_defs(env, tf)), low.value(env)
            if isinstance(direct, int):
                ok = direct == lowered
            elif isinstance(direct, Oracle1):
                ok = all(direct(k) == lowered(k) for k in range(20))
            else:
                fs = [random_stream(rng) for _ in range(20)]
                ok = all(direct(f) == lowered(f) for f in fs)
            agree += ok
        out.kv(f"check {i}", f"{agree}/{args.check} agree")
        failed += agree != args.check
    if failed:
        raise DomainFailure(f"{failed} term(s) failed the lowering checks")


def _with_defs(env, tf):
    from .semantics import eval_term
    env = dict(env)
    for name, t in tf.defs.items():
        env[name] = eval_term(t, env)
    return env


def _inline_defs(t, tf):
    """Replace references to definitions by their bodies, latest first."""
    from .terms import Param, children, rebuild

    def go(s):
        if isinstance(s, Param) and s.name in tf.defs:
            return go(tf.defs[s.name])
        kids = children(s)
        return rebuild(s, [go(c) for c in kids]) if kids else s

    return go(t)


# ---------------------------------------------------------------- game commands

def _probes(text):
    from .games import parse_probes
    return parse_probes(text) if text else None


def _load_game(args, stdin):
    from .games import explicit_from_rule, make_G, make_O, parse_game_file
    from .ordinals import parse_ordinal
    if args.file in ("G", "O"):
        if args.alpha is None:
            raise SyntaxError_("rule games need --alpha")
        alpha = parse_ordinal(args.alpha)
        game = (make_G if args.file == "G" else make_O)(alpha, _probes(args.probes), args.branching)
        return explicit_from_rule(game, budget=args.budget)
    return parse_game_file(_read(args.file, stdin))


def cmd_solve(args, out, stdin):
    from .games import rank, safety_table, synthesize_strategy
    tree = _load_game(args, stdin)
    winner, strat = synthesize_strategy(tree, args.budget)
    out.kv("nodes", len(tree.nodes()))
    out.kv("winner", winner)
    out.kv("rank", rank(tree, (), args.budget))
    out.block("strategy", "\n".join(f"{_fmt_node(n)} -> {m}" for n, m in
                                    sorted(strat.table.items(), key=lambda kv: (len(kv[0]), kv[0]))))
    if args.table:
        table = safety_table(tree, args.budget)
        out.block("table", "\n".join(f"{_fmt_node(n)} rank {e.rank} safe {e.safe}" for n, e in table.items()))


def cmd_rank(args, out, stdin):
    from .games import rank
    tree = _load_game(args, stdin)
    node = _node(args.node)
    if not tree.contains(node):
        raise IllegalMove(f"{_fmt_node(node)} is not a node of the tree")
    out.kv("node", _fmt_node(node))
    out.kv("rank", rank(tree, node, args.budget))


def cmd_kb(args, out, stdin):
    from .games import kleene_brouwer
    tree = _load_game(args, stdin)
    out.block("order", "\n".join(_fmt_node(n) for n in kleene_brouwer(tree)))


# ---------------------------------------------------------------- tagged trees

def _load_condition(path, stdin):
    from .tagged_trees import parse_condition_file
    return parse_condition_file(_read(path, stdin))


def cmd_check_condition(args, out, stdin):
    from .tagged_trees import condition_violations
    c = _load_condition(args.file, stdin)
    viol = condition_violations(c)
    out.kv("nodes", len(c))
    out.kv("valid", "yes" if not viol else "no")
    if viol:
        out.block("violations", "\n".join(viol))
        raise DomainFailure(f"{len(viol)} violation(s)")


def cmd_project(args, out, stdin):
    from .ordinals import parse_ordinal
    from .tagged_trees import print_condition_file, project
    c = _load_condition(args.file, stdin)
    out.block("condition", print_condition_file(project(c, parse_ordinal(args.alpha))))


def cmd_retag(args, out, stdin):
    from .ordinals import parse_ordinal
    from .tagged_trees import RetagInstance, print_condition_file, retag, retag_exists
    inst = RetagInstance(_load_condition(args.p, stdin), _load_condition(args.q, stdin),
                         _load_condition(args.r, stdin), parse_ordinal(args.alpha), parse_ordinal(args.gamma))
    inst.validate()
    out.kv("gamma_tilde", inst.gamma_tilde)
    try:
        r_hat = retag(inst, repairs=not args.literal)
    except RetagObstruction as e:
        out.block("violations", "\n".join(e.violations))
        try:
            exists = retag_exists(inst) is not None
        except (InsufficientHeadroom, BudgetExceeded):
            exists = None
        out.kv("any valid output", {True: "yes", False: "no", None: "unknown"}[exists])
        raise
    out.block("condition", print_condition_file(r_hat))


# ---------------------------------------------------------------- play

class Match:
    """A game between a human (reading moves as text) and an engine strategy."""

    def __init__(self, source: str, alpha: str | None, human: str, branching: int,
                 probes: str | None = None, horizon: int = 200):
        from .games import I, II, copy_strategy, make_G, make_O, parse_game_file, synthesize_strategy
        from .ordinals import parse_ordinal
        self.human = human
        self.horizon = horizon
        if source in ("G", "O"):
            if alpha is None:
                raise SyntaxError_("rule games need an alpha")
            if human != I:
                raise SyntaxError_("in rule games the human plays I against the copy strategy")
            a = parse_ordinal(alpha)
            self.game = (make_G if source == "G" else make_O)(a, _probes(probes), branching)
            self.engine = copy_strategy(a)
            self.header = f"game {source} {alpha}"
            self.rule = True
        else:
            self.game = parse_game_file(Path(source).read_text())
            winner, strat = synthesize_strategy(self.game)
            self.engine = strat if winner != human else None
            self.header = f"game {source}"
            self.rule = False
        self.players = (I, II)

    def parse_move(self, text: str):
        from .games import Restart
        from .ordinals import parse_ordinal
        text = text.strip()
        if not self.rule:
            try:
                return int(text)
            except ValueError:
                raise SyntaxError_(f"expected a natural, got {text!r}") from None
        if text.startswith("restart"):
            return Restart(parse_ordinal(text[len("restart"):].strip()))
        return parse_ordinal(text)

    def engine_move(self, node):
        if self.engine is not None:
            m = self.engine(node)
            if self.game.contains(node + (m,)):
                return m
        options = self.game.moves(node)
        return options[0] if options else None

    def run(self, moves_in, say, prompt=None) -> list[str]:
        """Play to the end; ``moves_in`` yields the human's move texts.  Returns the transcript."""
        from .games import mover, opponent, print_move
        node: tuple = ()
        lines = [self.header]
        while True:
            if len(node) >= self.horizon:
                result = "result ClosedWinsSoFar(horizon-limited)"
                break
            who = mover(node)
            legal = self.game.moves(node)
            if who == self.human:
                if not legal:
                    result = f"result {opponent(who)} ({who} has no legal move)"
                    break
                while True:
                    if prompt:
                        desc = (self.game.legal_moves_description(node) if self.rule
                                else " ".join(map(str, legal)))
                        prompt(f"position {_fmt_node(node)}; legal: {desc}")
                    text = next(moves_in, None)
                    if text is None:
                        result = f"result {opponent(who)} ({who} resigned)"
                        break
                    try:
                        m = self.parse_move(text)
                        if not self.game.contains(node + (m,)):
                            raise IllegalMove(f"{text.strip()} is not legal here")
                        break
                    except HytwError as e:
                        if prompt is None:
                            raise
                        say(f"{e.name}: {e}")
                if text is None:
                    break
            else:
                m = self.engine_move(node)
                if m is None:
                    result = f"result {opponent(who)} ({who} has no legal move)"
                    break
            line = f"{who} {print_move(m)}"
            lines.append(line)
            say(line)
            node = node + (m,)
        lines.append(result)
        say(result)
        return lines


def cmd_play(args, out, stdin):
    from .games import I
    if args.replay:
        text = _read(args.replay, stdin)
        rows = [l.strip() for l in text.splitlines() if l.strip()]
        if not rows or not rows[0].startswith("game "):
            raise SyntaxError_("a transcript starts with 'game NAME [ALPHA]'")
        head = rows[0].split()
        human = args.human
        match = Match(head[1], head[2] if len(head) > 2 else None, human, args.branching,
                      args.probes, args.horizon)
        human_moves = iter([r.split(None, 1)[1] for r in rows[1:]
                            if r.split()[0] == human and len(r.split()) > 1])
        lines = match.run(human_moves, lambda s: None)
        out.block("transcript", "\n".join(lines))
        if lines != rows:
            k = next((i for i, (a, b) in enumerate(zip(lines, rows)) if a != b), min(len(lines), len(rows)))
            saved = rows[k] if k < len(rows) else "<end>"
            now = lines[k] if k < len(lines) else "<end>"
            raise ReplayMismatch(f"line {k + 1}: saved {saved!r}, replay gives {now!r}")
        return
    if args.file is None:
        raise SyntaxError_("play needs --game (G, O or a game file) or --replay")
    match = Match(args.file, args.alpha, args.human, args.branching, args.probes, args.horizon)

    def moves():
        for line in stdin:
            yield line

    say = (lambda s: out.kv("move", s)) if out.machine else (lambda s: print(s, file=out.stream))
    prompt = None if out.machine else (lambda s: print(s, file=out.stream))
    lines = match.run(moves(), say, prompt if args.interactive else None)
    if args.transcript:
        Path(args.transcript).write_text("\n".join(lines) + "\n")
        out.kv("transcript", args.transcript)


# ---------------------------------------------------------------- generate and selftest

def cmd_generate(args, out, stdin):
    from .games import print_game_file, random_tree
    from .gen import DEFAULT_SIGNATURE, random_closed_term
    from .ordinals import parse_ordinal
    from .tagged_trees import generate_condition, generate_instance, print_condition_file
    from .terms import TermFile, parse_type, print_term_file
    rng = random.Random(args.seed)
    if args.kind == "terms":
        ty = parse_type(args.type)
        terms = [random_closed_term(rng, ty, args.size) for _ in range(args.count)]
        out.block("file", print_term_file(TermFile(dict(DEFAULT_SIGNATURE), terms)))
    elif args.kind == "tree":
        out.block("file", print_game_file(random_tree(rng, args.size)))
    elif args.kind == "condition":
        out.block("file", print_condition_file(generate_condition(rng, args.size)))
    else:
        inst = generate_instance(args.seed)
        out.kv("alpha", inst.alpha)
        out.kv("gamma", inst.gamma)
        for name in ("p", "q", "r"):
            out.block(name, print_condition_file(getattr(inst, name)))


def cmd_selftest(args, out, stdin):
    from .acceptance import run_all
    which = {int(c) for c in args.criteria.split(",")} if args.criteria else None
    results = run_all(jobs=args.jobs, which=which, report=lambda line: out.stream.write(line + "\n"))
    failed = [r.number for r in results if not r.passed]
    out.kv("passed", f"{len(results) - len(failed)}/{len(results)}")
    if failed:
        raise DomainFailure(f"criteria failing: {' '.join(map(str, failed))}")


# ---------------------------------------------------------------- parser

def bounded(lo: int, hi: int):
    """argparse type for an int in [lo, hi]."""
    def conv(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if not lo <= v <= hi:
            raise argparse.ArgumentTypeError(f"{v} is outside [{lo}, {hi}]")
        return v
    return conv


def _input(p: argparse.ArgumentParser, flag: str, help_: str = "input file, '-' for stdin") -> None:
    """The input file, positional or through ``flag``."""
    p.add_argument("file", nargs="?", help=help_)
    p.add_argument(flag, dest="file_opt", metavar="FILE", help=f"same as the positional {help_}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=bounded(0, 2**63 - 1), default=0, help="random seed (echoed first; default 0)")
    p.add_argument("--format", choices=("human", "machine"), default="human",
                   help="human: 'key: value' lines; machine: stable 'key=value' lines")


def _rule_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", help="ordinal for the rule games G and O, e.g. w*2+3")
    p.add_argument("--probes", help="comma-separated ordinals offered as moves, e.g. 0,1,w,w+1")
    p.add_argument("--branching", type=bounded(1, 64), default=4, help="moves listed per node in rule games")


def _game_args(p: argparse.ArgumentParser) -> None:
    _input(p, "--game", "game file, '-' for stdin, or G for the ordinal game G_alpha")
    _rule_args(p)
    p.add_argument("--budget", type=bounded(1, 10**8), default=10**6, help="node budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hytw", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_, fmt, module):
        p = sub.add_parser(name, help=help_, description=f"{help_}\n\n{fmt}\nModule: hytw.{module}.",
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(fn=fn)
        _common(p)
        return p

    p = add("parse", cmd_parse, "Parse a term file and print it back canonically.", TERM_FORMAT, "terms")
    _input(p, "--in")
    p = add("typecheck", cmd_typecheck, "Print the type of every definition and term.", TERM_FORMAT, "terms")
    _input(p, "--in")
    p = add("normalize", cmd_normalize, "Reduce every term to beta normal form.", TERM_FORMAT, "normalizer")
    _input(p, "--in")
    p.add_argument("--strategy", choices=("leftmost-outermost", "rightmost-innermost"),
                   default="leftmost-outermost")
    p.add_argument("--trace", action="store_true", help="print each contracted redex position and result")
    p = add("eval", cmd_eval, "Evaluate every term in the model of continuous functionals.",
            TERM_FORMAT + " Environment file: one 'NAME = VALUE' per line, VALUE a natural, "
            "'prefix 3 1 4 default 0', 'const N' or a closed term.", "semantics")
    _input(p, "--in")
    p.add_argument("--env", help="environment file binding the declared parameters")
    p.add_argument("--positions", type=bounded(0, 10**6), default=20, help="stream positions to print (default 20)")
    p = add("lower", cmd_lower, "Compile each closed term of type <= 2 into a type 2 code.",
            TERM_FORMAT, "lowering")
    _input(p, "--in")
    p.add_argument("--check", type=bounded(0, 10**6), default=0, metavar="N",
                   help="compare the code with the term on N random environments")
    p = add("solve", cmd_solve, "Solve a clopen game: winner, root rank and a winning strategy.",
            GAME_FORMAT, "games")
    _game_args(p)
    p.add_argument("--table", action="store_true", help="also print the rank and safety table")
    p = add("rank", cmd_rank, "Rank of a node in a well-founded game tree.", GAME_FORMAT, "games")
    _game_args(p)
    p.add_argument("--node", default="()", help="node as space-separated naturals (default root)")
    p = add("kb", cmd_kb, "List the nodes in Kleene-Brouwer order.", GAME_FORMAT, "games")
    _game_args(p)
    p = add("check-condition", cmd_check_condition, "Check the root, alternation and descent rules.",
            COND_FORMAT, "tagged_trees")
    _input(p, "--in")
    p = add("project", cmd_project, "Replace every tag at or above alpha by inf.", COND_FORMAT, "tagged_trees")
    _input(p, "--in")
    p.add_argument("--alpha", required=True)
    p = add("retag", cmd_retag, "Build the retagged condition for an instance (p, q, r, alpha, gamma).",
            COND_FORMAT, "tagged_trees")
    for name in ("p", "q", "r"):
        p.add_argument(f"--{name}", required=True, help=f"condition file for {name}")
    p.add_argument("--alpha", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--literal", action="store_true", help="use the construction without the four repairs")
    p = add("play", cmd_play, "Play a game against the engine, or replay a transcript.",
            GAME_FORMAT + " Rule games: --game G or O with --alpha; moves are ordinals or "
            "'restart B'. Transcript: a 'game NAME [ALPHA]' line, then 'PLAYER MOVE' lines, then a result.",
            "games")
    p.add_argument("--game", dest="file", help="G, O or a game file")
    _rule_args(p)
    p.add_argument("--as", dest="human", choices=("I", "II"), default="I", help="the human's side")
    p.add_argument("--horizon", type=bounded(1, 10**6), default=200,
                   help="stop after this many moves (Closed wins so far)")
    p.add_argument("--interactive", action="store_true", help="prompt with the legal moves")
    p.add_argument("--transcript", help="write the transcript to this file")
    p.add_argument("--replay", metavar="TRANSCRIPT", help="re-run a saved transcript ('-' for stdin)")
    p = add("generate", cmd_generate, "Write random inputs: terms, tree, condition or instance.",
            "Output: files in the formats read by the other subcommands.", "gen")
    p.add_argument("kind", choices=("terms", "tree", "condition", "instance"))
    p.add_argument("--type", default="2", help="term type, e.g. 2 or (-> 0 0)")
    p.add_argument("--size", type=bounded(1, 10**5), default=20)
    p.add_argument("--count", type=bounded(0, 10**5), default=3)
    p = add("selftest", cmd_selftest, "Run the acceptance criteria and print one line per criterion.",
            "Input: none.", "acceptance")
    p.add_argument("--jobs", type=bounded(1, 256), default=1, help="worker processes for the large sweeps")
    p.add_argument("--criteria", help="comma-separated subset, e.g. 1,4")
    return parser


def main(argv: Sequence[str] | None = None, stdin: TextIO | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "file_opt"):
        if args.file and args.file_opt:
            parser.error("give the input once, positionally or by flag")
        args.file = args.file or args.file_opt
        if args.file is None:
            parser.error(f"{args.command} needs an input file")
    stdin = stdin if stdin is not None else sys.stdin
    out = Output(args.format, sys.stdout)
    out.kv("seed", args.seed)
    try:
        args.fn(args, out, stdin)
    except HytwError as e:
        print(f"error: {e.name}: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


def run() -> None:
    sys.exit(main())
