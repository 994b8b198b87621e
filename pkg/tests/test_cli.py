import io
import shutil
import subprocess
import sys

import pytest

from hytw.cli import main


def run(capsys, *argv, stdin=""):
    code = main(list(argv), io.StringIO(stdin))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_seed_is_echoed_first(capsys):
    code, out, _ = run(capsys, "parse", "-", "--seed", "42", stdin="(+ 1 2)\n")
    assert code == 0
    assert out.splitlines()[0] == "seed: 42"


def test_normalize_with_trace(capsys, tmp_path):
    f = write(tmp_path, "t.txt", "((lam (x 0) (* x x)) 4)\n")
    code, out, _ = run(capsys, "normalize", f, "--trace")
    assert code == 0
    assert "term 0: 16" in out and "step 1 at root: (* 4 4)" in out


def test_eval_machine_format(capsys):
    code, out, _ = run(capsys, "eval", "-", "--format", "machine", stdin="(+ 2 3)\n")
    assert code == 0 and out.splitlines() == ["seed=0", "term 0=5"]


def test_eval_with_env_file(capsys, tmp_path):
    terms = write(tmp_path, "t.txt", "param r (-> 0 0)\n(r 2)\n")
    env = write(tmp_path, "e.txt", "r = prefix 3 1 4\n")
    code, out, _ = run(capsys, "eval", terms, "--env", env)
    assert code == 0 and "term 0: 4" in out


def test_type_error_exits_one(capsys):
    code, _, err = run(capsys, "typecheck", "-", stdin="(3 4)\n")
    assert code == 1 and err.startswith("error: TypeMismatch")


def test_lower_check(capsys):
    code, out, _ = run(capsys, "lower", "-", "--check", "5", stdin="(lam (x 0) (+ x 1))\n")
    assert code == 0
    assert "def _main" in out


def test_leaf_only_game(capsys, tmp_path):
    f = write(tmp_path, "g.txt", "()\n")
    code, out, _ = run(capsys, "solve", f)
    assert code == 0 and "winner: II" in out and "rank: 0" in out


def test_solve_rule_game(capsys):
    code, out, _ = run(capsys, "solve", "G", "--alpha", "3", "--format", "machine")
    assert code == 0 and "winner=II" in out


def test_rank_and_kb(capsys, tmp_path):
    f = write(tmp_path, "g.txt", "0\n1 0\n")
    code, out, _ = run(capsys, "rank", f, "--node", "1")
    assert code == 0 and "rank: 1" in out
    code, out, _ = run(capsys, "kb", "--game", f, "--format", "machine")
    assert code == 0


def test_condition_commands(capsys, tmp_path):
    good = write(tmp_path, "c.txt", "() inf inf\n0 5 inf\n0 0 5 w^2\n")
    code, out, _ = run(capsys, "check-condition", good)
    assert code == 0
    code, out, _ = run(capsys, "project", good, "--alpha", "3")
    assert code == 0 and "0 0 inf inf" in out
    bad = write(tmp_path, "b.txt", "() inf inf\n0 0 5 w\n")
    code, _, err = run(capsys, "check-condition", bad)
    assert code == 1


def test_retag_without_headroom_exits_one(capsys, tmp_path):
    c = write(tmp_path, "p.txt", "() inf inf\n0 5 inf\n")
    r = write(tmp_path, "r.txt", "() inf inf\n0 5 inf\n0 0 5 w^2\n")
    code, out, err = run(capsys, "retag", "--p", c, "--q", c, "--r", r, "--alpha", "7", "--gamma", "6")
    assert code == 1 and "InsufficientHeadroom" in err


def test_retag_success(capsys, tmp_path):
    c = write(tmp_path, "p.txt", "() inf inf\n0 5 inf\n")
    r = write(tmp_path, "r.txt", "() inf inf\n0 5 inf\n0 0 5 w^2+4\n")
    code, out, _ = run(capsys, "retag", "--p", c, "--q", c, "--r", r, "--alpha", "w^2", "--gamma", "3")
    assert code == 0 and "gamma_tilde: 6" in out and "0 0 5 6" in out


def test_play_g3_engine_wins(capsys):
    code, out, _ = run(capsys, "play", "--game", "G", "--alpha", "3", stdin="2\n1\n0\n")
    assert code == 0
    assert out.splitlines()[-1] == "result II (I has no legal move)"


def test_illegal_move_reprompts_when_interactive(capsys):
    code, out, _ = run(capsys, "play", "--game", "G", "--alpha", "3", "--interactive", stdin="5\n2\n1\n0\n")
    assert code == 0 and "IllegalMove" in out


def test_illegal_move_fails_in_batch(capsys):
    code, _, err = run(capsys, "play", "--game", "G", "--alpha", "3", stdin="5\n")
    assert code == 1 and "IllegalMove" in err


def test_transcript_replays_verbatim(capsys, tmp_path):
    tr = tmp_path / "tr.txt"
    code, _, _ = run(capsys, "play", "--game", "G", "--alpha", "w*2+3", "--transcript", str(tr),
                     stdin="w+1\n3\n0\n")
    assert code == 0
    code, out, _ = run(capsys, "play", "--replay", str(tr))
    assert code == 0
    tr.write_text(tr.read_text().replace("II 3", "II 2"))
    code, _, err = run(capsys, "play", "--replay", str(tr))
    assert code == 1 and "ReplayMismatch: line" in err


def test_missing_file_exits_two(capsys, tmp_path):
    code, _, err = run(capsys, "parse", str(tmp_path / "nope.txt"))
    assert code == 2 and "cannot read" in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["parse"], ["solve", "a", "--game", "b"],
                                  ["generate", "terms", "--seed", "-1"]])
def test_usage_errors_exit_two(argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_help_names_format_and_module(capsys):
    with pytest.raises(SystemExit):
        main(["retag", "--help"])
    out = capsys.readouterr().out
    assert "Input:" in out and "Module: hytw.tagged_trees." in out


def test_machine_output_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "generate", "instance", "--seed", "9", "--format", "machine")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]


@pytest.mark.skipif(shutil.which("hytw") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["hytw", "eval", "-"], input="(* 6 7)\n", capture_output=True, text=True)
    assert proc.returncode == 0 and "term 0: 42" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "hytw", "eval", "-"], input="(* 6 7)\n",
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "term 0: 42" in proc.stdout
