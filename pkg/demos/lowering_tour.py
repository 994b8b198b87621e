"""Normalize a term, lower it to a type 2 code and check both agree on a few oracles."""

import random

from hytw.gen import random_stream
from hytw.lowering import lower_term
from hytw.normalizer import normalize
from hytw.semantics import Functional2, eval_term
from hytw.terms import T2, parse_term, print_term

SIG = {"G": T2}
t = parse_term("((lam (f (-> (-> 0 0) 0)) (lam (y (-> 0 0)) (+ (f y) (G (star f y))))) (lam (s (-> 0 0)) (s 3)))", SIG)
n, trace = normalize(t)
print("term:   ", print_term(t))
print("normal: ", print_term(n), f"({trace.count} steps)")
low = lower_term(t)
print(low.text(SIG))
env = {"G": Functional2.native(lambda s: s(0) * s(1), "G")}
rng = random.Random(0)
src, code = eval_term(t, env), low.value(env)
for _ in range(3):
    f = random_stream(rng)
    print(f"f = {f.take(6)}...: source {src(f)}, lowered {code(f)}")
