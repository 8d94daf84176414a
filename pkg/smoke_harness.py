"""Smoke: referee harness, strategy provers, dishonest probe."""
import math
import random

from bcsgames import barrington, bcs, games, harness, quantum, tableau
from bcsgames.samplers import DECLINED, HonestTableauSampler, TableauSimulator

ms = bcs.magic_square()

# 1. Born prover on the constraint-variable game: perfect play
cv = games.cv_game(ms)
strat = quantum.cv_strategy_from_cc(quantum.magic_square_strategy(), ms)
prover = harness.strategy_sampler(strat)
t = harness.run_protocol(cv, prover, rounds=2000, seed=11, label="ms-cv")
print(f"born prover: value={t.value}, declined={t.declined}")
assert t.value == 1.0

# 2. best classical prover on the constraint-pair game: near 17/18
cc = games.cc_game(ms)
v, fa, fb = games.best_classical_strategies(cc)
det = harness.deterministic_sampler(fa, fb)
t2 = harness.run_protocol(cc, det, rounds=4000, seed=5, label="ms-cc")
sigma = math.sqrt(float(v) * (1 - float(v)) / 4000)
print(f"classical prover: value={t2.value:.4f} vs {float(v):.4f} (3s={3*sigma:.4f})")
assert abs(t2.value - float(v)) <= 3 * sigma

# 3. honest tableau prover wins every round of the tableau cv game
one_var = bcs.Bcs(
    num_vars=1,
    constraints=(bcs.Constraint(scope=(0,), table=frozenset({(+1,)})),),
)
lifted = tableau.obliviate(one_var, 2)
tab = tableau.tableau(lifted, rows=4,
                      programs=[barrington.pair_product_program(parity=+1)],
                      include_trivial_pairs=True)
tcv = games.cv_game(tab.system)
honest = HonestTableauSampler(tab, [+1])
t3 = harness.run_protocol(tcv, honest, rounds=1500, seed=3, label="tab-cv")
print(f"honest tableau prover: value={t3.value}, declined={t3.declined}")
assert t3.value == 1.0 and t3.declined == 0

# simulator on the same game: wins everything it answers, declines the rest
sim = TableauSimulator(tab)
t4 = harness.run_protocol(tcv, sim, rounds=1500, seed=3, label="tab-cv-sim")
print(f"simulator: value={t4.value}, declined={t4.declined} of 1500")
assert t4.value == 1.0

# 4. transcripts: lossless JSON, jobs-independent, rerun-identical
assert harness.Transcript.from_json(t3.to_json()) == t3
t3j = harness.run_protocol(tcv, honest, rounds=1500, seed=3, jobs=4, label="tab-cv")
assert t3j.to_json() == t3.to_json()
t3r = harness.run_protocol(tcv, honest, rounds=1500, seed=3, label="tab-cv")
assert t3r.to_json() == t3.to_json()
print("transcripts: lossless, jobs-independent, reproducible")

# 5. dishonest verifier poses off-support pairs; declines recorded unscored
bad_pairs = [((("con", 0), ("con", 1)),), ]
policy = harness.dishonest_verifier([(("con", 0), ("con", 1))])
t5 = harness.run_protocol(tcv, sim, rounds=200, seed=9, policy=policy, label="adv")
assert t5.declined == 200 and t5.value == 0.0
print("dishonest verifier vs simulator: all declined, none scored as losses")

# 6. probe: small parameters leak, recommended parameters do not
small = tableau.tableau(tableau.obliviate(one_var, 5), rows=4, include_trivial_pairs=True)
hs = HonestTableauSampler(small, [+1])
try:
    harness.dishonest_probe(hs)
    raise AssertionError("strict probe should refuse small parameters")
except harness.ParamsTooSmall as e:
    print("strict probe refused:", e)
rep = harness.dishonest_probe(hs, strict=False)
print(f"(4,5) probe: {rep.pairs_checked} pairs, violations={len(rep.violations)}")
assert not rep.passed
viol = rep.violations[0]
print(f"   leaked subset {viol.subset}, covered vars {viol.covered_vars}, tv={viol.distance}")
assert viol.distance == 0.5 and viol.covered_vars == (0,)

big = tableau.tableau(tableau.obliviate(one_var, 9), rows=8, include_trivial_pairs=True)
hb = HonestTableauSampler(big, [+1])
rep2 = harness.dishonest_probe(hb)
print(f"(8,9) probe: {rep2.pairs_checked} pairs, passed={rep2.passed}")
assert rep2.passed

# simulator passes the probe even at small parameters
rep3 = harness.dishonest_probe(TableauSimulator(small), strict=False)
assert rep3.passed
print("simulator leaks nothing even at (4,5)")
