"""Smoke: raw oracle vs structured honest vs simulator."""
import itertools
import random

from bcsgames import barrington, bcs, samplers, tableau
from bcsgames.samplers import (
    CountDistribution,
    HonestCcSampler,
    HonestTableauSampler,
    TableauSimulator,
    fiber_subset_distribution,
    honest_exact_distribution,
    raw_latent_distribution,
    randomizer_clause_questions,
    sim_tableau_question,
    statistical_distance,
    uniform_distribution,
    uniformity_test,
)

# --- tiny bases ---------------------------------------------------------
# one-variable base: x0 must be +1  (table constraint)
one_var = bcs.Bcs(
    num_vars=1,
    constraints=(bcs.Constraint(scope=(0,), table=frozenset({(+1,)})),),
)
# two-variable base: x0 * x1 == -1
two_var = bcs.Bcs(
    num_vars=2,
    constraints=(
        bcs.Constraint(scope=(0, 1), table=frozenset({(+1, -1), (-1, +1)})),
    ),
)

def all_questions(tab, max_scope=30):
    qs = []
    for ci, c in enumerate(tab.system.constraints):
        if len(c.scope) <= max_scope:
            qs.append(("con", ci))
    for v in range(tab.system.num_vars):
        qs.append(("var", v))
    return qs

def raw_feasible(tab, witness, q):
    try:
        return raw_latent_distribution(tab, witness, q)
    except samplers.TooLarge:
        return None

checked = skipped = 0
for base, witness, k in (
    (one_var, [+1], 1),
    (one_var, [+1], 2),
    (two_var, [+1, -1], 1),
    (two_var, [+1, -1], 2),
):
    system = tableau.obliviate(base, k) if k > 1 else base
    tab = tableau.tableau(system, rows=4)
    ds = sorted({len(p) for p in tab.programs})
    for q in all_questions(tab):
        raw = raw_feasible(tab, witness, q)
        if raw is None:
            skipped += 1
            continue
        structured = honest_exact_distribution(tab, witness, q)
        tv = statistical_distance(raw, structured)
        assert tv == 0.0, (k, ds, q, tv)
        checked += 1
    # copy subsets below full cover
    copies = [v for v in range(tab.system.num_vars) if tab.variable_kind(v)[0] == "copy"]
    for size in (1, 2):
        for ids in itertools.combinations(copies, size):
            raw = raw_feasible(tab, witness, ("subset", ids))
            st = honest_exact_distribution(tab, witness, ("subset", ids))
            assert raw is not None
            assert statistical_distance(raw, st) == 0.0, ("subset", ids)
            checked += 1
print(f"raw-vs-structured: {checked} questions exact, {skipped} skipped as too large, degrees seen ok")

# --- crafted d=3 instance: honest vs simulator --------------------------
lifted = tableau.obliviate(one_var, 2)
crafted = [barrington.pair_product_program(parity=+1)]
tab3 = tableau.tableau(lifted, rows=4, programs=crafted, include_trivial_pairs=True)
honest = HonestTableauSampler(tab3, [+1])
sim = TableauSimulator(tab3)

rq = randomizer_clause_questions(tab3)
print(f"d=3 crafted: {len(tab3.system.constraints)} clauses, randomizer-bearing: {len(rq)}")
for q in rq:
    tv = statistical_distance(honest.question_distribution(q), sim.question_distribution(q))
    assert tv == 0.0, (q, tv)
# sub-degree subsets (k=2 -> singletons)
copies = [v for v in range(tab3.system.num_vars) if tab3.variable_kind(v)[0] == "copy"]
for v in copies:
    tv = statistical_distance(honest.subset_distribution((v,)), sim.subset_distribution((v,)))
    assert tv == 0.0, v
    rep = uniformity_test(honest, (v,))
    assert rep.applicable and rep.passed, rep
print("honest == sim on all randomizer clauses and sub-degree subsets")

# full-cover subset flagged inapplicable
rep = uniformity_test(honest, (0, 1))
assert not rep.applicable and rep.passed is None
print("full-cover subset reported inapplicable:", rep.note)

# variable-question marginals match across rules too
for v in range(tab3.system.num_vars):
    kind = tab3.variable_kind(v)
    hd = honest.question_distribution(("var", v))
    sd = sim.question_distribution(("var", v))
    if kind[0] == "rand" or (kind[0] == "cell" and kind[2] >= 2):
        assert statistical_distance(hd, sd) == 0.0, (v, kind)
print("randomizer/deep-cell variable marginals identical")

# honest sampler: every sampled clause answer satisfies the clause
rng = random.Random(7)
ok = 0
for ci, c in enumerate(tab3.system.constraints):
    q = ("con", ci)
    for _ in range(60):
        a, b = honest.sample((q, q), rng)
        assert a == b
        assert c.check(list(a)), (ci, a)
        ok += 1
print(f"honest samples satisfy their clauses ({ok} draws)")

# simulator support-pair behaviour
for ci, c in enumerate(tab3.system.constraints):
    v = c.scope[0]
    a, b = sim.sample((("con", ci), ("var", v)), rng)
    assert a[0] == b
d = sim.exact_distribution((("con", 0), ("var", tab3.system.constraints[0].scope[2])))
assert abs(sum(float(w) for w in d.values()) - 1.0) < 1e-12
assert sim.sample((("con", 0), ("con", 1)), rng) == (samplers.DECLINED, samplers.DECLINED)
print("simulator projects support pairs, declines cross-clause pairs")

# honest exact pair distribution vs simulator on support pairs
pairs = []
for ci, c in enumerate(tab3.system.constraints):
    pairs.append((("con", ci), ("con", ci)))
    for v in c.scope:
        pairs.append((("con", ci), ("var", v)))
mismatch = []
for pair in pairs:
    try:
        hd = honest.exact_distribution(pair)
    except samplers.TooLarge:
        continue
    sd = sim.exact_distribution(pair)
    tv = statistical_distance(hd, sd)
    tag = tab3.clause_tags[pair[0][1]]
    if tv != 0.0:
        mismatch.append((tag, pair[1], tv))
print(f"support pairs: {len(pairs)} compared, mismatching (expected only pin/pair/prod-adjacent): {len(mismatch)}")
for m in mismatch[:8]:
    print("   ", m)

# HonestCcSampler answers deterministically and wins
ms = bcs.magic_square()
wit_free = None
cc = HonestCcSampler(two_var, [+1, -1])
a, b = cc.sample((("con", 0), ("con", 0)), rng)
assert a == b == (+1, -1)
ex = cc.exact_distribution((("con", 0), ("con", 0)))
assert list(ex.values()) == [1]
print("HonestCcSampler deterministic point mass ok")

# chi-square sampling mode sanity
rep = uniformity_test(honest, (0,), exact=False, rounds=4000, rng=random.Random(3))
assert rep.mode == "sampling" and rep.applicable and rep.passed, rep
print("sampling-mode uniformity test passes on an honest coin:", round(rep.statistic, 3))
