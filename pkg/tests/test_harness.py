"""Referee harness: transcripts, strategy provers, and the dishonest probe."""

import math
import random

import pytest

from bcsgames import barrington, bcs, tableau
from bcsgames.errors import ParamsTooSmall, UnsupportedQuestion
from bcsgames.games import best_classical_strategies, cc_game, cv_game
from bcsgames.harness import (
    Transcript,
    VerifierPolicy,
    deterministic_sampler,
    dishonest_probe,
    dishonest_verifier,
    honest_verifier,
    run_protocol,
    strategy_sampler,
)
from bcsgames.quantum import cv_strategy_from_cc, magic_square_strategy
from bcsgames.samplers import (
    DECLINED,
    HonestCcSampler,
    HonestTableauSampler,
    TableauSimulator,
)

TWO_VAR = bcs.Bcs(
    num_vars=2,
    constraints=(
        bcs.Constraint(scope=(0, 1), table=frozenset({(+1, -1), (-1, +1)})),
    ),
)


def crafted_tableau(rows):
    lifted = tableau.obliviate(
        bcs.Bcs(
            num_vars=1,
            constraints=(
                bcs.Constraint(scope=(0,), table=frozenset({(+1,)})),
            ),
        ),
        2,
    )
    return tableau.tableau(
        lifted,
        rows,
        programs=[barrington.pair_product_program(parity=+1)],
        include_trivial_pairs=True,
    )


# --- policies and the referee loop ------------------------------------------


def test_policy_validation():
    assert honest_verifier().kind == "honest"
    pair = ((("con", 0), ("con", 0)),)
    assert dishonest_verifier(pair).pairs == pair
    with pytest.raises(ValueError, match="unknown policy"):
        VerifierPolicy("adaptive")
    with pytest.raises(ValueError, match="at least one pair"):
        VerifierPolicy("dishonest")


def test_run_protocol_is_deterministic_and_jobs_independent():
    game = cv_game(TWO_VAR)
    prover = HonestCcSampler(TWO_VAR, [+1, -1])
    first = run_protocol(game, prover, rounds=200, seed=11)
    again = run_protocol(game, prover, rounds=200, seed=11)
    threaded = run_protocol(game, prover, rounds=200, seed=11, jobs=4)
    assert first == again == threaded
    assert first.value == 1.0
    assert first.scored == 200
    assert first.declined == 0
    assert run_protocol(game, prover, rounds=200, seed=12) != first
    with pytest.raises(ValueError, match="positive"):
        run_protocol(game, prover, rounds=0, seed=1)


def test_transcript_round_trips_through_json():
    game = cv_game(TWO_VAR)
    prover = HonestCcSampler(TWO_VAR, [+1, -1])
    transcript = run_protocol(game, prover, rounds=40, seed=3, label="tiny")
    assert transcript.game == "tiny"
    restored = Transcript.from_json(transcript.to_json())
    assert restored == transcript
    assert transcript.to_json().endswith("\n")


def test_declined_rounds_survive_json_and_leave_the_score():
    tab = crafted_tableau(4)
    sim = TableauSimulator(tab)
    game = cv_game(tab.system)
    policy = dishonest_verifier([(("con", 0), ("con", 1))])
    transcript = run_protocol(game, sim, rounds=25, seed=7, policy=policy)
    assert transcript.declined == 25
    assert transcript.scored == 0
    assert transcript.value == 0.0
    restored = Transcript.from_json(transcript.to_json())
    assert restored == transcript
    assert all(r.a == DECLINED and r.ok is None for r in restored.rounds)


def test_dishonest_policy_only_draws_listed_pairs():
    game = cv_game(TWO_VAR)
    prover = HonestCcSampler(TWO_VAR, [+1, -1])
    listed = ((("con", 0), ("var", 0)), (("var", 1), ("var", 1)))
    policy = dishonest_verifier(listed)
    transcript = run_protocol(game, prover, rounds=120, seed=5, policy=policy)
    assert {(r.x, r.y) for r in transcript.rounds} == set(listed)
    assert transcript.value == 1.0


# --- provers from strategies -------------------------------------------------


def test_operator_strategy_wins_every_sampled_round():
    strategy = magic_square_strategy()
    square = bcs.magic_square()
    cc = run_protocol(
        cc_game(square), strategy_sampler(strategy), rounds=2500, seed=17
    )
    assert cc.value == 1.0
    assert cc.declined == 0
    extended = cv_strategy_from_cc(strategy, square)
    cv = run_protocol(
        cv_game(square), strategy_sampler(extended), rounds=2500, seed=18
    )
    assert cv.value == 1.0


def test_strategy_sampler_distributions_are_normalized():
    sampler = strategy_sampler(magic_square_strategy())
    dist = sampler.exact_distribution((("con", 0), ("con", 5)))
    assert sum(dist.values()) == pytest.approx(1.0)
    assert all(w > 0 for w in dist.values())


def test_optimal_classical_prover_converges_to_its_exact_value():
    game = cc_game(bcs.magic_square())
    value, fa, fb = best_classical_strategies(game)
    prover = deterministic_sampler(fa, fb)
    transcript = run_protocol(game, prover, rounds=6000, seed=23)
    v = float(value)
    assert abs(transcript.value - v) <= 5 * math.sqrt(v * (1 - v) / 6000)


def test_deterministic_sampler_raises_off_its_domain():
    prover = deterministic_sampler({("con", 0): (+1, -1)}, {})
    with pytest.raises(UnsupportedQuestion):
        prover.sample((("con", 1), ("con", 0)), random.Random(0))
    game = cv_game(TWO_VAR)
    with pytest.raises(UnsupportedQuestion):
        run_protocol(game, prover, rounds=5, seed=1)


# --- honest tableau prover under sampled play ---------------------------------


def test_honest_prover_wins_ten_thousand_sampled_rounds():
    tab = crafted_tableau(8)
    prover = HonestTableauSampler(tab, [+1])
    game = cv_game(tab.system)
    transcript = run_protocol(game, prover, rounds=10_000, seed=29)
    assert transcript.scored == 10_000
    assert transcript.declined == 0
    assert transcript.value == 1.0


# --- the dishonest probe -------------------------------------------------------


def recommended_prover():
    tab = tableau.pzk_transform(TWO_VAR, rows=8, degree=9)
    return tab, HonestTableauSampler(tab, [+1, -1])


def small_parameter_prover():
    with pytest.warns(UserWarning, match="below the recommended"):
        tab = tableau.pzk_transform(TWO_VAR, rows=4, degree=5)
    return tab, HonestTableauSampler(tab, [+1, -1])


def test_probe_passes_at_recommended_parameters():
    tab, prover = recommended_prover()
    report = dishonest_probe(prover)
    assert report.passed
    assert report.rows == 8 and report.degree == 9
    assert report.pairs_checked == tab.underlying_vars
    assert report.violations == ()


def test_probe_refuses_small_parameters_unless_told_not_to():
    _, prover = small_parameter_prover()
    with pytest.raises(ParamsTooSmall, match=r"\(8, 9\)"):
        dishonest_probe(prover)
    report = dishonest_probe(prover, strict=False)
    assert not report.passed


def test_probe_finds_a_violation_witness_below_recommended():
    tab, prover = small_parameter_prover()
    # four questions, each a pair clause showing two copies, can pool all
    # five copies of underlying variable 0 at degree 5
    def pair_clause(v1, v2):
        return ("con", tab.clause_tags.index(("pair", v1, v2)))

    probe = (
        (pair_clause(0, 1), pair_clause(2, 3)),
        (pair_clause(0, 4), ("var", 2)),
    )
    report = dishonest_probe(prover, pairs=[probe], strict=False)
    assert not report.passed
    violation = report.violations[0]
    assert violation.covered_vars == (0,)
    assert violation.subset == (0, 1, 2, 3, 4)
    assert violation.distance == 0.5


def test_probe_cannot_cover_a_variable_at_recommended_degree():
    tab, prover = recommended_prover()
    copies = tab.copy_ids(0)
    pairs = [
        (
            (("con", tab.clause_tags.index(("pair", copies[0], copies[1]))),
             ("con", tab.clause_tags.index(("pair", copies[2], copies[3])))),
            (("con", tab.clause_tags.index(("pair", copies[4], copies[5]))),
             ("con", tab.clause_tags.index(("pair", copies[6], copies[7])))),
        )
    ]
    report = dishonest_probe(prover, pairs=pairs)
    assert report.passed


def test_simulator_has_nothing_for_the_probe_to_find():
    for rows, degree in ((8, 9), (4, 5)):
        if (rows, degree) == (4, 5):
            with pytest.warns(UserWarning):
                tab = tableau.pzk_transform(TWO_VAR, rows=rows, degree=degree)
        else:
            tab = tableau.pzk_transform(TWO_VAR, rows=rows, degree=degree)
        report = dishonest_probe(TableauSimulator(tab), strict=False)
        assert report.passed
