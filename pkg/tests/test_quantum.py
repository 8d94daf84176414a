"""Operator strategies: the parity grid, PCC checks, and CV extension."""

from fractions import Fraction

import numpy as np
import pytest

from bcsgames import bcs, games, quantum
from bcsgames.errors import (
    DimensionMismatch,
    NotPerfect,
    UnsupportedQuestion,
    VarNotInScope,
)


def test_epr_state_is_maximally_entangled():
    psi = quantum.epr_state(2)
    assert psi.shape == (16,)
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12
    rho = psi.reshape(4, 4) @ psi.reshape(4, 4).conj().T
    assert np.allclose(rho, np.eye(4) / 4)


def test_pair_expectation_on_epr():
    psi = quantum.epr_state(1)
    plus_z = (np.eye(2) + quantum.Z) / 2
    # Matching Z outcomes on an EPR pair: probability 1/2 each diagonal.
    p = quantum.pair_expectation(psi, 2, 2, plus_z, plus_z)
    assert abs(p.real - 0.5) < 1e-12
    minus_z = (np.eye(2) - quantum.Z) / 2
    p_cross = quantum.pair_expectation(psi, 2, 2, plus_z, minus_z)
    assert abs(p_cross.real) < 1e-12


def test_magic_square_grid_structure():
    grid = quantum.magic_square_grid()
    assert len(grid) == 9
    system = bcs.magic_square()
    for c in system.constraints:
        target = next(iter({r[0] * r[1] * r[2] for r in c.base_table()}))
        prod = grid[c.scope[0]] @ grid[c.scope[1]] @ grid[c.scope[2]]
        assert np.allclose(prod, target * np.eye(4))
    # Observables within one context commute.
    for c in system.constraints:
        for u in c.scope:
            for v in c.scope:
                assert np.allclose(
                    grid[u] @ grid[v] - grid[v] @ grid[u], 0
                )


def test_magic_square_strategy_wins_cc_game():
    s = quantum.magic_square_strategy()
    game = games.cc_game(bcs.magic_square())
    assert quantum.strategy_value(game, s) >= 1 - 1e-9


def test_magic_square_strategy_wins_cv_game():
    s = quantum.magic_square_strategy()
    game = games.cv_game(bcs.magic_square())
    assert quantum.strategy_value(game, s) >= 1 - 1e-9


def test_quantum_beats_classical_on_magic_square():
    game = games.cv_game(bcs.magic_square())
    classical = games.classical_value(game)
    assert classical == Fraction(35, 36)
    assert quantum.strategy_value(game, quantum.magic_square_strategy()) > float(
        classical
    )


def test_measurement_rejects_unknown_question():
    s = quantum.magic_square_strategy()
    with pytest.raises(UnsupportedQuestion):
        quantum.measurement(s, "a", ("con", 99))


def test_check_pcc_sees_cross_context_anticommutation():
    # On the constraint-pair game the support includes two different
    # contexts, and their cell observables anticommute: the synchronous
    # commutator leg must flag it while everything else stays clean.
    s = quantum.magic_square_strategy()
    report = quantum.check_pcc(games.cc_game(bcs.magic_square()), s, tol=1e-9)
    assert not report.passed
    assert report.projectivity <= 1e-9
    assert report.completeness <= 1e-9
    assert report.consistency <= 1e-9
    assert report.commutator > 0.1


def test_cv_extension_is_perfect_and_pcc():
    system = bcs.magic_square()
    s_cv = quantum.cv_strategy_from_cc(quantum.magic_square_strategy(), system)
    game = games.cv_game(system)
    assert quantum.strategy_value(game, s_cv) >= 1 - 1e-9
    report = quantum.check_pcc(game, s_cv, tol=1e-9)
    assert report.passed


def test_cv_extension_rejects_imperfect_base():
    system = bcs.magic_square()
    game = games.cc_game(system)
    _, fa, fb = games.best_classical_strategies(game)
    classical = quantum.classical_strategy(game, fa, fb)
    with pytest.raises(NotPerfect):
        quantum.cv_strategy_from_cc(classical, system)


def test_variable_observable_involution():
    s = quantum.magic_square_strategy()
    system = bcs.magic_square()
    m = quantum.variable_observable(s, system, 0, 1)
    assert np.allclose(m @ m, np.eye(4))
    assert np.allclose(m, m.conj().T)
    with pytest.raises(VarNotInScope):
        quantum.variable_observable(s, system, 0, 8)


def test_classical_strategy_matches_deterministic_value():
    system = bcs.bcs_from_cnf("p cnf 2 1\n1 2 0\n")
    game = games.cv_game(system)
    value, fa, fb = games.best_classical_strategies(game)
    s = quantum.classical_strategy(game, fa, fb)
    assert abs(quantum.strategy_value(game, s) - float(value)) < 1e-12


def test_check_pcc_requires_square_dims():
    game = games.cc_game(bcs.magic_square())
    one = np.ones(2, dtype=complex) / np.sqrt(2)
    meas = {q: {0: np.eye(1, dtype=complex)} for q in game.questions_a}
    lop = {q: {0: np.eye(2, dtype=complex)} for q in game.questions_a}
    s = quantum.Strategy(one, 1, 2, meas, lop)
    with pytest.raises(DimensionMismatch):
        quantum.check_pcc(game, s)


def test_strategy_validation():
    with pytest.raises(DimensionMismatch):
        quantum.Strategy(np.ones(3, dtype=complex), 2, 2, {}, {})
    with pytest.raises(ValueError):
        quantum.Strategy(np.ones(4, dtype=complex), 2, 2, {}, {})
