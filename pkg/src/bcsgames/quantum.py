"""Finite-dimensional entangled strategies, dense matrices only.

A :class:`Strategy` is a shared state plus per-question projective
measurement families for both players, keyed by the same tagged questions
the game objects use.  Everything is explicit numpy at dimensions small
enough to eyeball (at most 64 per side), which covers the operator
solutions this package cares about; there is no sparse or symbolic path.

The centrepiece is the two-EPR-pair strategy for the 3x3 parity grid: a
grid of two-qubit Pauli observables whose rows multiply to +identity and
whose columns multiply to +,+,-identity.  Constraint measurements are the
joint eigenprojectors of each row or column triple, and variable
measurements come from the single cell observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .bcs import Bcs
from .errors import (
    DimensionMismatch,
    NotPerfect,
    TooLarge,
    UnsupportedQuestion,
    VarNotInScope,
)
from .games import Answer, Correlation, Game, Question

MAX_SIDE_DIM = 64
MAX_EPR_PAIRS = 6
EIGENVALUE_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class Strategy:
    state: np.ndarray
    dim_a: int
    dim_b: int
    meas_a: Mapping[Question, Mapping[Answer, np.ndarray]]
    meas_b: Mapping[Question, Mapping[Answer, np.ndarray]]

    def __post_init__(self) -> None:
        if self.dim_a > MAX_SIDE_DIM or self.dim_b > MAX_SIDE_DIM:
            raise TooLarge(
                f"side dimensions {self.dim_a}x{self.dim_b} exceed {MAX_SIDE_DIM}"
            )
        if self.state.shape != (self.dim_a * self.dim_b,):
            raise DimensionMismatch(
                f"state has shape {self.state.shape}, expected "
                f"({self.dim_a * self.dim_b},)"
            )
        norm = float(np.linalg.norm(self.state))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state norm is {norm}, not 1")


def measurement(
    s: Strategy, side: str, q: Question
) -> Mapping[Answer, np.ndarray]:
    table = s.meas_a if side == "a" else s.meas_b
    try:
        return table[q]
    except KeyError:
        raise UnsupportedQuestion(
            f"strategy has no measurement for question {q!r}"
        ) from None


def epr_state(pairs: int) -> np.ndarray:
    """``pairs`` EPR pairs, qubit i of each side entangled with qubit i of
    the other.  Laid out side-major: the vector index is
    (alice basis state) * 2**pairs + (bob basis state)."""
    if pairs < 1:
        raise ValueError("need at least one pair")
    if pairs > MAX_EPR_PAIRS:
        raise TooLarge(f"{pairs} pairs exceeds the cap of {MAX_EPR_PAIRS}")
    dim = 2**pairs
    state = np.zeros(dim * dim, dtype=complex)
    for j in range(dim):
        state[j * dim + j] = 1.0
    return state / np.sqrt(dim)


def pair_expectation(
    state: np.ndarray, dim_a: int, dim_b: int, a: np.ndarray, b: np.ndarray
) -> complex:
    """<state| a (x) b |state> without forming the Kronecker product."""
    if a.shape != (dim_a, dim_a) or b.shape != (dim_b, dim_b):
        raise DimensionMismatch(
            f"operator shapes {a.shape}, {b.shape} do not match side "
            f"dimensions {dim_a}, {dim_b}"
        )
    psi = state.reshape(dim_a, dim_b)
    return complex(np.vdot(psi, a @ psi @ b.T))


# ---------------------------------------------------------------------------
# The parity-grid strategy


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def magic_square_grid() -> list[np.ndarray]:
    """Two-qubit Pauli observables for grid cells 0..8 (cell = 3*row + col)."""
    return [
        _kron(X, I2), _kron(I2, X), _kron(X, X),
        _kron(I2, Z), _kron(Z, I2), _kron(Z, Z),
        _kron(X, Z), _kron(Z, X), _kron(Y, Y),
    ]


def _joint_eigenprojectors(
    observables: list[np.ndarray], outcomes: list[tuple[int, ...]]
) -> dict[tuple[int, ...], np.ndarray]:
    dim = observables[0].shape[0]
    projectors = {}
    for signs in outcomes:
        p = np.eye(dim, dtype=complex)
        for sign, obs in zip(signs, observables):
            p = p @ (np.eye(dim, dtype=complex) + sign * obs) / 2
        projectors[signs] = p
    return projectors


def magic_square_strategy() -> Strategy:
    """Perfect operator strategy for the 3x3 parity grid.

    Measurements cover both constraint questions (joint eigenprojectors of
    a row or column triple, keyed by the satisfying sign tuples) and
    variable questions (eigenprojectors of the single cell observable), so
    the same strategy plays the constraint-pair game and the
    constraint-versus-variable game.  All grid observables are real, so
    both players use identical matrices.
    """
    from .bcs import magic_square

    grid = magic_square_grid()
    system = magic_square()
    meas: dict[Question, dict[Answer, np.ndarray]] = {}
    for i, constraint in enumerate(system.constraints):
        observables = [grid[j] for j in constraint.scope]
        outcomes = sorted(constraint.satisfying_set())
        meas[("con", i)] = _joint_eigenprojectors(observables, outcomes)
    eye = np.eye(4, dtype=complex)
    for j in range(9):
        meas[("var", j)] = {
            +1: (eye + grid[j]) / 2,
            -1: (eye - grid[j]) / 2,
        }
    return Strategy(epr_state(2), 4, 4, meas, meas)


# ---------------------------------------------------------------------------
# Values and checks


def correlation_of(s: Strategy, game: Game) -> Correlation:
    """Born-rule conditional distributions on the support of the game."""
    table: dict[tuple[Question, Question], dict[tuple[Answer, Answer], float]] = {}
    for x, y in game.support():
        ma, mb = measurement(s, "a", x), measurement(s, "b", y)
        conditional = {}
        for a, pa in ma.items():
            for b, pb in mb.items():
                prob = pair_expectation(s.state, s.dim_a, s.dim_b, pa, pb)
                conditional[a, b] = float(prob.real)
        table[x, y] = conditional
    return table


def strategy_value(game: Game, s: Strategy) -> float:
    """Winning probability of the strategy: sum of mu * V * Born weights."""
    value = 0.0
    for (x, y), w in game.mu.items():
        if w == 0:
            continue
        ma, mb = measurement(s, "a", x), measurement(s, "b", y)
        won = 0.0
        for a, pa in ma.items():
            for b, pb in mb.items():
                if game.predicate(x, y, a, b):
                    prob = pair_expectation(s.state, s.dim_a, s.dim_b, pa, pb)
                    won += prob.real
        value += float(w) * won
    return value


@dataclass(frozen=True)
class PccReport:
    projectivity: float
    completeness: float
    commutator: float
    consistency: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            max(
                self.projectivity,
                self.completeness,
                self.commutator,
                self.consistency,
            )
            <= self.tol
        )


def _spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def check_pcc(game: Game, s: Strategy, tol: float = 1e-9) -> PccReport:
    """Projectivity, commutation, and consistency residuals on the support.

    Commutators treat the two players' operators as acting on one space
    (the synchronous picture), so the side dimensions must agree.
    Consistency is measured on diagonal support questions: both players
    measuring the same question must give mirrored actions on the state.
    """
    if s.dim_a != s.dim_b:
        raise DimensionMismatch(
            f"commutator check needs equal side dimensions, got "
            f"{s.dim_a} and {s.dim_b}"
        )
    projectivity = completeness = commutator = consistency = 0.0
    support = game.support()
    qa = {x for x, _ in support}
    qb = {y for _, y in support}
    psi = s.state.reshape(s.dim_a, s.dim_b)
    for side, questions in (("a", qa), ("b", qb)):
        for q in questions:
            family = measurement(s, side, q)
            total = np.zeros((s.dim_a, s.dim_a), dtype=complex)
            for p in family.values():
                projectivity = max(projectivity, _spectral_norm(p @ p - p))
                projectivity = max(projectivity, _spectral_norm(p - p.conj().T))
                total += p
            completeness = max(
                completeness, _spectral_norm(total - np.eye(s.dim_a))
            )
    for x, y in support:
        ma, mb = measurement(s, "a", x), measurement(s, "b", y)
        for pa in ma.values():
            for pb in mb.values():
                commutator = max(commutator, _spectral_norm(pa @ pb - pb @ pa))
    for x, y in support:
        if x != y:
            continue
        ma, mb = measurement(s, "a", x), measurement(s, "b", y)
        for a, pa in ma.items():
            pb = mb.get(a)
            if pb is None:
                consistency = max(consistency, float(np.linalg.norm(pa @ psi)))
                continue
            consistency = max(
                consistency, float(np.linalg.norm(pa @ psi - psi @ pb.T))
            )
    return PccReport(projectivity, completeness, commutator, consistency, tol)


def variable_observable(
    s: Strategy, system: Bcs, i: int, k: int, side: str = "a"
) -> np.ndarray:
    """Signed sum of a constraint's projectors: the observable a player
    effectively measures for variable k when answering constraint i."""
    scope = system.constraints[i].scope
    if k not in scope:
        raise VarNotInScope(f"variable {k} is not in constraint {i}'s scope")
    pos = scope.index(k)
    family = measurement(s, side, ("con", i))
    dim = s.dim_a if side == "a" else s.dim_b
    m = np.zeros((dim, dim), dtype=complex)
    for a, p in family.items():
        m += a[pos] * p
    return m


def _sign_eigenprojectors(m: np.ndarray) -> dict[int, np.ndarray]:
    values, vectors = np.linalg.eigh(m)
    dim = m.shape[0]
    plus = np.zeros((dim, dim), dtype=complex)
    minus = np.zeros((dim, dim), dtype=complex)
    for lam, v in zip(values, vectors.T):
        col = v.reshape(dim, 1)
        if abs(lam - 1.0) <= EIGENVALUE_TOL:
            plus += col @ col.conj().T
        elif abs(lam + 1.0) <= EIGENVALUE_TOL:
            minus += col @ col.conj().T
        else:
            raise NotPerfect(
                f"observable eigenvalue {lam} is not within "
                f"{EIGENVALUE_TOL} of +1 or -1"
            )
    return {+1: plus, -1: minus}


def cv_strategy_from_cc(s: Strategy, system: Bcs, tol: float = 1e-9) -> Strategy:
    """Extend a perfect constraint-pair strategy with variable measurements.

    Constraint questions keep their measurements.  Each variable question
    measures the eigenprojectors of the observable extracted from the
    lowest-index constraint containing the variable (a perfect strategy
    makes the choice immaterial).
    """
    from .games import cc_game

    value = strategy_value(cc_game(system), s)
    if value < 1 - tol:
        raise NotPerfect(f"constraint-pair value {value} is below 1 - {tol}")
    meas_a: dict[Question, Mapping[Answer, np.ndarray]] = dict(s.meas_a)
    meas_b: dict[Question, Mapping[Answer, np.ndarray]] = dict(s.meas_b)
    for j in range(system.num_vars):
        owners = [
            i for i, c in enumerate(system.constraints) if j in c.scope
        ]
        if not owners:
            continue
        i = owners[0]
        meas_a[("var", j)] = _sign_eigenprojectors(
            variable_observable(s, system, i, j, "a")
        )
        meas_b[("var", j)] = _sign_eigenprojectors(
            variable_observable(s, system, i, j, "b")
        )
    return Strategy(s.state, s.dim_a, s.dim_b, meas_a, meas_b)


def classical_strategy(game: Game, fa, fb) -> Strategy:
    """Deterministic functions embedded as diagonal 0/1 measurements on a
    one-dimensional state; its value equals the classical evaluation."""
    one = np.ones(1, dtype=complex)
    pick_a = fa.__getitem__ if isinstance(fa, Mapping) else fa
    pick_b = fb.__getitem__ if isinstance(fb, Mapping) else fb
    meas_a = {
        x: {
            a: np.array([[1.0 if a == pick_a(x) else 0.0]], dtype=complex)
            for a in game.answers_a(x)
        }
        for x in game.questions_a
    }
    meas_b = {
        y: {
            b: np.array([[1.0 if b == pick_b(y) else 0.0]], dtype=complex)
            for b in game.answers_b(y)
        }
        for y in game.questions_b
    }
    return Strategy(one, 1, 1, meas_a, meas_b)
