"""Two-player one-round games with exact rational question distributions.

A :class:`Game` is finite and explicit: question lists for both players, a
distribution over question pairs held as Fractions, per-question answer
sets supplied by callables (so huge answer sets stay unmaterialized until
someone actually asks), and a win predicate.

Constraint-system games come in two flavours here.  ``cc_game`` draws two
constraints independently and uniformly and demands satisfying, mutually
consistent assignments.  ``cv_game`` is the constraint-versus-variable
relative with a symmetrized distribution whose diagonal carries half of
every row, which is the property downstream zero-knowledge machinery
leans on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import lcm, prod
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .bcs import Bcs
from .errors import AsymmetricGame, MissingConditional, TooLarge

Question = Hashable
Answer = Hashable
Correlation = Mapping[
    tuple[Question, Question], Mapping[tuple[Answer, Answer], float]
]

MAX_CLASSICAL_STRATEGIES = 10**7
MAX_COLUMN_COMBOS = 10**6


@dataclass(frozen=True)
class Game:
    questions_a: tuple[Question, ...]
    questions_b: tuple[Question, ...]
    mu: Mapping[tuple[Question, Question], Fraction]
    answers_a: Callable[[Question], tuple[Answer, ...]]
    answers_b: Callable[[Question], tuple[Answer, ...]]
    predicate: Callable[[Question, Question, Answer, Answer], bool]
    # Representative answer of the right shape for a (side, question)
    # pair, for size measurement without enumerating the answer set.
    # Not necessarily a winning answer.
    sample_answer: Callable[[str, Question], Answer] | None = None

    def __post_init__(self) -> None:
        total = Fraction(0)
        qa, qb = set(self.questions_a), set(self.questions_b)
        for (x, y), w in self.mu.items():
            if x not in qa or y not in qb:
                raise ValueError(f"distribution uses unknown question pair {(x, y)!r}")
            if w < 0:
                raise ValueError(f"negative weight on {(x, y)!r}")
            total += w
        if total != 1:
            raise ValueError(f"question weights sum to {total}, not 1")

    def row_mass(self, x: Question) -> Fraction:
        return sum(
            (w for (qx, _), w in self.mu.items() if qx == x), start=Fraction(0)
        )

    def support(self) -> list[tuple[Question, Question]]:
        return [pair for pair, w in self.mu.items() if w > 0]


def synchronicity_alpha(game: Game) -> Fraction:
    """min over questions of (diagonal mass) / (row mass).

    Needs a shared question space and a symmetric distribution; the value
    is the fraction of a row's weight sitting on "both players get the
    same question".
    """
    if set(game.questions_a) != set(game.questions_b):
        raise AsymmetricGame("players draw from different question spaces")
    for (x, y), w in game.mu.items():
        if game.mu.get((y, x), Fraction(0)) != w:
            raise AsymmetricGame(f"distribution is asymmetric at {(x, y)!r}")
    best: Fraction | None = None
    for x in game.questions_a:
        row = game.row_mass(x)
        if row == 0:
            continue
        ratio = game.mu.get((x, x), Fraction(0)) / row
        if best is None or ratio < best:
            best = ratio
    if best is None:
        raise ValueError("distribution has empty support")
    return best


def value_of_correlation(game: Game, correlation: Correlation) -> float:
    """Winning probability of an explicit conditional-distribution table.

    The correlation maps each support question pair to a distribution
    over answer pairs.  Pairs off the support are ignored; a support pair
    without a conditional raises MissingConditional.
    """
    value = 0.0
    for (x, y), w in game.mu.items():
        if w == 0:
            continue
        try:
            conditional = correlation[x, y]
        except KeyError:
            raise MissingConditional(
                f"correlation lacks a conditional for {(x, y)!r}"
            ) from None
        won = sum(
            p for (a, b), p in conditional.items() if game.predicate(x, y, a, b)
        )
        value += float(w) * won
    return value


def deterministic_correlation(
    game: Game,
    fa: Mapping[Question, Answer] | Callable[[Question], Answer],
    fb: Mapping[Question, Answer] | Callable[[Question], Answer],
) -> Correlation:
    """Point-mass correlation induced by a deterministic strategy pair."""
    pick_a = fa.__getitem__ if isinstance(fa, Mapping) else fa
    pick_b = fb.__getitem__ if isinstance(fb, Mapping) else fb
    return {
        (x, y): {(pick_a(x), pick_b(y)): 1.0}
        for (x, y), w in game.mu.items()
        if w > 0
    }


def is_projection(game: Game) -> bool:
    """True when every second-player answer pins down the winning first
    answer: for each support pair (x, y) and each b, at most one a wins."""
    for x, y in game.support():
        answers_a = game.answers_a(x)
        for b in game.answers_b(y):
            winners = 0
            for a in answers_a:
                winners += game.predicate(x, y, a, b)
                if winners > 1:
                    return False
    return True


# ---------------------------------------------------------------------------
# Constraint-system games


def _constraint_answers(bcs: Bcs) -> Callable[[Question], tuple[Answer, ...]]:
    @lru_cache(maxsize=None)
    def answers(q: Question) -> tuple[Answer, ...]:
        kind = q[0]
        if kind == "con":
            return tuple(sorted(bcs.constraints[q[1]].satisfying_set()))
        if kind == "var":
            return (-1, +1)
        raise ValueError(f"unknown question {q!r}")

    return answers


def _constraint_sample_answer(bcs: Bcs) -> Callable[[str, Question], Answer]:
    def sample(side: str, q: Question) -> Answer:
        if q[0] == "con":
            return tuple([-1] * len(bcs.constraints[q[1]].scope))
        return -1

    return sample


def _agree_on_overlap(
    scope_a: Sequence[int], a: Sequence[int], scope_b: Sequence[int], b: Sequence[int]
) -> bool:
    positions = {v: t for t, v in enumerate(scope_b)}
    return all(
        a[s] == b[positions[v]] for s, v in enumerate(scope_a) if v in positions
    )


def cc_game(bcs: Bcs) -> Game:
    """Uniform independent constraint pair; win iff both answers satisfy
    their constraint and agree wherever the scopes overlap."""
    m = len(bcs.constraints)
    if m == 0:
        raise ValueError("system has no constraints")
    questions = tuple(("con", i) for i in range(m))
    weight = Fraction(1, m * m)
    mu = {(x, y): weight for x in questions for y in questions}
    answers = _constraint_answers(bcs)

    def predicate(x: Question, y: Question, a: Answer, b: Answer) -> bool:
        ci, cj = bcs.constraints[x[1]], bcs.constraints[y[1]]
        return (
            ci.check(a)
            and cj.check(b)
            and _agree_on_overlap(ci.scope, a, cj.scope, b)
        )

    return Game(
        questions,
        questions,
        mu,
        answers,
        answers,
        predicate,
        _constraint_sample_answer(bcs),
    )


def cv_game(bcs: Bcs) -> Game:
    """Constraint-versus-variable game with a half-synchronous distribution.

    With m constraints: weight 1/(4m) on each (con i, con i) pair, weight
    1/(4m |scope_i|) on (con i, var j) and its mirror for every j in the
    scope of i, and the matching leftovers on (var j, var j) so each row
    puts exactly half its mass on the diagonal.
    """
    m = len(bcs.constraints)
    if m == 0:
        raise ValueError("system has no constraints")
    cons = tuple(("con", i) for i in range(m))
    used: set[int] = set()
    for c in bcs.constraints:
        used.update(c.scope)
    variables = tuple(("var", j) for j in range(bcs.num_vars) if j in used)
    questions = cons + variables
    mu: dict[tuple[Question, Question], Fraction] = {}
    diag_var: dict[int, Fraction] = {}
    for i, c in enumerate(bcs.constraints):
        mu[("con", i), ("con", i)] = Fraction(1, 4 * m)
        mixed = Fraction(1, 4 * m * len(c.scope))
        for j in c.scope:
            mu[("con", i), ("var", j)] = mixed
            mu[("var", j), ("con", i)] = mixed
            diag_var[j] = diag_var.get(j, Fraction(0)) + mixed
    for j, w in diag_var.items():
        mu[("var", j), ("var", j)] = w
    answers = _constraint_answers(bcs)

    def predicate(x: Question, y: Question, a: Answer, b: Answer) -> bool:
        if x[0] == "con" and y[0] == "con":
            return a == b and bcs.constraints[x[1]].check(a)
        if x[0] == "con" and y[0] == "var":
            scope = bcs.constraints[x[1]].scope
            return bcs.constraints[x[1]].check(a) and a[scope.index(y[1])] == b
        if x[0] == "var" and y[0] == "con":
            return predicate(y, x, b, a)
        return a == b

    return Game(
        questions,
        questions,
        mu,
        answers,
        answers,
        predicate,
        _constraint_sample_answer(bcs),
    )


# ---------------------------------------------------------------------------
# Classical value


def _columns(
    game: Game,
    xs: list[Question],
    ys: list[Question],
    ans_a: dict[Question, tuple],
    ans_b: dict[Question, tuple],
    weight: dict[tuple[Question, Question], int],
) -> list[tuple[list[int], np.ndarray]]:
    """Per Bob question: (support x-positions, best-response score table).

    The table is indexed by the mixed-radix combination of Alice's answers
    on the support (first support position fastest) and already maximizes
    over Bob's answer.
    """
    xpos = {x: i for i, x in enumerate(xs)}
    columns = []
    for y in ys:
        support = [x for x in xs if weight.get((x, y), 0) > 0]
        radices = [len(ans_a[x]) for x in support]
        combos = prod(radices) if support else 1
        if combos > MAX_COLUMN_COMBOS:
            raise TooLarge(f"column {y!r} needs {combos} answer combinations")
        table = np.empty(combos, dtype=np.int64)
        for idx, combo in enumerate(product(*(range(r) for r in reversed(radices)))):
            digits = tuple(reversed(combo))
            best = None
            for b in ans_b[y]:
                score = sum(
                    weight[x, y]
                    * game.predicate(x, y, ans_a[x][digits[t]], b)
                    for t, x in enumerate(support)
                )
                if best is None or score > best:
                    best = score
            table[idx] = best
        columns.append(([xpos[x] for x in support], table))
    return columns


def classical_value(game: Game, kernel: str = "numpy") -> Fraction:
    """Exact optimum over deterministic strategy pairs.

    Enumerates Alice's strategies and lets Bob best-respond per question,
    which is optimal because Bob's choices decouple across questions once
    Alice is fixed.  All scoring is integer arithmetic over the lcm of the
    weight denominators, so the result is exact with either kernel; the
    numpy kernel chews through strategies in vectorized chunks, the python
    kernel is the plain reference loop.
    """
    support = game.support()
    if not support:
        raise ValueError("distribution has empty support")
    xs = [x for x in game.questions_a if any(p[0] == x for p in support)]
    ys = [y for y in game.questions_b if any(p[1] == y for p in support)]
    ans_a = {x: game.answers_a(x) for x in xs}
    ans_b = {y: game.answers_b(y) for y in ys}
    for q, ans in list(ans_a.items()) + list(ans_b.items()):
        if not ans:
            raise ValueError(f"question {q!r} has an empty answer set")
    denom = lcm(*(w.denominator for w in game.mu.values()))
    weight = {pair: int(game.mu[pair] * denom) for pair in support}
    num_strategies = prod(len(ans_a[x]) for x in xs)
    if num_strategies > MAX_CLASSICAL_STRATEGIES:
        raise TooLarge(
            f"{num_strategies} deterministic strategies exceeds "
            f"{MAX_CLASSICAL_STRATEGIES}"
        )
    columns = _columns(game, xs, ys, ans_a, ans_b, weight)
    radices = [len(ans_a[x]) for x in xs]
    if kernel == "numpy":
        best = _best_score_numpy(columns, radices, num_strategies)
    elif kernel == "python":
        best = _best_score_python(columns, radices)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return Fraction(best, denom)


def best_classical_strategies(
    game: Game,
) -> tuple[Fraction, dict[Question, Answer], dict[Question, Answer]]:
    """An optimal deterministic strategy pair along with its value.

    Same enumeration as :func:`classical_value`, but keeps the argmax so a
    referee harness can field actual optimal provers.  Ties break toward
    the lowest strategy index.
    """
    support = game.support()
    if not support:
        raise ValueError("distribution has empty support")
    xs = [x for x in game.questions_a if any(p[0] == x for p in support)]
    ys = [y for y in game.questions_b if any(p[1] == y for p in support)]
    ans_a = {x: game.answers_a(x) for x in xs}
    ans_b = {y: game.answers_b(y) for y in ys}
    denom = lcm(*(w.denominator for w in game.mu.values()))
    weight = {pair: int(game.mu[pair] * denom) for pair in support}
    num_strategies = prod(len(ans_a[x]) for x in xs)
    if num_strategies > MAX_CLASSICAL_STRATEGIES:
        raise TooLarge(
            f"{num_strategies} deterministic strategies exceeds "
            f"{MAX_CLASSICAL_STRATEGIES}"
        )
    columns = _columns(game, xs, ys, ans_a, ans_b, weight)
    radices = [len(ans_a[x]) for x in xs]
    strides = np.cumprod([1] + radices[:-1])
    best, best_id = -1, 0
    for start in range(0, num_strategies, 1 << 20):
        ids = np.arange(start, min(start + (1 << 20), num_strategies), dtype=np.int64)
        total = np.zeros(len(ids), dtype=np.int64)
        for positions, table in columns:
            idx = np.zeros(len(ids), dtype=np.int64)
            stride = 1
            for pos in positions:
                digit = (ids // strides[pos]) % radices[pos]
                idx += digit * stride
                stride *= radices[pos]
            total += table[idx]
        local = int(total.argmax())
        if int(total[local]) > best:
            best, best_id = int(total[local]), start + local
    fa = {
        x: ans_a[x][(best_id // int(strides[i])) % radices[i]]
        for i, x in enumerate(xs)
    }
    fb = {}
    for y in ys:
        cols = [x for x in xs if weight.get((x, y), 0) > 0]
        fb[y] = max(
            ans_b[y],
            key=lambda b: sum(
                weight[x, y] * game.predicate(x, y, fa[x], b) for x in cols
            ),
        )
    return Fraction(best, denom), fa, fb


def _best_score_numpy(
    columns: list[tuple[list[int], np.ndarray]],
    radices: list[int],
    num_strategies: int,
    chunk: int = 1 << 20,
) -> int:
    strides = np.cumprod([1] + radices[:-1])
    best = None
    for start in range(0, num_strategies, chunk):
        ids = np.arange(start, min(start + chunk, num_strategies), dtype=np.int64)
        total = np.zeros(len(ids), dtype=np.int64)
        for positions, table in columns:
            idx = np.zeros(len(ids), dtype=np.int64)
            stride = 1
            for pos in positions:
                digit = (ids // strides[pos]) % radices[pos]
                idx += digit * stride
                stride *= radices[pos]
            total += table[idx]
        top = int(total.max())
        if best is None or top > best:
            best = top
    return best


def _best_score_python(
    columns: list[tuple[list[int], np.ndarray]], radices: list[int]
) -> int:
    best = None
    for digits in product(*(range(r) for r in reversed(radices))):
        digits = tuple(reversed(digits))
        total = 0
        for positions, table in columns:
            idx, stride = 0, 1
            for pos in positions:
                idx += digits[pos] * stride
                stride *= radices[pos]
            total += int(table[idx])
        if best is None or total > best:
            best = total
    return best
