"""Game-level transformations and size reports.

``oracularize`` folds a two-player game into a three-role form: an oracle
role answering a whole question pair, plus one isolated role per original
player.  The referee picks one of five role pairings uniformly (both
oracle, oracle against either isolated role, or a matched isolated pair)
and payloads come from the original question distribution.  Isolated
players never face each other, and on mixed pairings the oracle sits on
the second player's side, which is what makes the result a projection
game: the oracle's answer determines the only acceptable isolated answer.

``parallel_repeat`` plays k independent coordinates at once.  The exact
product game is materialized only while the support stays small; past the
guard you get a sampling handle that still knows how to draw questions
and judge answers but cannot be enumerated.

Reports are measured from the constructed objects, never copied out of
the constructions that made them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod
from typing import Mapping

from .bcs import Bcs
from .errors import TooLarge
from .games import Answer, Game, Question

MAX_REPEATED_SUPPORT = 10**6
MAX_ANSWER_PRODUCT = 10**6


def question_to_json(q: object) -> object:
    """Question tags as JSON-ready data (tuples become lists)."""
    if isinstance(q, tuple):
        return [question_to_json(part) for part in q]
    return q


def question_from_json(data: object) -> object:
    if isinstance(data, list):
        return tuple(question_from_json(part) for part in data)
    return data


def _encoded_bits(obj: object) -> int:
    return 8 * len(json.dumps(question_to_json(obj), separators=(",", ":")))


# ---------------------------------------------------------------------------
# Oracularization


def oracularize(game: Game) -> Game:
    """Three-role wrapper with the oracle on the second player's side.

    Questions are tagged ("oracle", (x, y)), ("a", x), or ("b", y); both
    players share the space.  Oracle answers are pairs drawn from the
    original answer sets.  Agreement is demanded wherever an isolated
    question matches the corresponding oracle coordinate, and oracle
    answers must win the original game.
    """
    support = game.support()
    if not support:
        raise ValueError("distribution has empty support")
    oracle_qs = tuple(("oracle", pair) for pair in support)
    iso_a = tuple(("a", x) for x in game.questions_a if game.row_mass(x) > 0)
    iso_b_seen = {y for _, y in support}
    iso_b = tuple(("b", y) for y in game.questions_b if y in iso_b_seen)
    questions = oracle_qs + iso_a + iso_b

    fifth = Fraction(1, 5)
    mu: dict[tuple[Question, Question], Fraction] = {}
    for (x, y), w in game.mu.items():
        if w == 0:
            continue
        o = ("oracle", (x, y))
        mu[o, o] = mu.get((o, o), Fraction(0)) + w * fifth
        mu[("a", x), o] = mu.get((("a", x), o), Fraction(0)) + w * fifth
        mu[("b", y), o] = mu.get((("b", y), o), Fraction(0)) + w * fifth
        for iso in (("a", x), ("b", y)):
            mu[iso, iso] = mu.get((iso, iso), Fraction(0)) + w * fifth

    def answers(q: Question) -> tuple[Answer, ...]:
        role = q[0]
        if role == "oracle":
            x, y = q[1]
            ans_a, ans_b = game.answers_a(x), game.answers_b(y)
            if len(ans_a) * len(ans_b) > MAX_ANSWER_PRODUCT:
                raise TooLarge(
                    f"oracle answer set for {q!r} has "
                    f"{len(ans_a) * len(ans_b)} elements"
                )
            return tuple(product(ans_a, ans_b))
        if role == "a":
            return game.answers_a(q[1])
        if role == "b":
            return game.answers_b(q[1])
        raise ValueError(f"unknown question {q!r}")

    def oracle_ok(q: Question, ans: Answer) -> bool:
        x, y = q[1]
        return game.predicate(x, y, ans[0], ans[1])

    def predicate(qx: Question, qy: Question, a: Answer, b: Answer) -> bool:
        rx, ry = qx[0], qy[0]
        if rx == "oracle" and ry == "oracle":
            if not (oracle_ok(qx, a) and oracle_ok(qy, b)):
                return False
            (x1, y1), (x2, y2) = qx[1], qy[1]
            if x1 == x2 and a[0] != b[0]:
                return False
            if y1 == y2 and a[1] != b[1]:
                return False
            return True
        if ry == "oracle":
            if not oracle_ok(qy, b):
                return False
            x, y = qy[1]
            if rx == "a":
                return a == b[0] if qx[1] == x else True
            return a == b[1] if qx[1] == y else True
        if rx == "oracle":
            return predicate(qy, qx, b, a)
        if rx == ry:
            return a == b if qx == qy else True
        return True  # isolated roles never meet under the honest referee

    def sample_answer(side: str, q: Question) -> Answer:
        base = game.sample_answer
        role = q[0]
        if role == "oracle":
            x, y = q[1]
            if base is not None:
                return (base("a", x), base("b", y))
            return (game.answers_a(x)[0], game.answers_b(y)[0])
        if base is not None:
            return base(role, q[1])
        picker = game.answers_a if role == "a" else game.answers_b
        return picker(q[1])[0]

    return Game(questions, questions, mu, answers, answers, predicate, sample_answer)


# ---------------------------------------------------------------------------
# Parallel repetition


@dataclass(frozen=True)
class RepeatedGameHandle:
    """Sampling-only stand-in for a product game too big to materialize.

    Knows the base game and the number of coordinates; question pairs are
    drawn coordinate-wise and answers judged coordinate-wise, but there is
    no explicit question list or distribution to enumerate.
    """

    base: Game
    rounds: int

    def predicate(self, x: Question, y: Question, a: Answer, b: Answer) -> bool:
        return all(
            self.base.predicate(x[t], y[t], a[t], b[t]) for t in range(self.rounds)
        )


def parallel_repeat(game: Game, rounds: int) -> Game | RepeatedGameHandle:
    """Product of ``rounds`` independent coordinates; win them all.

    Returns the explicit product game while support(mu)**rounds stays at
    or under MAX_REPEATED_SUPPORT, otherwise a RepeatedGameHandle.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    support = game.support()
    if not support:
        raise ValueError("distribution has empty support")
    if len(support) ** rounds > MAX_REPEATED_SUPPORT:
        return RepeatedGameHandle(game, rounds)

    xs = list(dict.fromkeys(x for x, _ in support))
    ys = list(dict.fromkeys(y for _, y in support))
    questions_a = tuple(product(xs, repeat=rounds))
    questions_b = tuple(product(ys, repeat=rounds))
    mu: dict[tuple[Question, Question], Fraction] = {}
    for pairs in product(support, repeat=rounds):
        weight = prod(
            (game.mu[p] for p in pairs), start=Fraction(1)
        )
        key = (tuple(x for x, _ in pairs), tuple(y for _, y in pairs))
        mu[key] = mu.get(key, Fraction(0)) + weight

    def make_answers(base_answers):
        def answers(q: Question) -> tuple[Answer, ...]:
            sets = [base_answers(part) for part in q]
            if prod(len(s) for s in sets) > MAX_ANSWER_PRODUCT:
                raise TooLarge(f"answer product for {q!r} is too large")
            return tuple(product(*sets))

        return answers

    def predicate(x: Question, y: Question, a: Answer, b: Answer) -> bool:
        return all(
            game.predicate(x[t], y[t], a[t], b[t]) for t in range(rounds)
        )

    sample = None
    if game.sample_answer is not None:
        base_sample = game.sample_answer

        def sample(side: str, q: Question) -> Answer:
            return tuple(base_sample(side, part) for part in q)

    return Game(
        questions_a,
        questions_b,
        mu,
        make_answers(game.answers_a),
        make_answers(game.answers_b),
        predicate,
        sample,
    )


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class TransformReport:
    name: str
    params: Mapping[str, int]
    before: Mapping[str, object]
    after: Mapping[str, object]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "params": dict(self.params),
            "before": dict(self.before),
            "after": dict(self.after),
        }


def measures(obj: Bcs | Game | RepeatedGameHandle) -> dict[str, object]:
    """Size measurements taken from the object itself."""
    if isinstance(obj, Bcs):
        return {
            "kind": "bcs",
            "variables": obj.num_vars,
            "constraints": len(obj.constraints),
            "max_scope": max(len(c.scope) for c in obj.constraints),
        }
    if isinstance(obj, RepeatedGameHandle):
        inner = measures(obj.base)
        return {
            "kind": "sampled_game",
            "rounds": obj.rounds,
            "base_questions_a": inner["questions_a"],
            "base_questions_b": inner["questions_b"],
            "base_support": inner["support"],
        }
    support = obj.support()
    question_bits = max(
        _encoded_bits(q) for q in obj.questions_a + obj.questions_b
    )
    answer_bits = 0
    for q in obj.questions_a:
        sample = (
            obj.sample_answer("a", q)
            if obj.sample_answer is not None
            else obj.answers_a(q)[0]
        )
        answer_bits = max(answer_bits, _encoded_bits(sample))
    for q in obj.questions_b:
        sample = (
            obj.sample_answer("b", q)
            if obj.sample_answer is not None
            else obj.answers_b(q)[0]
        )
        answer_bits = max(answer_bits, _encoded_bits(sample))
    return {
        "kind": "game",
        "questions_a": len(obj.questions_a),
        "questions_b": len(obj.questions_b),
        "support": len(support),
        "max_question_bits": question_bits,
        "max_answer_bits": answer_bits,
    }


def report(
    name: str,
    params: Mapping[str, int],
    before: Bcs | Game | RepeatedGameHandle,
    after: Bcs | Game | RepeatedGameHandle,
) -> TransformReport:
    return TransformReport(name, dict(params), measures(before), measures(after))
