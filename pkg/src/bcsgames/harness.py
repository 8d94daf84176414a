"""Protocol referee: run rounds against a prover pair and keep score.

The referee draws question pairs (from the game's own distribution, or
from an explicitly adversarial list), forwards them to an answer sampler,
and records a transcript.  Declined rounds are recorded as unscored
rather than lost; a sampler that declines is refusing to simulate a
correlation, not losing the game, and the empirical value should say
what it saw, not punish honesty about scope.

Question sampling is exact (integer arithmetic over the distribution's
common denominator) and every round owns a derived RNG substream, so a
transcript is a pure function of (game, prover, policy, seed, rounds)
and parallel execution cannot reorder randomness.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

from .errors import ParamsTooSmall, UnsupportedQuestion
from .games import Game
from .quantum import Strategy, measurement, pair_expectation
from .rng import substream
from .samplers import (
    DECLINED,
    AnswerSampler,
    CountDistribution,
    statistical_distance,
    uniform_distribution,
)
from .tableau import RECOMMENDED_DEGREE, RECOMMENDED_ROWS, TableauBcs

Question = object
QuestionPair = tuple[Question, Question]


# ---------------------------------------------------------------------------
# Verifier policies


@dataclass(frozen=True)
class VerifierPolicy:
    """How the referee picks question pairs.

    ``honest`` follows the game's distribution.  ``dishonest`` draws
    uniformly from an explicit pair list, which may (and for probing,
    should) leave the game's support.
    """

    kind: str = "honest"
    pairs: tuple[QuestionPair, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("honest", "dishonest"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "dishonest" and not self.pairs:
            raise ValueError("a dishonest policy needs at least one pair")


def honest_verifier() -> VerifierPolicy:
    return VerifierPolicy("honest")


def dishonest_verifier(pairs: Sequence[QuestionPair]) -> VerifierPolicy:
    return VerifierPolicy("dishonest", tuple(pairs))


# ---------------------------------------------------------------------------
# Transcripts


@dataclass(frozen=True)
class Round:
    x: Question
    y: Question
    a: object
    b: object
    ok: bool | None


@dataclass(frozen=True)
class Transcript:
    seed: int
    game: str
    rounds: tuple[Round, ...]
    value: float

    @property
    def scored(self) -> int:
        return sum(1 for r in self.rounds if r.ok is not None)

    @property
    def declined(self) -> int:
        return sum(1 for r in self.rounds if r.ok is None)

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "game": self.game,
            "rounds": [
                {"x": r.x, "y": r.y, "a": r.a, "b": r.b, "ok": r.ok}
                for r in self.rounds
            ],
            "value": self.value,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        payload = json.loads(text)
        rounds = tuple(
            Round(
                _freeze(r["x"]),
                _freeze(r["y"]),
                _freeze(r["a"]),
                _freeze(r["b"]),
                r["ok"],
            )
            for r in payload["rounds"]
        )
        return cls(payload["seed"], payload["game"], rounds, payload["value"])


def _freeze(obj):
    if isinstance(obj, list):
        return tuple(_freeze(x) for x in obj)
    return obj


# ---------------------------------------------------------------------------
# Running the protocol


def _pair_drawer(game: Game, policy: VerifierPolicy):
    if policy.kind == "dishonest":
        pairs = policy.pairs

        def draw(rng):
            return pairs[rng.randrange(len(pairs))]

        return draw
    support = game.support()
    denom = lcm(*(game.mu[p].denominator for p in support))
    cumulative = []
    acc = 0
    for p in support:
        acc += int(game.mu[p] * denom)
        cumulative.append(acc)

    def draw(rng):
        return support[bisect_right(cumulative, rng.randrange(denom))]

    return draw


def run_protocol(
    game: Game,
    prover: AnswerSampler,
    rounds: int,
    seed: int,
    policy: VerifierPolicy | None = None,
    jobs: int = 1,
    label: str = "game",
) -> Transcript:
    """Play ``rounds`` rounds and return the transcript.

    Each round derives its own RNG from (seed, "round", index) and uses
    it for both the question draw and the prover, so transcripts are
    reproducible and independent of ``jobs``.  The value is the win rate
    over scored rounds; declined rounds are counted separately.
    """
    if rounds < 1:
        raise ValueError("rounds must be positive")
    policy = policy or honest_verifier()
    draw = _pair_drawer(game, policy)

    def play(idx: int) -> Round:
        rng = substream(seed, "round", idx)
        x, y = draw(rng)
        a, b = prover.sample((x, y), rng)
        if a == DECLINED or b == DECLINED:
            return Round(x, y, a, b, None)
        return Round(x, y, a, b, bool(game.predicate(x, y, a, b)))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            played = tuple(pool.map(play, range(rounds)))
    else:
        played = tuple(play(i) for i in range(rounds))
    scored = [r for r in played if r.ok is not None]
    value = sum(r.ok for r in scored) / len(scored) if scored else 0.0
    return Transcript(seed=seed, game=label, rounds=played, value=value)


# ---------------------------------------------------------------------------
# Provers from strategies


class StrategySampler:
    """Born-rule answer sampler backed by a projective strategy.

    Joint outcome distributions are computed lazily per question pair and
    cached.  Questions outside the strategy's measurement tables raise
    ``UnsupportedQuestion``: a strategy prover has nothing sensible to
    say off its domain, unlike a simulator, which declines politely.
    """

    def __init__(self, strategy: Strategy) -> None:
        self.strategy = strategy
        self._pmfs: dict[QuestionPair, tuple[list, list[float]]] = {}

    def _pmf(self, pair: QuestionPair):
        if pair not in self._pmfs:
            s = self.strategy
            ma = measurement(s, "a", pair[0])
            mb = measurement(s, "b", pair[1])
            outcomes, weights = [], []
            for a, pa in ma.items():
                for b, pb in mb.items():
                    w = pair_expectation(s.state, s.dim_a, s.dim_b, pa, pb).real
                    if w > 1e-15:
                        outcomes.append((a, b))
                        weights.append(w)
            total = sum(weights)
            cumulative, acc = [], 0.0
            for w in weights:
                acc += w / total
                cumulative.append(acc)
            self._pmfs[pair] = (outcomes, cumulative)
        return self._pmfs[pair]

    def sample(self, pair: QuestionPair, rng):
        outcomes, cumulative = self._pmf(pair)
        r = rng.random()
        return outcomes[bisect_right(cumulative, r, hi=len(outcomes) - 1)]

    def exact_distribution(self, pair: QuestionPair):
        outcomes, cumulative = self._pmf(pair)
        out, prev = {}, 0.0
        for key, c in zip(outcomes, cumulative):
            out[key] = c - prev
            prev = c
        return out


def strategy_sampler(strategy: Strategy) -> StrategySampler:
    return StrategySampler(strategy)


class DeterministicSampler:
    """Prover pair defined by two fixed answer functions."""

    def __init__(self, fa: Mapping, fb: Mapping) -> None:
        self.fa = dict(fa)
        self.fb = dict(fb)

    def _answer(self, table: Mapping, q):
        try:
            return table[q]
        except KeyError:
            raise UnsupportedQuestion(f"no answer on file for {q!r}") from None

    def sample(self, pair: QuestionPair, rng):
        return self._answer(self.fa, pair[0]), self._answer(self.fb, pair[1])

    def exact_distribution(self, pair: QuestionPair):
        return {self.sample(pair, None): Fraction(1)}


def deterministic_sampler(fa: Mapping, fb: Mapping) -> DeterministicSampler:
    return DeterministicSampler(fa, fb)


# ---------------------------------------------------------------------------
# Dishonest probing


@dataclass(frozen=True)
class ProbeViolation:
    pair: tuple[QuestionPair, QuestionPair]
    covered_vars: tuple[int, ...]
    subset: tuple[int, ...]
    distance: float


@dataclass(frozen=True)
class ProbeReport:
    rows: int
    degree: int
    pairs_checked: int
    violations: tuple[ProbeViolation, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.violations


def _exposed_copies(tab: TableauBcs, question) -> tuple[int, ...]:
    kind, payload = question
    if kind == "var":
        scope = (payload,)
    else:
        scope = tab.system.constraints[payload].scope
    return tuple(v for v in scope if tab.variable_kind(v)[0] == "copy")


def _candidate_questions(tab: TableauBcs) -> list[tuple[object, tuple[int, ...]]]:
    out = []
    for ci in range(len(tab.system.constraints)):
        q = ("con", ci)
        copies = _exposed_copies(tab, q)
        if copies:
            out.append((q, copies))
    for v in range(tab.underlying_vars * tab.degree):
        out.append((("var", v), (v,)))
    return out


def _auto_pairs(tab: TableauBcs) -> list[tuple[QuestionPair, QuestionPair]]:
    """One maximally adversarial probe per underlying variable.

    Greedy cover: pick up to four questions exposing as many distinct
    copies of the variable as possible.  Whether that is enough to break
    uniformity is exactly what the probe then measures.
    """
    candidates = _candidate_questions(tab)
    pairs = []
    for uv in range(tab.underlying_vars):
        block = set(tab.copy_ids(uv))
        scored = [
            (q, set(copies) & block) for q, copies in candidates if set(copies) & block
        ]
        chosen: list = []
        covered: set[int] = set()
        for _ in range(4):
            best = max(scored, key=lambda qc: len(qc[1] - covered), default=None)
            if best is None or not best[1] - covered:
                break
            chosen.append(best[0])
            covered |= best[1]
        while len(chosen) < 4:
            chosen.append(chosen[-1] if chosen else ("var", min(block)))
        pairs.append(((chosen[0], chosen[1]), (chosen[2], chosen[3])))
    return pairs


def dishonest_probe(
    prover,
    pairs: Sequence[tuple[QuestionPair, QuestionPair]] | None = None,
    strict: bool = True,
) -> ProbeReport:
    """Attack a tableau prover with pairs of joint questions.

    Each probe element is two question pairs, as posed across two
    protocol invocations by a verifier free to ignore the game's
    distribution.  The four questions' visible copy variables are pooled
    and the prover's exact joint marginal on the pool is compared to
    uniform; any deviation is reported as a violation with the fully
    covered variables named.

    ``strict`` refuses to endorse parameters below the recommended
    (rows, degree) floor, because there adversarial covers exist and the
    probe is expected to find them; pass ``strict=False`` to run the
    attack anyway and see the leak.
    """
    tab: TableauBcs = prover.tab
    if strict and (tab.rows < RECOMMENDED_ROWS or tab.degree < RECOMMENDED_DEGREE):
        raise ParamsTooSmall(
            f"rows={tab.rows}, degree={tab.degree} is below the "
            f"({RECOMMENDED_ROWS}, {RECOMMENDED_DEGREE}) floor"
        )
    if pairs is None:
        pairs = _auto_pairs(tab)
    violations = []
    seen: dict[frozenset, float] = {}
    for probe in pairs:
        (q1, q2), (q3, q4) = probe
        union: set[int] = set()
        for q in (q1, q2, q3, q4):
            union.update(_exposed_copies(tab, q))
        subset = tuple(sorted(union))
        if not subset:
            continue
        key = frozenset(subset)
        if key in seen:
            tv = seen[key]
        else:
            dist: CountDistribution = prover.subset_distribution(subset)
            tv = statistical_distance(dist, uniform_distribution(len(subset)))
            seen[key] = tv
        if tv > 0.0:
            per_var: dict[int, int] = {}
            for c in subset:
                per_var[c // tab.degree] = per_var.get(c // tab.degree, 0) + 1
            covered = tuple(
                v for v, n in sorted(per_var.items()) if n >= tab.degree
            )
            violations.append(ProbeViolation(probe, covered, subset, tv))
    return ProbeReport(
        rows=tab.rows,
        degree=tab.degree,
        pairs_checked=len(pairs),
        violations=tuple(violations),
    )
