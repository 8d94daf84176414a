"""Honest-prover samplers, zero-knowledge simulators, and exact comparisons.

The honest tableau prover draws a fresh latent assignment every round
(copy shares conditioned on the witness, randomizers uniform, cells
derived) and answers any question by restriction.  The simulator answers
the same questions without a witness.  Whether those two agree is the
whole point, so this module carries three independent ways to compute a
question's answer distribution:

1. ``raw_latent_distribution`` enumerates the latent space outright.  It
   is the ground truth and is deliberately structure-blind, which caps it
   at questions whose relevant randomizer blocks number three or fewer.
2. ``honest_exact_distribution`` derives the same distribution from the
   witness by integrating out the randomizers analytically.  Tests pin it
   to the raw enumeration where both run.
3. ``sim_tableau_question`` is the witness-free simulator rule set.

Distributions over answer tuples are held as integer counts over packed
sign vectors (:class:`CountDistribution`) so total-variation distances
are exact; a zero is a real zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from statistics import NormalDist
from typing import TYPE_CHECKING, Callable, Mapping, Protocol, Sequence

import numpy as np

from . import s5
from .bcs import Bcs, signs_from_rank
from .errors import (
    NotAWitness,
    NotOblivious,
    SpaceMismatch,
    TooLarge,
    UnknownQuestion,
)
from .tableau import TableauBcs, extend_witness

if TYPE_CHECKING:
    from .games import Game

Question = object
Answer = object
QuestionPair = tuple[Question, Question]
AnswerPair = tuple[Answer, Answer]

#: Returned in place of an answer when a simulator has no rule for a question.
DECLINED = "declined"

MAX_RAW_STATES = 8_000_000
MAX_FIBER_STATES = 4096
MAX_KEY_BITS = 62
MAX_MAPPING_SUPPORT = 200_000
CHI2_SIGNIFICANCE = 1e-4


class AnswerSampler(Protocol):
    """Joint answer source for question pairs.

    ``sample`` must answer both questions from one coherent round (shared
    latent state, shared strategy, ...), and may return :data:`DECLINED`
    in either slot.  ``exact_distribution`` is optional in spirit;
    implementations either return the full pair distribution as a mapping
    or raise ``TooLarge``.
    """

    def sample(self, pair: QuestionPair, rng) -> AnswerPair: ...

    def exact_distribution(self, pair: QuestionPair) -> Mapping[AnswerPair, Fraction]: ...


# ---------------------------------------------------------------------------
# Packed exact distributions


def pack_signs(signs: Sequence[int]) -> int:
    key = 0
    for j, s in enumerate(signs):
        if s == +1:
            key |= 1 << j
        elif s != -1:
            raise ValueError(f"signs must be +1 or -1, got {s!r}")
    return key


def unpack_signs(key: int, width: int) -> tuple[int, ...]:
    return tuple(+1 if (key >> j) & 1 else -1 for j in range(width))


class CountDistribution:
    """Exact distribution as integer counts over packed sign tuples.

    ``keys`` are sorted, unique, and hold the packed outcomes; weights are
    ``counts / total``.  Totals from different constructions need not
    match; comparisons cross-multiply.
    """

    __slots__ = ("keys", "counts", "total", "width", "_cum")

    def __init__(self, keys, counts, width: int) -> None:
        if width > MAX_KEY_BITS:
            raise TooLarge(f"{width}-bit outcomes overflow the packing")
        keys = np.asarray(keys, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        if keys.shape != counts.shape:
            raise ValueError("keys and counts differ in length")
        uniq, inverse = np.unique(keys, return_inverse=True)
        agg = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(agg, inverse, counts)
        keep = agg > 0
        self.keys = uniq[keep]
        self.counts = agg[keep]
        self.total = int(self.counts.sum())
        self.width = width
        self._cum = None
        if self.total <= 0:
            raise ValueError("distribution has no mass")

    def __len__(self) -> int:
        return len(self.keys)

    def probability(self, key: int) -> Fraction:
        pos = int(np.searchsorted(self.keys, key))
        if pos < len(self.keys) and int(self.keys[pos]) == key:
            return Fraction(int(self.counts[pos]), self.total)
        return Fraction(0)

    def project(self, positions: Sequence[int]) -> "CountDistribution":
        """Marginal onto the given bit positions, re-packed in their order."""
        new = np.zeros(len(self.keys), dtype=np.int64)
        for j, pos in enumerate(positions):
            new |= ((self.keys >> pos) & 1) << j
        return CountDistribution(new, self.counts, len(positions))

    def sample_key(self, rng) -> int:
        if self._cum is None:
            self._cum = np.cumsum(self.counts)
        r = rng.randrange(self.total)
        return int(self.keys[int(np.searchsorted(self._cum, r, side="right"))])

    def sample_signs(self, rng) -> tuple[int, ...]:
        return unpack_signs(self.sample_key(rng), self.width)

    def as_mapping(self) -> dict[tuple[int, ...], Fraction]:
        if len(self.keys) > MAX_MAPPING_SUPPORT:
            raise TooLarge(f"{len(self.keys)} outcomes is too many to unpack")
        return {
            unpack_signs(int(k), self.width): Fraction(int(c), self.total)
            for k, c in zip(self.keys, self.counts)
        }


def uniform_distribution(width: int) -> CountDistribution:
    if width > 24:
        raise TooLarge(f"uniform reference over {width} bits is too large")
    return CountDistribution(
        np.arange(1 << width, dtype=np.int64),
        np.ones(1 << width, dtype=np.int64),
        width,
    )


def _tv_counts(p: CountDistribution, q: CountDistribution) -> float:
    if p.width != q.width:
        raise SpaceMismatch(f"outcome widths differ: {p.width} vs {q.width}")
    if p is q:
        return 0.0
    if p.total > 1 << 31 or q.total > 1 << 31:
        raise TooLarge("totals too large for exact cross-multiplication")
    keys = np.union1d(p.keys, q.keys)
    c1 = np.zeros(len(keys), dtype=np.int64)
    c1[np.searchsorted(keys, p.keys)] = p.counts
    c2 = np.zeros(len(keys), dtype=np.int64)
    c2[np.searchsorted(keys, q.keys)] = q.counts
    diff = c1 * q.total - c2 * p.total
    if not diff.any():
        return 0.0
    return float(np.abs(diff.astype(np.float64)).sum() / (2.0 * p.total * q.total))


def statistical_distance(p, q) -> float:
    """Total variation distance between two distributions.

    Accepts two :class:`CountDistribution` over the same width, or two
    mappings from outcome to weight (sequences are read as mappings from
    index to weight).  Mixing representations raises ``SpaceMismatch``.
    """
    if isinstance(p, CountDistribution) != isinstance(q, CountDistribution):
        raise SpaceMismatch("cannot compare packed and unpacked distributions")
    if isinstance(p, CountDistribution):
        return _tv_counts(p, q)
    if not isinstance(p, Mapping):
        p = dict(enumerate(p))
    if not isinstance(q, Mapping):
        q = dict(enumerate(q))
    keys = set(p) | set(q)
    exact = all(
        isinstance(d.get(k, 0), (int, Fraction)) for d in (p, q) for k in keys
    )
    half = Fraction(1, 2) if exact else 0.5
    dist = half * sum(abs(p.get(k, 0) - q.get(k, 0)) for k in keys)
    return float(dist)


# ---------------------------------------------------------------------------
# Copy fibers

COPY_QUESTION_KINDS = ("con", "var", "subset")


@lru_cache(maxsize=None)
def _fiber(degree: int, value: int) -> tuple[tuple[int, ...], ...]:
    """All degree-long sign tuples whose product is ``value``."""
    if degree < 1:
        raise ValueError("degree must be positive")
    if 1 << (degree - 1) > MAX_FIBER_STATES:
        raise TooLarge(f"fiber of degree {degree} is too large to enumerate")
    out = []
    for free in product((+1, -1), repeat=degree - 1):
        prod_free = math.prod(free)
        out.append(free + (value * prod_free,))
    return tuple(out)


def fiber_subset_distribution(
    witness: Sequence[int], degree: int, copy_ids: Sequence[int]
) -> CountDistribution:
    """Exact joint of the given copies under honest share-splitting.

    Copy ``c`` belongs to underlying variable ``c // degree``; the shares
    of one variable multiply to its witness value and are otherwise
    uniform, independently across variables.
    """
    width = len(copy_ids)
    groups: dict[int, list[int]] = {}
    for pos, c in enumerate(copy_ids):
        groups.setdefault(c // degree, []).append(pos)
    keys = np.zeros(1, dtype=np.int64)
    counts = np.ones(1, dtype=np.int64)
    for v, positions in groups.items():
        fiber = _fiber(degree, witness[v])
        sub_keys = []
        for shares in fiber:
            key = 0
            for pos in positions:
                offset = copy_ids[pos] % degree
                if shares[offset] == +1:
                    key |= 1 << pos
            sub_keys.append(key)
        sub = CountDistribution(sub_keys, np.ones(len(sub_keys), np.int64), width)
        if len(keys) * len(sub.keys) > MAX_RAW_STATES:
            raise TooLarge("subset joint support too large to enumerate")
        keys = (keys[:, None] | sub.keys[None, :]).ravel()
        counts = (counts[:, None] * sub.counts[None, :]).ravel()
    return CountDistribution(keys, counts, width)


def _copy_value_lookup(
    tab: TableauBcs, witness: Sequence[int]
) -> Callable[[tuple[int, ...], int], int]:
    """Map (fiber assignment per variable, copy id) to the copy's sign."""

    def value(shares_by_var: Mapping[int, tuple[int, ...]], copy_id: int) -> int:
        return shares_by_var[copy_id // tab.degree][copy_id % tab.degree]

    return value


# ---------------------------------------------------------------------------
# Raw latent enumeration (ground truth)


def _question_scope(tab: TableauBcs, question) -> tuple[int, ...]:
    if not (isinstance(question, tuple) and len(question) == 2):
        raise UnknownQuestion(f"unrecognized question {question!r}")
    kind, payload = question
    if kind == "con":
        return tab.system.constraints[payload].scope
    if kind == "var":
        return (payload,)
    if kind == "subset":
        return tuple(payload)
    raise UnknownQuestion(f"unrecognized question {question!r}")


def raw_latent_distribution(
    tab: TableauBcs, witness: Sequence[int], question
) -> CountDistribution:
    """Honest answer distribution by brute-force latent enumeration.

    Enumerates every joint value of the copy shares and randomizer blocks
    the question's scope can see (independent blocks integrate out, which
    is the only shortcut taken), derives the cells, and counts packed
    answers.  Raises ``TooLarge`` past :data:`MAX_RAW_STATES` states; in
    practice that means at most three relevant randomizer blocks.
    """
    scope = _question_scope(tab, question)
    kinds = [tab.variable_kind(v) for v in scope]

    blocks: set[tuple[int, int, int]] = set()  # (i, j, c) randomizer blocks
    pin_columns: set[tuple[int, int]] = set()  # (i, q) pins feeding cells
    fiber_vars: set[int] = set()
    for kind in kinds:
        if kind[0] == "copy":
            fiber_vars.add(kind[1] // tab.degree)
        elif kind[0] == "rand":
            _, i, j, c, _ = kind
            blocks.add((i, j, c))
        else:
            _, i, p, q, _ = kind
            d = len(tab.programs[i])
            pin_columns.add((i, q))
            for j in range(1, p):
                for cc in (q - 1, q):
                    if 1 <= cc <= d - 1:
                        blocks.add((i, j, cc))
    for i, q in pin_columns:
        fiber_vars.add(tab.pin_copy(i, q) // tab.degree)

    fibers = {v: _fiber(tab.degree, witness[v]) for v in sorted(fiber_vars)}
    fiber_count = math.prod(len(f) for f in fibers.values()) if fibers else 1
    grid = 120 ** len(blocks)
    if fiber_count * grid > MAX_RAW_STATES:
        raise TooLarge(
            f"{fiber_count * grid} latent states exceed {MAX_RAW_STATES}"
        )

    block_order = sorted(blocks)
    flat = np.arange(grid, dtype=np.int64)
    ranks = {
        block: (flat // (120**t)) % 120 for t, block in enumerate(block_order)
    }

    def level(i: int, p: int, c: int):
        # product of r(i, j, c) over j < p; columns 0 and d are identity
        d = len(tab.programs[i])
        if c < 1 or c > d - 1:
            return np.int64(0)
        acc = np.zeros(grid, dtype=np.int64)
        for j in range(1, p):
            acc = s5.MUL[acc, ranks[i, j, c]].astype(np.int64)
        return acc

    all_keys = []
    vars_sorted = sorted(fibers)
    for combo in product(*(fibers[v] for v in vars_sorted)):
        shares = dict(zip(vars_sorted, combo))
        key = np.zeros(grid, dtype=np.int64)
        level_cache: dict[tuple[int, int, int], np.ndarray] = {}
        for pos, (var, kind) in enumerate(zip(scope, kinds)):
            if kind[0] == "copy":
                if shares[kind[1] // tab.degree][kind[1] % tab.degree] == +1:
                    key |= np.int64(1 << pos)
                continue
            if kind[0] == "rand":
                _, i, j, c, b = kind
                key |= ((ranks[i, j, c] >> b) & 1) << pos
                continue
            _, i, p, q, b = kind
            if (i, p, q) not in level_cache:
                copy = tab.pin_copy(i, q)
                pin = tab.programs[i].instructions[q - 1].output(
                    shares[copy // tab.degree][copy % tab.degree]
                )
                left = level(i, p, q - 1)
                right = level(i, p, q)
                cell = s5.MUL[s5.MUL[s5.INV[left], pin], right].astype(np.int64)
                level_cache[i, p, q] = cell
            key |= ((level_cache[i, p, q] >> b) & 1) << pos
        all_keys.append(key)
    keys = np.concatenate(all_keys)
    return CountDistribution(keys, np.ones(len(keys), np.int64), len(scope))


# ---------------------------------------------------------------------------
# Structured exact marginals

_S5_RANGE = np.arange(120, dtype=np.int64)


@lru_cache(maxsize=None)
def _bit_counts(bit: int) -> tuple[int, int]:
    """(# ranks with bit set, # without) over the 120 permutations."""
    set_count = sum(1 for r in range(120) if (r >> bit) & 1)
    return set_count, 120 - set_count


def _block_bit_distribution(bit: int) -> CountDistribution:
    plus, minus = _bit_counts(bit)
    return CountDistribution([1, 0], [plus, minus], 1)


def _two_point_bit_distribution(
    pin_plus: int, pin_minus: int, w_plus: int, w_minus: int, bit: int
) -> CountDistribution:
    keys = [(pin_plus >> bit) & 1, (pin_minus >> bit) & 1]
    return CountDistribution(keys, [w_plus, w_minus], 1)


@lru_cache(maxsize=None)
def _uniform_prop_distribution(left: bool, right: bool) -> CountDistribution:
    """Joint of (cell, next cell, present randomizers) from a uniform cell."""
    axes = 1 + left + right
    grids = np.meshgrid(*([_S5_RANGE] * axes), indexing="ij")
    t = grids[0].ravel()
    ra = grids[1].ravel() if left else np.int64(0)
    rb = grids[-1].ravel() if right else np.int64(0)
    t2 = s5.MUL[s5.MUL[s5.INV[ra], t], rb].astype(np.int64)
    key = t | (t2 << 7)
    shift = 14
    if left:
        key = key | (grids[1].ravel() << shift)
        shift += 7
    if right:
        key = key | (grids[-1].ravel() << shift)
        shift += 7
    return CountDistribution(key, np.ones(len(key), np.int64), shift)


@lru_cache(maxsize=None)
def _pinned_prop_distribution(
    pin_plus: int,
    pin_minus: int,
    w_plus: int,
    w_minus: int,
    left: bool,
    right: bool,
) -> CountDistribution:
    keys, counts = [], []
    randomizers = [(0, 0)]
    if left and right:
        randomizers = [(a, b) for a in range(120) for b in range(120)]
    elif left:
        randomizers = [(a, 0) for a in range(120)]
    elif right:
        randomizers = [(0, b) for b in range(120)]
    for t, w in ((pin_plus, w_plus), (pin_minus, w_minus)):
        if w == 0:
            continue
        for ra, rb in randomizers:
            t2 = s5.word(s5.inv(ra), t, rb)
            key = t | (t2 << 7)
            shift = 14
            if left:
                key |= ra << shift
                shift += 7
            if right:
                key |= rb << shift
                shift += 7
            keys.append(key)
            counts.append(w)
    width = 14 + 7 * (left + right)
    return CountDistribution(keys, counts, width)


@lru_cache(maxsize=None)
def _chain_product_distribution(
    pin_tuples: tuple[tuple[int, ...], ...], weights: tuple[int, ...]
) -> CountDistribution:
    """Joint of the last tableau row by integrating the level products.

    Each pin tuple is one fiber element's per-column pin; the level
    products between columns are uniform and independent, so the row is
    the telescoped image of a uniform grid.
    """
    d = len(pin_tuples[0])
    if 120 ** (d - 1) * len(pin_tuples) > MAX_RAW_STATES:
        raise TooLarge(f"product clause of width {d} is too large to enumerate")
    grids = [np.int64(0)]
    if d > 1:
        mesh = np.meshgrid(*([_S5_RANGE] * (d - 1)), indexing="ij")
        grids = [m.ravel() for m in mesh]
    all_keys, all_counts = [], []
    for pins, w in zip(pin_tuples, weights):
        key = None
        prev = np.int64(0)
        for q in range(d):
            nxt = grids[q] if q < d - 1 else np.int64(0)
            cell = s5.MUL[s5.MUL[s5.INV[prev], pins[q]], nxt].astype(np.int64)
            cell = cell << (7 * q)
            key = cell if key is None else key | cell
            prev = nxt
        key = np.broadcast_to(key, grids[0].shape if d > 1 else (1,)).ravel()
        all_keys.append(key)
        all_counts.append(np.full(len(key), w, dtype=np.int64))
    return CountDistribution(
        np.concatenate(all_keys), np.concatenate(all_counts), 7 * d
    )


@lru_cache(maxsize=None)
def _free_product_distribution(output: int, d: int) -> CountDistribution:
    """Uniform over d-tuples of permutations multiplying to ``output``."""
    if 120 ** (d - 1) > MAX_RAW_STATES:
        raise TooLarge(f"product clause of width {d} is too large to enumerate")
    if d == 1:
        return CountDistribution([output], [1], 7)
    mesh = np.meshgrid(*([_S5_RANGE] * (d - 1)), indexing="ij")
    grids = [m.ravel() for m in mesh]
    key = np.zeros(len(grids[0]), dtype=np.int64)
    fold = np.int64(0)
    for q, g in enumerate(grids):
        key |= g << (7 * q)
        fold = s5.MUL[fold, g].astype(np.int64)
    last = s5.MUL[s5.INV[fold], output].astype(np.int64)
    key |= last << (7 * (d - 1))
    return CountDistribution(key, np.ones(len(key), np.int64), 7 * d)


def _cell_block_points(
    tab: TableauBcs, i: int, q: int, witness: Sequence[int] | None
) -> tuple[int, int, int, int]:
    """(pin on +1, pin on -1, weight of +1, weight of -1) for column q.

    Witness-free callers pass None and get the symmetric two-point rule;
    honest callers get the copy's fiber marginal, which collapses to a
    point when the obliviation degree is 1.
    """
    instr = tab.programs[i].instructions[q - 1]
    if witness is None or tab.degree > 1:
        return instr.on_true, instr.on_false, 1, 1
    value = witness[tab.pin_copy(i, q)]
    return instr.on_true, instr.on_false, int(value == +1), int(value == -1)


def _constraint_distribution(
    tab: TableauBcs, ci: int, witness: Sequence[int] | None
) -> CountDistribution:
    tag = tab.clause_tags[ci]
    if tag[0] == "pin":
        _, i, q = tag
        pp, pm, wp, wm = _cell_block_points(tab, i, q, witness)
        keys = [pp | (1 << 7), pm]
        return CountDistribution(keys, [wp, wm], 8)
    if tag[0] == "prop":
        _, i, p, q = tag
        d = len(tab.programs[i])
        left, right = q >= 2, q <= d - 1
        if p == 1 or d == 1:
            pp, pm, wp, wm = _cell_block_points(tab, i, q, witness)
            return _pinned_prop_distribution(pp, pm, wp, wm, left, right)
        return _uniform_prop_distribution(left, right)
    if tag[0] == "prod":
        (_, i) = tag
        prog = tab.programs[i]
        d = len(prog)
        if witness is None:
            return _free_product_distribution(prog.output, d)
        base_scope = tab.base.constraints[i].scope
        vars_needed = sorted({c // tab.degree for c in base_scope})
        fibers = [_fiber(tab.degree, witness[v]) for v in vars_needed]
        if math.prod(len(f) for f in fibers) > MAX_FIBER_STATES:
            raise TooLarge("constraint fiber too large to enumerate")
        pin_tuples = []
        for combo in product(*fibers):
            shares = dict(zip(vars_needed, combo))
            pins = tuple(
                prog.instructions[q].output(
                    shares[base_scope[prog.instructions[q].var] // tab.degree][
                        base_scope[prog.instructions[q].var] % tab.degree
                    ]
                )
                for q in range(d)
            )
            pin_tuples.append(pins)
        return _chain_product_distribution(
            tuple(pin_tuples), (1,) * len(pin_tuples)
        )
    if tag[0] == "pair":
        _, v1, v2 = tag
        if witness is None:
            return uniform_distribution(2)
        return fiber_subset_distribution(witness, tab.degree, (v1, v2))
    raise UnknownQuestion(f"unrecognized clause tag {tag!r}")


def _variable_distribution(
    tab: TableauBcs, v: int, witness: Sequence[int] | None
) -> CountDistribution:
    kind = tab.variable_kind(v)
    if kind[0] == "copy":
        if witness is None or tab.degree > 1:
            return uniform_distribution(1)
        return CountDistribution([int(witness[kind[1]] == +1)], [1], 1)
    if kind[0] == "rand":
        return _block_bit_distribution(kind[4])
    _, i, p, q, b = kind
    d = len(tab.programs[i])
    if p == 1 or d == 1:
        pp, pm, wp, wm = _cell_block_points(tab, i, q, witness)
        return _two_point_bit_distribution(pp, pm, wp, wm, b)
    return _block_bit_distribution(b)


def _exact_distribution(
    tab: TableauBcs, question, witness: Sequence[int] | None
) -> CountDistribution:
    if not (isinstance(question, tuple) and len(question) == 2):
        raise UnknownQuestion(f"unrecognized question {question!r}")
    kind, payload = question
    if kind == "con":
        return _constraint_distribution(tab, payload, witness)
    if kind == "var":
        return _variable_distribution(tab, payload, witness)
    if kind == "subset":
        ids = tuple(payload)
        for v in ids:
            if tab.variable_kind(v)[0] != "copy":
                raise NotOblivious(f"variable {v} is not an oblivious copy")
        if witness is None:
            return uniform_distribution(len(ids))
        return fiber_subset_distribution(witness, tab.degree, ids)
    raise UnknownQuestion(f"unrecognized question {question!r}")


def honest_exact_distribution(
    tab: TableauBcs, witness: Sequence[int], question
) -> CountDistribution:
    """Exact honest-prover answer distribution for one question.

    ``witness`` assigns the underlying variables (pre-obliviation).  The
    derivation integrates the uniform randomizers out analytically; the
    raw enumeration oracle exists to check exactly that step.
    """
    return _exact_distribution(tab, question, tuple(witness))


def sim_tableau_question(tab: TableauBcs, question) -> CountDistribution:
    """Witness-free simulator distribution for one question.

    Rules: propagation clauses draw the upper cell from its marginal (two
    point in row 1 or in width-1 columns, else uniform), the randomizers
    uniform, and derive the lower cell; pin clauses draw the copy fairly;
    product clauses are uniform over words multiplying to the program
    output; copies and sub-degree copy subsets are fair coins.
    """
    return _exact_distribution(tab, question, None)


def randomizer_clause_questions(tab: TableauBcs) -> list[tuple[str, int]]:
    """Clause questions whose scope includes at least one randomizer."""
    out = []
    for ci, tag in enumerate(tab.clause_tags):
        if tag[0] == "prop" and len(tab.programs[tag[1]]) >= 2:
            out.append(("con", ci))
    return out


# ---------------------------------------------------------------------------
# Samplers


def _underlying_witness_ok(tab: TableauBcs, witness: Sequence[int]) -> bool:
    if len(witness) != tab.underlying_vars:
        return False
    copies = []
    for v in range(tab.underlying_vars):
        copies.extend([1] * (tab.degree - 1) + [witness[v]])
    return tab.base.satisfied(copies)


class HonestTableauSampler:
    """Witness-backed prover pair for a tableau CV game.

    Each round draws one latent assignment (fresh shares, fresh
    randomizers, derived cells) and answers both questions by
    restriction, so paired answers are automatically consistent.  Also
    answers ("subset", ids) probe questions over copy variables.
    """

    def __init__(self, tab: TableauBcs, witness: Sequence[int]) -> None:
        if not _underlying_witness_ok(tab, witness):
            raise NotAWitness("assignment does not satisfy the underlying system")
        self.tab = tab
        self.witness = tuple(witness)

    def _draw_latent(self, rng) -> list[int]:
        tab = self.tab
        copies = []
        for v in range(tab.underlying_vars):
            free = [rng.choice((-1, 1)) for _ in range(tab.degree - 1)]
            copies.extend(free + [self.witness[v] * math.prod(free, start=1)])
        randomizers = {}
        for i, prog in enumerate(tab.programs):
            for j in range(1, tab.rows):
                for c in range(1, len(prog)):
                    randomizers[i, j, c] = rng.randrange(120)
        return extend_witness(tab, copies, randomizers)

    def _restrict(self, values: Sequence[int], question):
        kind, payload = question
        if kind == "var":
            return values[payload]
        return tuple(values[v] for v in _question_scope(self.tab, question))

    def sample(self, pair: QuestionPair, rng) -> AnswerPair:
        values = self._draw_latent(rng)
        return self._restrict(values, pair[0]), self._restrict(values, pair[1])

    def question_distribution(self, question) -> CountDistribution:
        return honest_exact_distribution(self.tab, self.witness, question)

    def subset_distribution(self, ids: Sequence[int]) -> CountDistribution:
        return self.question_distribution(("subset", tuple(ids)))

    def exact_distribution(self, pair: QuestionPair) -> dict[AnswerPair, Fraction]:
        q1, q2 = pair
        joint = self._joint_scope_distribution(q1, q2)
        out: dict[AnswerPair, Fraction] = {}
        w1 = len(_question_scope(self.tab, q1))
        for signs, weight in joint.as_mapping().items():
            a1 = self._shape(q1, signs[:w1])
            a2 = self._shape(q2, signs[w1:])
            out[a1, a2] = out.get((a1, a2), Fraction(0)) + weight
        return out

    def _shape(self, question, signs: tuple[int, ...]):
        return signs[0] if question[0] == "var" else tuple(signs)

    def _joint_scope_distribution(self, q1, q2) -> CountDistribution:
        tab = self.tab
        s1 = _question_scope(tab, q1)
        s2 = _question_scope(tab, q2)
        union = s1 + s2
        kinds = {tab.variable_kind(v)[0] for v in union}
        if kinds <= {"copy"}:
            return fiber_subset_distribution(self.witness, tab.degree, union)
        if set(s2) <= set(s1):
            base = self.question_distribution(q1)
            pos = {v: j for j, v in enumerate(s1)}
            return base.project(list(range(len(s1))) + [pos[v] for v in s2])
        if set(s1) <= set(s2):
            base = self.question_distribution(q2)
            pos = {v: j for j, v in enumerate(s2)}
            return base.project([pos[v] for v in s1] + list(range(len(s2))))
        return raw_latent_distribution(tab, self.witness, ("subset", union))


def honest_tableau_sampler(
    tab: TableauBcs, witness: Sequence[int]
) -> HonestTableauSampler:
    """The honest prover pair; raises ``NotAWitness`` on a bad assignment."""
    return HonestTableauSampler(tab, witness)


class TableauSimulator:
    """Witness-free sampler following the simulator rules.

    Support pairs of the tableau CV game (a clause with itself, a clause
    with one of its variables, a variable with itself) are answered from
    one draw of the larger question; anything needing cross-clause
    consistency is declined.
    """

    def __init__(self, tab: TableauBcs) -> None:
        self.tab = tab

    def question_distribution(self, question) -> CountDistribution:
        return sim_tableau_question(self.tab, question)

    def subset_distribution(self, ids: Sequence[int]) -> CountDistribution:
        return self.question_distribution(("subset", tuple(ids)))

    def _draw(self, question, rng):
        # Product clauses can be wider than any enumerable distribution,
        # but drawing from the free-word rule is easy at every width:
        # uniform prefix, forced last factor.  Everything else is small
        # and cached, so sampling the exact distribution is fine.
        kind, payload = question
        if kind == "con" and self.tab.clause_tags[payload][0] == "prod":
            prog = self.tab.programs[self.tab.clause_tags[payload][1]]
            d = len(prog)
            signs: list[int] = []
            fold = s5.IDENTITY
            for _ in range(d - 1):
                g = rng.randrange(120)
                signs.extend(signs_from_rank(g, 7))
                fold = s5.mul(fold, g)
            signs.extend(signs_from_rank(s5.mul(s5.inv(fold), prog.output), 7))
            return tuple(signs)
        signs = self.question_distribution(question).sample_signs(rng)
        return signs[0] if kind == "var" else signs

    def sample(self, pair: QuestionPair, rng) -> AnswerPair:
        q1, q2 = pair
        if q1 == q2:
            a = self._draw(q1, rng)
            return a, a
        for big, small, flip in ((q1, q2, False), (q2, q1, True)):
            if big[0] == "con" and small[0] == "var":
                scope = _question_scope(self.tab, big)
                if small[1] in scope:
                    a = self._draw(big, rng)
                    b = a[scope.index(small[1])]
                    return (b, a) if flip else (a, b)
        return DECLINED, DECLINED

    def exact_distribution(self, pair: QuestionPair) -> dict[AnswerPair, Fraction]:
        q1, q2 = pair
        if q1 == q2:
            dist = self.question_distribution(q1)
            return {
                (self._shape(q1, s), self._shape(q1, s)): w
                for s, w in dist.as_mapping().items()
            }
        for big, small, flip in ((q1, q2, False), (q2, q1, True)):
            if big[0] == "con" and small[0] == "var":
                scope = _question_scope(self.tab, big)
                if small[1] in scope:
                    pos = scope.index(small[1])
                    dist = self.question_distribution(big)
                    out: dict[AnswerPair, Fraction] = {}
                    for s, w in dist.as_mapping().items():
                        a, b = tuple(s), s[pos]
                        kk = (b, a) if flip else (a, b)
                        out[kk] = out.get(kk, Fraction(0)) + w
                    return out
        raise UnknownQuestion(f"simulator declines pair {pair!r}")

    def _shape(self, question, signs):
        return signs[0] if question[0] == "var" else tuple(signs)


# ---------------------------------------------------------------------------
# Samplers for plain BCS games and the simulator combinators


class HonestCcSampler:
    """Deterministic witness prover over a plain constraint system.

    Answers constraint questions with the witness restricted to the
    scope and variable questions with the witness value, so it serves
    both the constraint-pair game and the constraint-variable game.
    """

    def __init__(self, bcs: Bcs, witness: Sequence[int]) -> None:
        if not bcs.satisfied(witness):
            raise NotAWitness("assignment does not satisfy the system")
        self.bcs = bcs
        self.witness = tuple(witness)

    def _answer(self, question):
        kind, i = question
        if kind == "var":
            return self.witness[i]
        if kind != "con":
            raise UnknownQuestion(f"no honest answer rule for {question!r}")
        return tuple(self.witness[v] for v in self.bcs.constraints[i].scope)

    def sample(self, pair: QuestionPair, rng) -> AnswerPair:
        return self._answer(pair[0]), self._answer(pair[1])

    def exact_distribution(self, pair: QuestionPair) -> dict[AnswerPair, Fraction]:
        return {(self._answer(pair[0]), self._answer(pair[1])): Fraction(1)}


class HonestObliviousSampler:
    """Share-resampling witness prover for a product-lifted system.

    Every round draws fresh copy shares: each underlying variable's
    copies come uniformly from the fiber multiplying to its witness
    value, independently across variables.  Full copy groups therefore
    reproduce witness products while any subset missing a copy from each
    group looks exactly uniform, which is the obliviousness promise the
    lift exists for.  Copy ids must follow the var-major layout of
    :func:`bcsgames.tableau.obliviate`.
    """

    def __init__(self, lifted: Bcs, witness: Sequence[int], degree: int) -> None:
        if degree < 1 or lifted.num_vars % degree != 0:
            raise ValueError(
                f"{lifted.num_vars} variables do not split into groups of {degree}"
            )
        if len(witness) != lifted.num_vars // degree:
            raise ValueError(
                f"witness has {len(witness)} values for "
                f"{lifted.num_vars // degree} underlying variables"
            )
        probe: list[int] = []
        for value in witness:
            probe.extend([1] * (degree - 1) + [value])
        if not lifted.satisfied(probe):
            raise NotAWitness("assignment does not satisfy the underlying system")
        self.bcs = lifted
        self.degree = degree
        self.witness = tuple(witness)

    def _scope(self, question) -> tuple[int, ...]:
        kind, payload = question
        if kind == "con":
            return self.bcs.constraints[payload].scope
        if kind == "var":
            return (payload,)
        if kind == "subset":
            return tuple(payload)
        raise UnknownQuestion(f"no honest answer rule for {question!r}")

    def _shape(self, question, signs):
        return signs[0] if question[0] == "var" else tuple(signs)

    def subset_distribution(self, ids: Sequence[int]) -> CountDistribution:
        return fiber_subset_distribution(self.witness, self.degree, tuple(ids))

    def question_distribution(self, question) -> CountDistribution:
        return self.subset_distribution(self._scope(question))

    def sample(self, pair: QuestionPair, rng) -> AnswerPair:
        shares: list[int] = []
        for value in self.witness:
            shares.extend(rng.choice(_fiber(self.degree, value)))
        out = []
        for question in pair:
            signs = tuple(shares[v] for v in self._scope(question))
            out.append(self._shape(question, signs))
        return out[0], out[1]

    def exact_distribution(self, pair: QuestionPair) -> dict[AnswerPair, Fraction]:
        q1, q2 = pair
        s1, s2 = self._scope(q1), self._scope(q2)
        joint = self.subset_distribution(s1 + s2)
        out: dict[AnswerPair, Fraction] = {}
        for signs, weight in joint.as_mapping().items():
            a1 = self._shape(q1, signs[: len(s1)])
            a2 = self._shape(q2, signs[len(s1) :])
            out[a1, a2] = out.get((a1, a2), Fraction(0)) + weight
        return out


class _CvFromCc:
    def __init__(self, base: AnswerSampler, bcs: Bcs) -> None:
        self.base = base
        self.bcs = bcs
        self._incident = {}
        for i, c in enumerate(bcs.constraints):
            for v in c.scope:
                self._incident.setdefault(v, []).append(i)

    def _project(self, answer, i: int, v: int):
        return answer[self.bcs.constraints[i].scope.index(v)]

    def sample(self, pair: QuestionPair, rng) -> AnswerPair:
        (k1, p1), (k2, p2) = pair
        m = len(self.bcs.constraints)
        if (k1, p1) == (k2, p2):
            if k1 == "con":
                a, _ = self.base.sample((pair[0], ("con", rng.randrange(m))), rng)
                return a, a
            i = rng.choice(self._incident[p1])
            a, _ = self.base.sample((("con", i), ("con", rng.randrange(m))), rng)
            val = self._project(a, i, p1)
            return val, val
        if k1 == "con" and k2 == "con":
            return self.base.sample(pair, rng)
        if k1 == "con" and k2 == "var" and p2 in self.bcs.constraints[p1].scope:
            a, _ = self.base.sample((pair[0], ("con", rng.randrange(m))), rng)
            return a, self._project(a, p1, p2)
        if k1 == "var" and k2 == "con" and p1 in self.bcs.constraints[p2].scope:
            _, b = self.base.sample((("con", rng.randrange(m)), pair[1]), rng)
            return self._project(b, p2, p1), b
        return DECLINED, DECLINED

    def exact_distribution(self, pair: QuestionPair) -> dict[AnswerPair, Fraction]:
        (k1, p1), (k2, p2) = pair
        m = len(self.bcs.constraints)
        out: dict[AnswerPair, Fraction] = {}

        def add(key, w):
            out[key] = out.get(key, Fraction(0)) + w

        if (k1, p1) == (k2, p2):
            if k1 == "con":
                for j in range(m):
                    base = self.base.exact_distribution((pair[0], ("con", j)))
                    for (a, _), w in base.items():
                        add((a, a), w / m)
            else:
                incident = self._incident[p1]
                for i in incident:
                    for j in range(m):
                        base = self.base.exact_distribution(
                            (("con", i), ("con", j))
                        )
                        for (a, _), w in base.items():
                            val = self._project(a, i, p1)
                            add((val, val), w / (m * len(incident)))
            return out
        if k1 == "con" and k2 == "con":
            return dict(self.base.exact_distribution(pair))
        if k1 == "con" and k2 == "var" and p2 in self.bcs.constraints[p1].scope:
            for j in range(m):
                base = self.base.exact_distribution((pair[0], ("con", j)))
                for (a, _), w in base.items():
                    add((a, self._project(a, p1, p2)), w / m)
            return out
        if k1 == "var" and k2 == "con" and p1 in self.bcs.constraints[p2].scope:
            for j in range(m):
                base = self.base.exact_distribution((("con", j), pair[1]))
                for (_, b), w in base.items():
                    add((self._project(b, p2, p1), b), w / m)
            return out
        raise UnknownQuestion(f"no rule for pair {pair!r}")


def sim_cv(base: AnswerSampler, bcs: Bcs) -> _CvFromCc:
    """Constraint-vs-variable sampler from a constraint-pair sampler.

    A variable question is answered by pairing it with a uniformly drawn
    constraint question, querying the base on the constraint pair, and
    projecting the owning constraint's answer onto the variable.
    """
    return _CvFromCc(base, bcs)


class _Oracularized:
    def __init__(self, base: AnswerSampler, mu: Mapping) -> None:
        self.base = base
        self.rows: dict[Question, list[tuple[Question, Fraction]]] = {}
        self.cols: dict[Question, list[tuple[Question, Fraction]]] = {}
        for (x, y), w in mu.items():
            if w > 0:
                self.rows.setdefault(x, []).append((y, w))
                self.cols.setdefault(y, []).append((x, w))

    def _partner(self, table, q, rng):
        options = table[q]
        total = sum(w for _, w in options)
        r = rng.random() * float(total)
        acc = 0.0
        for partner, w in options:
            acc += float(w)
            if r < acc:
                return partner
        return options[-1][0]

    def _single(self, question, rng):
        kind, payload = question
        if kind == "oracle":
            return self.base.sample(payload, rng)
        if kind == "a":
            y = self._partner(self.rows, payload, rng)
            a, _ = self.base.sample((payload, y), rng)
            return a
        if kind == "b":
            x = self._partner(self.cols, payload, rng)
            _, b = self.base.sample((x, payload), rng)
            return b
        raise UnknownQuestion(f"unrecognized question {question!r}")

    def sample(self, pair: QuestionPair, rng) -> AnswerPair:
        q1, q2 = pair
        if q1 == q2:
            a = self._single(q1, rng)
            return a, a
        for big, small, flip in ((q1, q2, False), (q2, q1, True)):
            if big[0] == "oracle" and small[0] in ("a", "b"):
                x, y = big[1]
                if small == ("a", x):
                    ab = self.base.sample((x, y), rng)
                    return (ab[0], ab) if flip else (ab, ab[0])
                if small == ("b", y):
                    ab = self.base.sample((x, y), rng)
                    return (ab[1], ab) if flip else (ab, ab[1])
        if q1[0] == "oracle" or q2[0] == "oracle":
            return DECLINED, DECLINED
        # two isolated questions: answer each by its own rule, independently
        return self._single(q1, rng), self._single(q2, rng)

    def _single_exact(self, question) -> dict:
        kind, payload = question
        if kind == "oracle":
            return dict(self.base.exact_distribution(payload))
        table, pick = (self.rows, 0) if kind == "a" else (self.cols, 1)
        options = table[payload]
        total = sum(w for _, w in options)
        out: dict = {}
        for partner, w in options:
            pair = (payload, partner) if kind == "a" else (partner, payload)
            for ab, ww in self.base.exact_distribution(pair).items():
                key = ab[pick]
                out[key] = out.get(key, Fraction(0)) + ww * w / total
        return out

    def exact_distribution(self, pair: QuestionPair) -> dict[AnswerPair, Fraction]:
        q1, q2 = pair
        if q1 == q2:
            return {(a, a): w for a, w in self._single_exact(q1).items()}
        for big, small, flip in ((q1, q2, False), (q2, q1, True)):
            if big[0] == "oracle" and small[0] in ("a", "b"):
                x, y = big[1]
                pick = 0 if small == ("a", x) else 1 if small == ("b", y) else None
                if pick is not None:
                    out: dict[AnswerPair, Fraction] = {}
                    for ab, w in self.base.exact_distribution((x, y)).items():
                        key = (ab[pick], ab) if flip else (ab, ab[pick])
                        out[key] = out.get(key, Fraction(0)) + w
                    return out
        if q1[0] == "oracle" or q2[0] == "oracle":
            raise UnknownQuestion(f"no rule for pair {pair!r}")
        d1, d2 = self._single_exact(q1), self._single_exact(q2)
        return {
            (a, b): w1 * w2 for a, w1 in d1.items() for b, w2 in d2.items()
        }


def sim_oracularized(base: AnswerSampler, mu: Mapping) -> _Oracularized:
    """Sampler for an oracularized game from a sampler for its base.

    Oracle questions get the base's joint answer; an isolated question
    samples its missing partner from the base distribution's conditional
    and projects.  Oracle pairs that would need cross-round consistency
    are declined.
    """
    return _Oracularized(base, mu)


class _Parallel:
    def __init__(self, base: AnswerSampler, rounds: int) -> None:
        if rounds < 1:
            raise ValueError("rounds must be positive")
        self.base = base
        self.rounds = rounds

    def sample(self, pair: QuestionPair, rng) -> AnswerPair:
        xs, ys = pair
        if len(xs) != self.rounds or len(ys) != self.rounds:
            raise UnknownQuestion(f"expected {self.rounds}-round questions")
        answers = [self.base.sample((x, y), rng) for x, y in zip(xs, ys)]
        if any(DECLINED in ab for ab in answers):
            return DECLINED, DECLINED
        return tuple(a for a, _ in answers), tuple(b for _, b in answers)

    def exact_distribution(self, pair: QuestionPair) -> dict[AnswerPair, Fraction]:
        xs, ys = pair
        out: dict[AnswerPair, Fraction] = {((), ()): Fraction(1)}
        for x, y in zip(xs, ys):
            base = self.base.exact_distribution((x, y))
            if len(out) * len(base) > MAX_MAPPING_SUPPORT:
                raise TooLarge("product distribution support too large")
            out = {
                (pa + (a,), pb + (b,)): w1 * w2
                for (pa, pb), w1 in out.items()
                for (a, b), w2 in base.items()
            }
        return out


def sim_parallel(base: AnswerSampler, rounds: int) -> _Parallel:
    """Coordinatewise-independent sampler for a repeated game."""
    return _Parallel(base, rounds)


def sampler_correlation(game: "Game", sampler: AnswerSampler):
    """Exact correlation induced by a sampler on a game's support."""
    return {
        pair: {
            answers: float(w)
            for answers, w in sampler.exact_distribution(pair).items()
        }
        for pair in game.support()
    }


# ---------------------------------------------------------------------------
# Uniformity testing


@dataclass(frozen=True)
class UniformityReport:
    subset: tuple[int, ...]
    mode: str
    applicable: bool
    passed: bool | None
    distance: float | None = None
    statistic: float | None = None
    threshold: float | None = None
    note: str = ""


def _chi_square_z(statistic: float, df: int) -> float:
    # Wilson-Hilferty cube-root normal approximation
    scaled = (statistic / df) ** (1.0 / 3.0)
    return (scaled - (1.0 - 2.0 / (9.0 * df))) / math.sqrt(2.0 / (9.0 * df))


def uniformity_test(
    sampler,
    subset: Sequence[int],
    exact: bool = True,
    rounds: int = 20000,
    rng=None,
) -> UniformityReport:
    """Check a copy subset's joint marginal against the uniform law.

    Exact mode demands total-variation distance zero.  Sampling mode runs
    a chi-square test at significance 1e-4 (normal approximation to the
    chi-square tail).  Subsets touching cells or randomizers raise
    ``NotOblivious``; a subset that contains every copy of some variable
    is reported inapplicable, since the shares then determine the witness
    value and are correlated by design.
    """
    tab: TableauBcs = sampler.tab
    ids = tuple(subset)
    per_var: dict[int, int] = {}
    for v in ids:
        kind = tab.variable_kind(v)
        if kind[0] != "copy":
            raise NotOblivious(f"variable {v} is not an oblivious copy")
        per_var[v // tab.degree] = per_var.get(v // tab.degree, 0) + 1
    covered = [v for v, n in per_var.items() if n >= tab.degree]
    if covered:
        return UniformityReport(
            ids,
            "exact" if exact else "sampling",
            applicable=False,
            passed=None,
            note=f"subset covers every copy of variable(s) {covered}",
        )
    if exact:
        dist = sampler.subset_distribution(ids)
        tv = statistical_distance(dist, uniform_distribution(len(ids)))
        return UniformityReport(
            ids, "exact", applicable=True, passed=tv == 0.0, distance=tv
        )
    if rng is None:
        raise ValueError("sampling mode needs an rng")
    cells = 1 << len(ids)
    rounds = max(rounds, 10 * cells)
    observed = np.zeros(cells, dtype=np.int64)
    question = ("subset", ids)
    for _ in range(rounds):
        answer, _ = sampler.sample((question, question), rng)
        observed[pack_signs(answer)] += 1
    expected = rounds / cells
    statistic = float(((observed - expected) ** 2 / expected).sum())
    z = _chi_square_z(statistic, cells - 1)
    threshold = NormalDist().inv_cdf(1.0 - CHI2_SIGNIFICANCE)
    return UniformityReport(
        ids,
        "sampling",
        applicable=True,
        passed=z <= threshold,
        statistic=statistic,
        threshold=threshold,
    )
