"""The symmetric group on five points, tuned for branching-program work.

Elements are ranks 0..119 into the lexicographic list of image tuples, so
S5 values fit in 7 bits (codes 120..127 are invalid paddings that constraint
predicates reject).  Multiplication follows word order: ``mul(a, b)`` means
"apply a first, then b", matching how branching programs multiply their
instruction outputs left to right.

Two independent multiplication routes exist on purpose: the rank table
(:data:`MUL`) and direct image-tuple composition
(:func:`compose_images`); tests cross-check one against the other over the
whole 120x120 grid.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

# Lexicographic enumeration; rank = position in this tuple.
PERMS: tuple[tuple[int, ...], ...] = tuple(permutations(range(5)))
RANK: dict[tuple[int, ...], int] = {p: i for i, p in enumerate(PERMS)}

ORDER = 120
IDENTITY = RANK[tuple(range(5))]

PERM_BITS = 7  # block width for one S5-valued variable


def compose_images(pa: tuple[int, ...], pb: tuple[int, ...]) -> tuple[int, ...]:
    """Image tuple of "apply pa first, then pb"."""
    return tuple(pb[pa[x]] for x in range(5))


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    mul = np.empty((ORDER, ORDER), dtype=np.uint8)
    inv = np.empty(ORDER, dtype=np.uint8)
    for a, pa in enumerate(PERMS):
        images = [0] * 5
        for x in range(5):
            images[pa[x]] = x
        inv[a] = RANK[tuple(images)]
        for b, pb in enumerate(PERMS):
            mul[a, b] = RANK[compose_images(pa, pb)]
    return mul, inv


MUL, INV = _build_tables()


def mul(a: int, b: int) -> int:
    """Word product: apply ``a`` first, then ``b``."""
    return int(MUL[a, b])


def inv(a: int) -> int:
    return int(INV[a])


def word(*elements: int) -> int:
    """Product of a word of elements, left to right."""
    acc = IDENTITY
    for g in elements:
        acc = int(MUL[acc, g])
    return acc


def power(a: int, n: int) -> int:
    if n < 0:
        return power(inv(a), -n)
    acc = IDENTITY
    for _ in range(n):
        acc = int(MUL[acc, a])
    return acc


def cycle_type(a: int) -> tuple[int, ...]:
    pa = PERMS[a]
    seen = [False] * 5
    lengths = []
    for start in range(5):
        if seen[start]:
            continue
        n, x = 0, start
        while not seen[x]:
            seen[x] = True
            x = pa[x]
            n += 1
        lengths.append(n)
    return tuple(sorted(lengths, reverse=True))


def is_five_cycle(a: int) -> bool:
    return cycle_type(a) == (5,)


FIVE_CYCLES: tuple[int, ...] = tuple(a for a in range(ORDER) if is_five_cycle(a))

#: Default recognizer output: the cycle (1 2 3 4 5) on 1-based points,
#: i.e. image tuple (1, 2, 3, 4, 0).
SIGMA = RANK[(1, 2, 3, 4, 0)]


def _cycles(a: int) -> list[list[int]]:
    """Cycle decomposition, each cycle rotated to start at its minimum,
    cycles sorted by (length desc, start asc) for canonical matching."""
    pa = PERMS[a]
    seen = [False] * 5
    cycles = []
    for start in range(5):
        if seen[start]:
            continue
        cyc, x = [], start
        while not seen[x]:
            seen[x] = True
            cyc.append(x)
            x = pa[x]
        cycles.append(cyc)
    return sorted(cycles, key=lambda c: (-len(c), c[0]))


def conjugator(a: int, b: int) -> int:
    """Some theta with ``word(inv(theta), a, theta) == b``.

    Requires a and b to share a cycle type (raises ValueError otherwise).
    """
    if cycle_type(a) != cycle_type(b):
        raise ValueError("elements are not conjugate: distinct cycle types")
    images = [0] * 5
    for ca, cb in zip(_cycles(a), _cycles(b)):
        for x, y in zip(ca, cb):
            images[x] = y
    theta = RANK[tuple(images)]
    assert word(inv(theta), a, theta) == b
    return theta


def commutator(a: int, b: int) -> int:
    return word(a, b, inv(a), inv(b))


def _first_commutator_pair() -> tuple[int, int, int]:
    for a in FIVE_CYCLES:
        for b in FIVE_CYCLES:
            c = commutator(a, b)
            if is_five_cycle(c):
                return a, b, c
    raise AssertionError("no five-cycle commutator pair in S5")


def _first_involution_gadget() -> tuple[int, int, int]:
    """(tau, a, gamma): tau an involution, gamma = [tau, a] a five-cycle.

    Words built from {e, tau} instructions compute tau**(count of -1 bits),
    so wrapping such a word in the commutator with the constant ``a`` turns
    "product of bits" into an {e, gamma} recognizer output.
    """
    for tau in range(ORDER):
        if tau == IDENTITY or mul(tau, tau) != IDENTITY:
            continue
        for a in range(ORDER):
            g = commutator(tau, a)
            if is_five_cycle(g):
                return tau, a, g
    raise AssertionError("no involution commutator gadget in S5")


# Frozen deterministic constants (first hits in rank order).
AND_ALPHA, AND_BETA, AND_GAMMA = _first_commutator_pair()
PARITY_TAU, PARITY_CONST, PARITY_GAMMA = _first_involution_gadget()


def encode_bits(a: int) -> tuple[int, ...]:
    """Seven signs (+1/-1), least-significant bit first; bit set <=> +1."""
    return tuple(+1 if (a >> t) & 1 else -1 for t in range(PERM_BITS))


def decode_bits(bits: tuple[int, ...]) -> int | None:
    """Rank for a 7-sign block, or None for the invalid codes 120..127."""
    a = 0
    for t, v in enumerate(bits):
        if v == +1:
            a |= 1 << t
    return a if a < ORDER else None
