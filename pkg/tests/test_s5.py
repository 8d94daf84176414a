"""Group-algebra sanity for the rank-encoded symmetric group."""

import numpy as np
import pytest

from bcsgames import s5


def test_order_and_identity():
    assert s5.ORDER == 120
    assert len(s5.PERMS) == 120
    assert s5.PERMS[s5.IDENTITY] == (0, 1, 2, 3, 4)
    for a in range(s5.ORDER):
        assert s5.mul(a, s5.IDENTITY) == a
        assert s5.mul(s5.IDENTITY, a) == a


def test_table_matches_image_composition():
    # Full 120x120 cross-check: the rank table against direct composition.
    for a, pa in enumerate(s5.PERMS):
        for b, pb in enumerate(s5.PERMS):
            assert s5.MUL[a, b] == s5.RANK[s5.compose_images(pa, pb)]


def test_associativity_via_tables():
    # (ab)c == a(bc) on the whole 120^3 cube, vectorised.
    m = s5.MUL.astype(np.int64)
    left = m[m, :]          # left[a, b, c] = (ab)c
    right = m[:, m]         # right[a, b, c] = a(bc)
    assert left.shape == (120, 120, 120)
    assert np.array_equal(left, right)


def test_inverses():
    for a in range(s5.ORDER):
        assert s5.mul(a, s5.inv(a)) == s5.IDENTITY
        assert s5.mul(s5.inv(a), a) == s5.IDENTITY
    assert np.array_equal(s5.INV[s5.INV], np.arange(120))


def test_word_is_left_to_right():
    a, b, c = 7, 31, 99
    assert s5.word(a, b, c) == s5.mul(s5.mul(a, b), c)
    assert s5.word() == s5.IDENTITY
    assert s5.word(a) == a


def test_power():
    for a in (s5.SIGMA, s5.AND_ALPHA, 17):
        acc = s5.IDENTITY
        for n in range(12):
            assert s5.power(a, n) == acc
            acc = s5.mul(acc, a)
        assert s5.power(a, -1) == s5.inv(a)


def test_sigma_is_a_five_cycle_of_order_five():
    assert s5.is_five_cycle(s5.SIGMA)
    assert s5.cycle_type(s5.SIGMA) == (5,)
    assert s5.power(s5.SIGMA, 5) == s5.IDENTITY
    for n in range(1, 5):
        assert s5.power(s5.SIGMA, n) != s5.IDENTITY


def test_five_cycle_census():
    # 4! five-cycles in S5.
    assert len(s5.FIVE_CYCLES) == 24
    assert s5.SIGMA in s5.FIVE_CYCLES


def test_conjugator_on_all_five_cycle_pairs():
    for a in s5.FIVE_CYCLES:
        for b in s5.FIVE_CYCLES:
            theta = s5.conjugator(a, b)
            assert s5.word(s5.inv(theta), a, theta) == b


def test_conjugator_rejects_distinct_cycle_types():
    transposition = s5.RANK[(1, 0, 2, 3, 4)]
    with pytest.raises(ValueError):
        s5.conjugator(s5.SIGMA, transposition)


def test_commutator_gadgets_are_five_cycles():
    assert s5.commutator(s5.AND_ALPHA, s5.AND_BETA) == s5.AND_GAMMA
    assert s5.is_five_cycle(s5.AND_GAMMA)
    assert s5.is_five_cycle(s5.AND_ALPHA) and s5.is_five_cycle(s5.AND_BETA)
    assert s5.mul(s5.PARITY_TAU, s5.PARITY_TAU) == s5.IDENTITY
    assert s5.commutator(s5.PARITY_TAU, s5.PARITY_CONST) == s5.PARITY_GAMMA
    assert s5.is_five_cycle(s5.PARITY_GAMMA)


def test_bit_encoding_round_trip():
    for a in range(s5.ORDER):
        bits = s5.encode_bits(a)
        assert len(bits) == 7
        assert set(bits) <= {+1, -1}
        assert s5.decode_bits(bits) == a


def test_invalid_codes_decode_to_none():
    for code in range(120, 128):
        bits = tuple(+1 if (code >> t) & 1 else -1 for t in range(7))
        assert s5.decode_bits(bits) is None
