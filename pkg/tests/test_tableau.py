"""Obliviation and the randomizing tableau: structure and extension."""

import random
from itertools import product

import pytest

from bcsgames import barrington, bcs, circuits, s5, tableau
from bcsgames.errors import BadRows, NotAWitness
from grid_utils import (
    capped_grid,
    check_tableau_invariants,
    extension_cells,
    grid_randomizers,
    telescoped_cells,
)


def xor_system():
    return bcs.Bcs(
        num_vars=2,
        constraints=(
            bcs.Constraint(
                scope=(0, 1), table=frozenset({(+1, -1), (-1, +1)})
            ),
        ),
    )


def tiny_tableau(rows=4, degree=2, pairs=False):
    base = tableau.obliviate(xor_system(), degree)
    programs = [barrington.compile_constraint(c) for c in base.constraints]
    return tableau.tableau(
        base, rows, programs=programs, include_trivial_pairs=pairs
    )


def test_obliviate_layout():
    lifted = tableau.obliviate(bcs.magic_square(), 3)
    assert lifted.num_vars == 27
    assert len(lifted.constraints) == 6
    for before, after in zip(bcs.magic_square().constraints, lifted.constraints):
        assert after.copies == 3
        assert after.scope == tuple(
            v * 3 + t for v in before.scope for t in range(3)
        )
        assert after.base_table() == before.base_table()
    assert lifted.names is not None
    assert lifted.names[:4] == ("x[0][1]", "x[0][2]", "x[0][3]", "x[1][1]")


def test_obliviate_preserves_satisfiability_both_ways():
    system = bcs.bcs_from_cnf("p cnf 2 1\n1 2 0\n")
    for k in (2, 3):
        lifted = tableau.obliviate(system, k)
        w = bcs.brute_force_satisfiable(lifted)
        assert w is not None
        collapsed = tuple(
            prod_signs(w[v * k : (v + 1) * k]) for v in range(system.num_vars)
        )
        assert system.satisfied(collapsed)
    unsat = tableau.obliviate(bcs.magic_square(), 2)
    assert bcs.brute_force_satisfiable(unsat) is None


def prod_signs(values):
    out = 1
    for v in values:
        out *= v
    return out


def test_obliviate_rejects_bad_input():
    with pytest.raises(ValueError):
        tableau.obliviate(xor_system(), 0)
    lifted = tableau.obliviate(xor_system(), 2)
    with pytest.raises(ValueError):
        tableau.obliviate(lifted, 2)


def test_tableau_variable_layout():
    tab = tiny_tableau(rows=4, degree=2)
    d = len(tab.programs[0])
    bits = s5.PERM_BITS
    expected = tab.base.num_vars + 4 * d * bits + 3 * (d - 1) * bits
    assert tab.system.num_vars == expected
    seen = set()
    for var in range(tab.system.num_vars):
        kind = tab.variable_kind(var)
        assert kind[0] in ("copy", "cell", "rand")
        seen.add(kind)
    assert len(seen) == tab.system.num_vars
    # Round trips: named blocks map back to their ids.
    assert tab.variable_kind(tab.cell_bits(0, 2, 1)[0]) == ("cell", 0, 2, 1, 0)
    assert tab.variable_kind(tab.rand_bits(0, 1, 1)[3]) == ("rand", 0, 1, 1, 3)
    assert tab.copy_ids(1) == (2, 3)


def test_tableau_clause_census():
    tab = tiny_tableau(rows=4, degree=2, pairs=True)
    d = len(tab.programs[0])
    tags = [t[0] for t in tab.clause_tags]
    assert tags.count("pin") == d
    assert tags.count("prop") == (4 - 1) * d
    assert tags.count("prod") == 1
    n = tab.base.num_vars
    assert tags.count("pair") == n * (n - 1) // 2
    assert len(tab.clause_tags) == len(tab.system.constraints)


def test_tableau_without_pairs_by_default():
    tab = tiny_tableau(rows=4, degree=2, pairs=False)
    assert all(t[0] != "pair" for t in tab.clause_tags)


def test_tableau_rejects_thin_rows():
    base = tableau.obliviate(xor_system(), 2)
    with pytest.raises(BadRows):
        tableau.tableau(base, 3)


def test_tableau_rejects_mismatched_programs():
    base = tableau.obliviate(xor_system(), 2)
    wrong = [barrington.pair_product_program()]
    with pytest.raises(ValueError):
        tableau.tableau(base, 4, programs=wrong)


def test_pin_copy_follows_program_variables():
    tab = tiny_tableau()
    prog = tab.programs[0]
    scope = tab.base.constraints[0].scope
    for q in range(1, len(prog) + 1):
        assert tab.pin_copy(0, q) == scope[prog.instructions[q - 1].var]


def test_pzk_transform_parameter_policing():
    system = xor_system()
    with pytest.raises(BadRows):
        tableau.pzk_transform(system, rows=3, degree=9)
    with pytest.raises(ValueError):
        tableau.pzk_transform(system, rows=8, degree=4)
    with pytest.warns(UserWarning):
        tab = tableau.pzk_transform(system, rows=4, degree=5)
    assert tab.rows == 4 and tab.degree == 5
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tab = tableau.pzk_transform(system, rows=8, degree=9)
    assert tab.rows == 8 and tab.degree == 9
    assert any(t[0] == "pair" for t in tab.clause_tags)


def test_split_witness_products_and_seeds():
    with pytest.warns(UserWarning):
        tab = tableau.pzk_transform(xor_system(), rows=4, degree=5)
    witness = (+1, -1)
    copies = tableau.split_witness(tab, witness, seed=11)
    assert len(copies) == 10
    for v, value in enumerate(witness):
        assert prod_signs(copies[v * 5 : (v + 1) * 5]) == value
    assert tableau.split_witness(tab, witness, seed=11) == copies
    plain = tableau.split_witness(tab, witness)
    assert plain[:4] == [1, 1, 1, 1]


def test_extend_witness_satisfies_every_clause():
    tab = tiny_tableau(rows=5, degree=2, pairs=True)
    copies = tableau.split_witness(tab, (+1, -1), seed=3)
    rng = random.Random(5)
    d = len(tab.programs[0])
    for _ in range(25):
        rand = {
            (0, j, c): rng.randrange(120)
            for j in range(1, tab.rows)
            for c in range(1, d)
        }
        values = tableau.extend_witness(tab, copies, rand)
        assert tab.system.satisfied(values)
    assert tab.system.satisfied(tableau.extend_witness(tab, copies))


def test_extend_witness_rejects_non_witness():
    tab = tiny_tableau()
    with pytest.raises(NotAWitness):
        tableau.extend_witness(tab, [+1, +1, +1, +1])


def grid_case(tab, copies, cap=4096, choices=(s5.IDENTITY, s5.SIGMA, 17)):
    """Exhaustive rank-space check over a capped randomizer grid, bound to
    the real extension code on a sample of combos."""
    i = 0
    prog = tab.programs[i]
    d = len(prog)
    pins = [
        prog.instructions[q - 1].output(copies[tab.pin_copy(i, q)])
        for q in range(1, d + 1)
    ]
    grid = capped_grid(tab.rows, d, choices, cap)
    total, rand = grid_randomizers(grid)
    cells = telescoped_cells(pins, tab.rows, rand)
    verdict = check_tableau_invariants(pins, prog.output, tab.rows, rand, cells)
    assert verdict is None, verdict
    # Bind the independent construction to extend_witness on a sample.
    rng = random.Random(9)
    sample = [0, total - 1] + [rng.randrange(total) for _ in range(10)]
    for combo in sample:
        chosen = {
            (i, j, c): int(rand[j, c][combo]) for (j, c) in rand
        }
        values = tableau.extend_witness(tab, copies, chosen)
        assert tab.system.satisfied(values)
        decoded = extension_cells(tab, values)
        for p in range(1, tab.rows + 1):
            for q in range(1, d + 1):
                assert decoded[i, p, q] == int(cells[p, q][combo])
    return total


def test_grid_invariants_small():
    tab = tiny_tableau(rows=4, degree=2)
    copies = tableau.split_witness(tab, (+1, -1), seed=1)
    total = grid_case(tab, copies)
    assert total > 1000
