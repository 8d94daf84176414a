"""Shared corpus for product-lift satisfiability equivalence checks.

Enumerates small constraint systems, lifts each at several degrees, and
brute-forces both sides.  Kept out of the test modules so the acceptance
suite can reuse the same sweep.
"""

from itertools import combinations, product
from math import prod

from bcsgames import bcs
from bcsgames.tableau import obliviate


def full_scope_tables(arity: int):
    """Every nonempty satisfying table over a full scope of this arity."""
    rows = list(product((+1, -1), repeat=arity))
    for size in range(1, len(rows) + 1):
        for chosen in combinations(rows, size):
            yield frozenset(chosen)


def single_constraint_bases(arity: int):
    for table in full_scope_tables(arity):
        yield bcs.Bcs(
            num_vars=arity,
            constraints=(
                bcs.Constraint(scope=tuple(range(arity)), table=table),
            ),
        )


def _parity(scope, target):
    return bcs.Constraint(scope=scope, table=bcs.parity_table(len(scope), target))


def multi_constraint_bases():
    """Hand-picked systems mixing satisfiable and contradictory clauses."""
    pin_up = bcs.Constraint(scope=(0,), table=frozenset({(+1,)}))
    pin_down = bcs.Constraint(scope=(0,), table=frozenset({(-1,)}))
    return [
        bcs.Bcs(num_vars=1, constraints=(pin_up, pin_down)),
        bcs.Bcs(num_vars=3, constraints=(
            _parity((0, 1), -1), _parity((1, 2), -1), _parity((0, 2), -1),
        )),
        bcs.Bcs(num_vars=3, constraints=(
            _parity((0, 1), -1), _parity((1, 2), -1),
        )),
        bcs.Bcs(num_vars=3, constraints=(
            pin_up, _parity((0, 1, 2), +1), _parity((1, 2), -1),
        )),
    ]


def expand_witness(witness, degree):
    """Plain lift of a base assignment: last copy carries the value."""
    out = []
    for value in witness:
        out.extend([1] * (degree - 1) + [value])
    return out


def collapse_assignment(assignment, degree):
    """Per-variable products of the var-major copy groups."""
    return [
        prod(assignment[v : v + degree])
        for v in range(0, len(assignment), degree)
    ]


def check_lift_equivalence(bases, degrees):
    """Brute-force both sides of the lift for every base and degree.

    Returns (cases checked, failure descriptions).  A case fails when
    satisfiability flips across the lift, when a lifted witness does not
    collapse to a base witness, or when an expanded base witness does not
    satisfy the lift.
    """
    checked = 0
    failures = []
    for base in bases:
        base_witness = bcs.brute_force_satisfiable(base)
        for degree in degrees:
            lifted = obliviate(base, degree)
            lifted_witness = bcs.brute_force_satisfiable(lifted)
            checked += 1
            if (base_witness is None) != (lifted_witness is None):
                failures.append(
                    f"satisfiability flips at degree {degree}: "
                    f"base {base_witness!r}, lifted {lifted_witness!r}"
                )
                continue
            if lifted_witness is None:
                continue
            collapsed = collapse_assignment(lifted_witness, degree)
            if not base.satisfied(collapsed):
                failures.append(
                    f"lifted witness collapses to a non-witness at degree {degree}"
                )
            if not lifted.satisfied(expand_witness(base_witness, degree)):
                failures.append(
                    f"expanded base witness rejected at degree {degree}"
                )
    return checked, failures
