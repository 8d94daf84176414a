"""Obliviation and the consistency-tableau constraint system.

``obliviate`` spreads every variable over k share copies whose product
carries the value, so any k-1 copies of a variable look like fair coins.
``tableau`` then replaces each constraint's predicate with a grid of
group-element cells that check a branching program for it, padded with
per-row randomizers so that intermediate cells carry no information
either.  The two composed (``pzk_transform``) are what turns an ordinary
constraint system into one whose honest answers are simulatable.

Tableau layout for constraint i whose program has d_i instructions, with
l rows:

* cells T[i][p][q], p in 1..l and q in 1..d_i, each a 7-bit block;
* randomizers r[i][j][c], j in 1..l-1 and c in 1..d_i-1, 7-bit blocks;
* clause kinds: "pin" ties T[i][1][q] to the instruction's single input
  copy, "prop" steps row p to row p+1 through the adjacent randomizers
  (boundary columns have fewer), and "prod" demands the last row multiply
  out to the program's output.

Variable ids put all copies first (id = v*k + t for copy t of v), then
cells constraint-major then row-major, then randomizers.  Boolean names
follow the block conventions: "x[v][t]" for copies (t starting at 1) and
"T[i][p][q]:b" / "r[i][j][c]:b" for bit b of a block, i starting at 1.
"""

from __future__ import annotations

import warnings
from bisect import bisect_right
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import barrington, s5
from .barrington import Program
from .bcs import Bcs, Constraint, Relation
from .errors import BadRows, NotAWitness
from .rng import substream

MIN_ROWS = 4
RECOMMENDED_ROWS = 8
MIN_DEGREE = 5
RECOMMENDED_DEGREE = 9


def obliviate(system: Bcs, degree: int) -> Bcs:
    """Product-lift every constraint over ``degree`` copies per variable.

    Copy t of variable v gets id v*degree + t; scopes are var-major runs
    of copies and predicates stay untouched (they apply to the per-variable
    copy products).  Satisfiability is preserved in both directions: fix
    any satisfying assignment and split each value into shares, or collapse
    shares by multiplication.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    k = degree
    constraints = []
    for c in system.constraints:
        if c.copies != 1:
            raise ValueError("system is already lifted")
        scope = tuple(v * k + t for v in c.scope for t in range(k))
        constraints.append(
            Constraint(
                scope,
                table=c.table,
                circuit=c.circuit,
                copies=k,
            )
        )
    names = tuple(
        f"x[{v}][{t + 1}]" for v in range(system.num_vars) for t in range(k)
    )
    c_max = max(len(c.scope) for c in constraints)
    return Bcs(
        system.num_vars * k,
        tuple(constraints),
        c_max=max(system.c_max, c_max),
        names=names,
    )


@dataclass(frozen=True)
class TableauBcs:
    """A tableau system together with the structure that built it.

    ``system`` is the plain constraint system (serializable like any
    other); the remaining fields let samplers and probes interpret its
    variables and clauses.  ``degree`` and ``underlying_vars`` describe
    the copy structure of ``base``: copies of underlying variable v are
    base ids v*degree .. v*degree + degree - 1.
    """

    system: Bcs
    base: Bcs
    rows: int
    programs: tuple[Program, ...]
    clause_tags: tuple[tuple, ...]
    cell_starts: tuple[int, ...]
    rand_starts: tuple[int, ...]
    degree: int
    underlying_vars: int

    def cell_bits(self, i: int, p: int, q: int) -> tuple[int, ...]:
        """Bit ids of cell T[i+1][p][q] (i is 0-based, p and q 1-based)."""
        d = len(self.programs[i])
        if not (1 <= p <= self.rows and 1 <= q <= d):
            raise IndexError(f"no cell ({p}, {q}) in constraint {i}")
        start = self.cell_starts[i] + ((p - 1) * d + (q - 1)) * s5.PERM_BITS
        return tuple(range(start, start + s5.PERM_BITS))

    def rand_bits(self, i: int, j: int, c: int) -> tuple[int, ...]:
        """Bit ids of randomizer r[i+1][j][c] (j and c 1-based)."""
        d = len(self.programs[i])
        if not (1 <= j <= self.rows - 1 and 1 <= c <= d - 1):
            raise IndexError(f"no randomizer ({j}, {c}) in constraint {i}")
        start = self.rand_starts[i] + ((j - 1) * (d - 1) + (c - 1)) * s5.PERM_BITS
        return tuple(range(start, start + s5.PERM_BITS))

    def pin_copy(self, i: int, q: int) -> int:
        """Base variable id read by instruction q of constraint i."""
        instr = self.programs[i].instructions[q - 1]
        return self.base.constraints[i].scope[instr.var]

    def copy_ids(self, v: int) -> tuple[int, ...]:
        """Base ids of the copies of underlying variable v."""
        if not 0 <= v < self.underlying_vars:
            raise IndexError(f"no underlying variable {v}")
        return tuple(range(v * self.degree, (v + 1) * self.degree))

    def variable_kind(self, var: int) -> tuple:
        """("copy", base id), ("cell", i, p, q, bit), or ("rand", i, j, c, bit)."""
        if var < self.base.num_vars:
            return ("copy", var)
        i = bisect_right(self.cell_starts, var) - 1
        d = len(self.programs[i])
        cells_end = self.cell_starts[i] + self.rows * d * s5.PERM_BITS
        if var < cells_end:
            offset = var - self.cell_starts[i]
            block, bit = divmod(offset, s5.PERM_BITS)
            p, q = divmod(block, d)
            return ("cell", i, p + 1, q + 1, bit)
        offset = var - self.rand_starts[i]
        block, bit = divmod(offset, s5.PERM_BITS)
        j, c = divmod(block, d - 1)
        return ("rand", i, j + 1, c + 1, bit)


def tableau(
    base: Bcs,
    rows: int,
    programs: Sequence[Program] | None = None,
    include_trivial_pairs: bool = False,
) -> TableauBcs:
    """Consistency tableau over branching programs for ``base``.

    Programs default to the commutator compilation of each constraint;
    hand-built programs can be supplied instead (they must recognize the
    constraints, which nothing here re-checks).  ``include_trivial_pairs``
    materializes an always-true clause per pair of copies; pairs involving
    cells or randomizers stay implicit.  Fewer than four rows leaves
    intermediate cells correlated, so that is refused outright.
    """
    if rows < MIN_ROWS:
        raise BadRows(f"{rows} rows; the construction needs at least {MIN_ROWS}")
    if programs is None:
        programs = [barrington.compile_constraint(c) for c in base.constraints]
    else:
        programs = list(programs)
        if len(programs) != len(base.constraints):
            raise ValueError(
                f"{len(programs)} programs for {len(base.constraints)} constraints"
            )
    for i, (prog, c) in enumerate(zip(programs, base.constraints)):
        if prog.arity != len(c.scope):
            raise ValueError(
                f"program {i} has arity {prog.arity}, scope has {len(c.scope)}"
            )
        if not s5.is_five_cycle(prog.output):
            raise ValueError(f"program {i} output is not a five-cycle")

    degree = base.constraints[0].copies
    if (
        degree == 1
        or any(c.copies != degree for c in base.constraints)
        or base.num_vars % degree != 0
    ):
        degree, underlying = 1, base.num_vars
    else:
        underlying = base.num_vars // degree

    bits = s5.PERM_BITS
    cell_starts, rand_starts = [], []
    next_id = base.num_vars
    for prog in programs:
        d = len(prog)
        cell_starts.append(next_id)
        next_id += rows * d * bits
        rand_starts.append(next_id)
        next_id += (rows - 1) * (d - 1) * bits
    num_vars = next_id

    def cell(i: int, p: int, q: int) -> tuple[int, ...]:
        d = len(programs[i])
        start = cell_starts[i] + ((p - 1) * d + (q - 1)) * bits
        return tuple(range(start, start + bits))

    def rand(i: int, j: int, c: int) -> tuple[int, ...]:
        d = len(programs[i])
        start = rand_starts[i] + ((j - 1) * (d - 1) + (c - 1)) * bits
        return tuple(range(start, start + bits))

    names: list[str] = list(
        base.names
        if base.names is not None
        else (f"x{v}" for v in range(base.num_vars))
    )
    for i, prog in enumerate(programs):
        d = len(prog)
        names.extend(
            f"T[{i + 1}][{p}][{q}]:{b}"
            for p in range(1, rows + 1)
            for q in range(1, d + 1)
            for b in range(bits)
        )
        names.extend(
            f"r[{i + 1}][{j}][{c}]:{b}"
            for j in range(1, rows)
            for c in range(1, d)
            for b in range(bits)
        )

    constraints: list[Constraint] = []
    tags: list[tuple] = []
    for i, prog in enumerate(programs):
        d = len(prog)
        base_scope = base.constraints[i].scope
        for q in range(1, d + 1):
            instr = prog.instructions[q - 1]
            scope = cell(i, 1, q) + (base_scope[instr.var],)
            constraints.append(
                Constraint(
                    scope,
                    relation=Relation(
                        "pin", plus=instr.on_true, minus=instr.on_false
                    ),
                )
            )
            tags.append(("pin", i, q))
        for p in range(1, rows):
            for q in range(1, d + 1):
                scope = cell(i, p, q) + cell(i, p + 1, q)
                left, right = q >= 2, q <= d - 1
                if left:
                    scope += rand(i, p, q - 1)
                if right:
                    scope += rand(i, p, q)
                constraints.append(
                    Constraint(
                        scope, relation=Relation("prop", left=left, right=right)
                    )
                )
                tags.append(("prop", i, p, q))
        scope = tuple(b for q in range(1, d + 1) for b in cell(i, rows, q))
        constraints.append(
            Constraint(scope, relation=Relation("prod", target=prog.output))
        )
        tags.append(("prod", i))
    if include_trivial_pairs:
        for v1 in range(base.num_vars):
            for v2 in range(v1 + 1, base.num_vars):
                constraints.append(
                    Constraint((v1, v2), relation=Relation("free"))
                )
                tags.append(("pair", v1, v2))

    c_max = max(len(c.scope) for c in constraints)
    system = Bcs(num_vars, tuple(constraints), c_max=c_max, names=tuple(names))
    return TableauBcs(
        system=system,
        base=base,
        rows=rows,
        programs=tuple(programs),
        clause_tags=tuple(tags),
        cell_starts=tuple(cell_starts),
        rand_starts=tuple(rand_starts),
        degree=degree,
        underlying_vars=underlying,
    )


def pzk_transform(
    system: Bcs,
    rows: int = 8,
    degree: int = 9,
    include_trivial_pairs: bool = True,
) -> TableauBcs:
    """Obliviate then tableau; the composition used by the pipeline.

    Any rows >= 4 and degree >= 5 make a well-formed system, but the
    zero-knowledge probes in this package are calibrated for (8, 9), so
    smaller parameters draw a warning.  The copy-consistency pair clauses
    are included by default: they are part of the full game and give a
    dishonest verifier its widest per-question view of the copies, which
    is exactly what the recommended parameters are sized against.
    """
    if rows < MIN_ROWS:
        raise BadRows(f"{rows} rows; the construction needs at least {MIN_ROWS}")
    if degree < MIN_DEGREE:
        raise ValueError(f"degree must be at least {MIN_DEGREE}, got {degree}")
    if rows < RECOMMENDED_ROWS or degree < RECOMMENDED_DEGREE:
        warnings.warn(
            f"parameters ({rows}, {degree}) below the recommended "
            f"({RECOMMENDED_ROWS}, {RECOMMENDED_DEGREE}); obliviousness "
            f"probes can find violations down there",
            stacklevel=2,
        )
    return tableau(
        obliviate(system, degree), rows, include_trivial_pairs=include_trivial_pairs
    )


# ---------------------------------------------------------------------------
# Honest witness extension


def split_witness(
    tab: TableauBcs, witness: Sequence[int], seed: int | None = None
) -> list[int]:
    """Copy assignment for the base system from an underlying witness.

    Each variable's copies multiply to its witness value; the free k-1
    signs are drawn from the given seed (or fixed to +1 when seed is
    None, handy for exhaustive reruns over randomizers only).
    """
    k = tab.degree
    if len(witness) != tab.underlying_vars:
        raise ValueError(
            f"witness has {len(witness)} values for {tab.underlying_vars} variables"
        )
    rng = substream(seed, "split") if seed is not None else None
    copies = []
    for v, value in enumerate(witness):
        if k == 1:
            copies.append(value)
            continue
        free = [
            rng.choice((-1, 1)) if rng is not None else 1 for _ in range(k - 1)
        ]
        prod = 1
        for sign in free:
            prod *= sign
        copies.extend(free + [value * prod])
    return copies


def extend_witness(
    tab: TableauBcs,
    copies: Sequence[int],
    randomizers: Mapping[tuple[int, int, int], int] | None = None,
) -> list[int]:
    """Full tableau assignment from a satisfying copy assignment.

    Pins come from the programs, interior cells from telescoping the
    row-products of the randomizers (identity when none are supplied).
    The result satisfies every tableau clause for every randomizer
    choice; a copy assignment that does not satisfy the base system is
    refused.
    """
    if len(copies) != tab.base.num_vars:
        raise ValueError(
            f"{len(copies)} copy values for {tab.base.num_vars} base variables"
        )
    if not tab.base.satisfied(copies):
        raise NotAWitness("copy assignment does not satisfy the base system")
    rand = dict(randomizers) if randomizers is not None else {}
    values = [0] * tab.system.num_vars
    values[: tab.base.num_vars] = list(copies)

    def put_block(bit_ids: tuple[int, ...], rank: int) -> None:
        for bit_id, sign in zip(bit_ids, s5.encode_bits(rank)):
            values[bit_id] = sign

    for i, prog in enumerate(tab.programs):
        d = len(prog)
        pins = [
            prog.instructions[q - 1].output(copies[tab.pin_copy(i, q)])
            for q in range(1, d + 1)
        ]
        for j in range(1, tab.rows):
            for c in range(1, d):
                rand.setdefault((i, j, c), s5.IDENTITY)
                put_block(tab.rand_bits(i, j, c), rand[i, j, c])
        # L[p][c] = product of randomizers above row p in column c
        level = [s5.IDENTITY] * (d + 1)  # columns 0..d, boundaries stay e
        for p in range(1, tab.rows + 1):
            if p > 1:
                for c in range(1, d):
                    level[c] = s5.mul(level[c], rand[i, p - 1, c])
            for q in range(1, d + 1):
                cell = s5.mul(s5.mul(s5.inv(level[q - 1]), pins[q - 1]), level[q])
                put_block(tab.cell_bits(i, p, q), cell)
    return values
