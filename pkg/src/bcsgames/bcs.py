"""Binary constraint systems over sign-valued variables.

A system has ``num_vars`` variables taking values in {+1, -1} and a list of
constraints.  Each constraint owns a scope of distinct variable ids plus a
predicate, given in exactly one of three forms:

* an explicit table of accepted sign tuples,
* a fan-in-two circuit over local indices, or
* a structured permutation relation (see :class:`Relation`) whose scope
  packs group elements into 7-bit sign blocks.  These arise from the
  consistency-tableau construction, where scopes get too wide for tables
  and a synthesized circuit would be an unreadable blob.

A table or circuit constraint may also be *product-lifted*
(``copies = k > 1``): its scope then consists of k copies of each base
variable, laid out var-major, and the predicate applies to the
per-variable products of the copies.  Lifting is how a system gets spread
over shares so that any k-1 copies of a variable say nothing about its
underlying value.

The JSON schema is ``{"n": int, "constraints": [{"vars": [...], ...}]}``
with one of "table", "circuit", or "relation" per constraint, plus
optional "copies", and optional top-level "names" and "c_max".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from math import prod
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import circuits, s5
from .circuits import Circuit
from .errors import MissingVariable, ParseError, ScopeTooLarge, TooLarge

MAX_TABLE_BITS = 20
MAX_BRUTE_FORCE_VARS = 24
DEFAULT_MAX_SCOPE = 8


@dataclass(frozen=True)
class Relation:
    """Structured predicate over 7-bit permutation blocks.

    ``op`` selects the shape; unused fields stay at their defaults.

    * ``"pin"``: scope is one 7-bit block then one plain sign.  Accepts
      when the block decodes to ``plus`` (sign +1) or ``minus`` (sign -1).
    * ``"prop"``: scope is two 7-bit blocks, then a left and/or right
      7-bit randomizer block as flagged.  Accepts when
      ``second == left_inverse * first * right`` (absent sides act as the
      identity).
    * ``"prod"``: scope is one or more 7-bit blocks.  Accepts when their
      left-to-right product decodes to ``target``.
    * ``"free"``: accepts everything (used to materialize trivial pairs).

    Any block that decodes to no group element (codes 120..127) rejects.
    """

    op: str
    plus: int = 0
    minus: int = 0
    target: int = 0
    left: bool = False
    right: bool = False

    def __post_init__(self) -> None:
        if self.op not in ("pin", "prop", "prod", "free"):
            raise ValueError(f"unknown relation op {self.op!r}")
        for code in (self.plus, self.minus, self.target):
            if not 0 <= code < s5.ORDER:
                raise ValueError(f"relation code {code} out of range")

    def scope_width_ok(self, width: int) -> bool:
        if self.op == "pin":
            return width == s5.PERM_BITS + 1
        if self.op == "prop":
            blocks = 2 + int(self.left) + int(self.right)
            return width == blocks * s5.PERM_BITS
        if self.op == "prod":
            return width >= s5.PERM_BITS and width % s5.PERM_BITS == 0
        return width >= 1

    def check(self, values: Sequence[int]) -> bool:
        bits = s5.PERM_BITS
        if self.op == "free":
            return True
        if self.op == "pin":
            code = s5.decode_bits(values[:bits])
            if code is None:
                return False
            return code == (self.plus if values[bits] == +1 else self.minus)
        blocks = [
            s5.decode_bits(values[i : i + bits])
            for i in range(0, len(values), bits)
        ]
        if any(b is None for b in blocks):
            return False
        if self.op == "prod":
            acc = s5.IDENTITY
            for b in blocks:
                acc = s5.mul(acc, b)
            return acc == self.target
        first, second = blocks[0], blocks[1]
        rest = blocks[2:]
        ra = rest.pop(0) if self.left else s5.IDENTITY
        rb = rest.pop(0) if self.right else s5.IDENTITY
        return second == s5.mul(s5.mul(s5.inv(ra), first), rb)


@dataclass(frozen=True)
class Constraint:
    scope: tuple[int, ...]
    table: frozenset[tuple[int, ...]] | None = None
    circuit: Circuit | None = None
    relation: Relation | None = None
    copies: int = 1

    def __post_init__(self) -> None:
        kinds = sum(x is not None for x in (self.table, self.circuit, self.relation))
        if kinds != 1:
            raise ValueError(
                "constraint needs exactly one of table, circuit, or relation"
            )
        if len(set(self.scope)) != len(self.scope):
            raise ValueError(f"repeated variable in scope {self.scope!r}")
        if self.copies < 1:
            raise ValueError("copies must be at least 1")
        if self.relation is not None:
            if self.copies != 1:
                raise ValueError("relation constraints cannot be lifted")
            if not self.relation.scope_width_ok(len(self.scope)):
                raise ValueError(
                    f"scope of {len(self.scope)} does not fit relation "
                    f"{self.relation.op!r}"
                )
            return
        if len(self.scope) % self.copies != 0:
            raise ValueError(
                f"scope of {len(self.scope)} does not split into {self.copies} copies"
            )
        m = self.base_arity
        if self.table is not None:
            for row in self.table:
                if len(row) != m or any(v not in (+1, -1) for v in row):
                    raise ValueError(f"bad table row {row!r} for arity {m}")
        else:
            used = circuits.variables(self.circuit)
            if used and max(used) >= m:
                raise ValueError(
                    f"circuit reads local index {max(used)} but base arity is {m}"
                )

    @property
    def base_arity(self) -> int:
        return len(self.scope) // self.copies

    def base_values(self, values: Sequence[int]) -> tuple[int, ...]:
        """Collapse copy blocks by sign product; identity when copies == 1."""
        if len(values) != len(self.scope):
            raise ValueError(
                f"expected {len(self.scope)} values, got {len(values)}"
            )
        if self.copies == 1:
            return tuple(values)
        k = self.copies
        return tuple(
            prod(values[i * k : (i + 1) * k]) for i in range(self.base_arity)
        )

    def check(self, values: Sequence[int]) -> bool:
        """Predicate on a local sign tuple aligned with the scope."""
        if self.relation is not None:
            if len(values) != len(self.scope):
                raise ValueError(
                    f"expected {len(self.scope)} values, got {len(values)}"
                )
            return self.relation.check(values)
        base = self.base_values(values)
        if self.table is not None:
            return base in self.table
        return circuits.evaluate(self.circuit, base)

    def base_table(self) -> frozenset[tuple[int, ...]]:
        """Accepted base tuples (after collapsing copies, if any)."""
        if self.table is not None:
            return self.table
        if self.circuit is not None:
            return circuits.truth_table(self.circuit, self.base_arity)
        return self.satisfying_set()

    def satisfying_set(self) -> frozenset[tuple[int, ...]]:
        """Accepted full-scope sign tuples.

        For a lifted constraint this enumerates all copy tuples whose
        products land in the base table, so its size is
        |base table| * 2**((copies-1)*base_arity).
        """
        if len(self.scope) > MAX_TABLE_BITS:
            raise ScopeTooLarge(
                f"scope has {len(self.scope)} variables; "
                f"refusing to enumerate past {MAX_TABLE_BITS}"
            )
        if self.copies == 1 and self.table is not None:
            return self.table
        return frozenset(
            row
            for row in product((-1, +1), repeat=len(self.scope))
            if self.check(row)
        )

    def as_circuit(self) -> Circuit:
        """Circuit over base inputs (synthesized from the table if needed)."""
        if self.circuit is not None:
            return self.circuit
        if self.table is not None:
            return circuits.from_satisfying_set(self.base_arity, self.table)
        return circuits.from_satisfying_set(len(self.scope), self.satisfying_set())


@dataclass(frozen=True)
class Bcs:
    num_vars: int
    constraints: tuple[Constraint, ...]
    c_max: int = DEFAULT_MAX_SCOPE
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.num_vars < 1:
            raise ValueError("a system needs at least one variable")
        if not self.constraints:
            raise ValueError("a system needs at least one constraint")
        for i, c in enumerate(self.constraints):
            if len(c.scope) > self.c_max:
                raise ScopeTooLarge(
                    f"constraint {i} has scope {len(c.scope)} > c_max {self.c_max}"
                )
            for v in c.scope:
                if not 0 <= v < self.num_vars:
                    raise ValueError(
                        f"constraint {i} uses variable {v} outside "
                        f"0..{self.num_vars - 1}"
                    )
        if self.names is not None:
            if len(self.names) != self.num_vars:
                raise ValueError(
                    f"{len(self.names)} names for {self.num_vars} variables"
                )
            if len(set(self.names)) != len(self.names):
                raise ValueError("variable names must be unique")

    def satisfied(self, assignment: Sequence[int]) -> bool:
        if len(assignment) != self.num_vars:
            raise ValueError(
                f"assignment length {len(assignment)} != {self.num_vars} variables"
            )
        return all(
            c.check([assignment[v] for v in c.scope]) for c in self.constraints
        )


def eval_constraint(
    c: Constraint, assignment: Mapping[int, int] | Sequence[int]
) -> bool:
    """Evaluate one constraint against a (possibly partial) assignment.

    The assignment maps global variable ids to signs; a sequence works
    too.  Scope variables absent from the assignment raise
    MissingVariable rather than KeyError so callers can tell a bad
    question from a bad answer.
    """
    values = []
    for v in c.scope:
        try:
            values.append(assignment[v])
        except (KeyError, IndexError):
            raise MissingVariable(f"assignment lacks variable {v}") from None
    return c.check(values)


def signs_from_rank(rank: int, n: int) -> tuple[int, ...]:
    """Assignment number ``rank`` as signs; bit t set means variable t is +1."""
    return tuple(+1 if (rank >> t) & 1 else -1 for t in range(n))


def all_assignments(n: int) -> Iterator[tuple[int, ...]]:
    for rank in range(2**n):
        yield signs_from_rank(rank, n)


def brute_force_satisfiable(bcs: Bcs) -> tuple[int, ...] | None:
    """First satisfying assignment in rank order, or None.

    Vectorized over assignment ranks in chunks; refuses systems with more
    than MAX_BRUTE_FORCE_VARS variables.
    """
    n = bcs.num_vars
    if n > MAX_BRUTE_FORCE_VARS:
        raise TooLarge(
            f"{n} variables exceeds the brute-force cap of {MAX_BRUTE_FORCE_VARS}"
        )
    locals_and_ranks = []
    for c in bcs.constraints:
        sat = c.satisfying_set()
        ranks = np.fromiter(
            (sum((row[q] == +1) << q for q in range(len(c.scope))) for row in sat),
            dtype=np.int64,
            count=len(sat),
        )
        locals_and_ranks.append((c.scope, ranks))
    chunk = 1 << 20
    for start in range(0, 2**n, chunk):
        ranks = np.arange(start, min(start + chunk, 2**n), dtype=np.int64)
        alive = np.ones(len(ranks), dtype=bool)
        for scope, sat_ranks in locals_and_ranks:
            local = np.zeros(len(ranks), dtype=np.int64)
            for q, v in enumerate(scope):
                local |= ((ranks >> v) & 1) << q
            alive &= np.isin(local, sat_ranks)
            if not alive.any():
                break
        if alive.any():
            return signs_from_rank(int(ranks[alive][0]), n)
    return None


def parity_table(arity: int, target: int) -> frozenset[tuple[int, ...]]:
    """Sign tuples whose product equals target (+1 or -1)."""
    if target not in (+1, -1):
        raise ValueError("target must be +1 or -1")
    return frozenset(
        row for row in product((-1, +1), repeat=arity) if prod(row) == target
    )


def product_circuit(indices: Sequence[int]) -> Circuit:
    """Circuit true iff the product of the given local variables is +1."""
    if not indices:
        return circuits.Const(True)
    acc: Circuit = circuits.Var(indices[0])
    for i in indices[1:]:
        acc = circuits.Not(circuits.Xor(acc, circuits.Var(i)))
    return acc


def magic_square(representation: str = "table") -> Bcs:
    """The 3x3 parity grid: rows multiply to +1, columns to +1, +1, -1.

    Variable ids are 3*row + col.  Classically unsatisfiable (the row
    constraints force the total product to +1, the columns to -1), yet a
    perfect operator assignment exists, which is what makes it the stock
    example throughout this package.
    """
    groups = [tuple(3 * r + c for c in range(3)) for r in range(3)] + [
        tuple(3 * r + c for r in range(3)) for c in range(3)
    ]
    targets = [+1, +1, +1, +1, +1, -1]
    constraints = []
    for scope, target in zip(groups, targets):
        if representation == "table":
            constraints.append(Constraint(scope, table=parity_table(3, target)))
        elif representation == "circuit":
            circ = product_circuit(range(3))
            if target == -1:
                circ = circuits.Not(circ)
            constraints.append(Constraint(scope, circuit=circ))
        else:
            raise ValueError(f"unknown representation {representation!r}")
    return Bcs(9, tuple(constraints))


# ---------------------------------------------------------------------------
# DIMACS CNF input


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    """(num_vars, clauses) from DIMACS CNF; literals keep their signs."""
    num_vars: int | None = None
    declared = 0
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("p"):
            if num_vars is not None:
                raise ParseError(f"line {lineno}: duplicate problem line")
            fields = stripped.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise ParseError(f"line {lineno}: expected 'p cnf <vars> <clauses>'")
            try:
                num_vars, declared = int(fields[2]), int(fields[3])
            except ValueError:
                raise ParseError(f"line {lineno}: non-numeric problem line") from None
            continue
        if num_vars is None:
            raise ParseError(f"line {lineno}: clause before the problem line")
        for token in stripped.split():
            try:
                lit = int(token)
            except ValueError:
                raise ParseError(f"line {lineno}: bad token {token!r}") from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                if abs(lit) > num_vars:
                    raise ParseError(
                        f"line {lineno}: literal {lit} exceeds {num_vars} variables"
                    )
                current.append(lit)
    if num_vars is None:
        raise ParseError("missing problem line")
    if current:
        raise ParseError("last clause is not 0-terminated")
    if len(clauses) != declared:
        raise ParseError(
            f"problem line declares {declared} clauses, found {len(clauses)}"
        )
    return num_vars, clauses


def bcs_from_cnf(text: str, c_max: int = DEFAULT_MAX_SCOPE) -> Bcs:
    """Constraint system from DIMACS CNF text; +1 plays the role of true.

    Clauses turn into balanced ORs of literals rather than tables so that
    downstream branching-program compilation sees the clause's own depth,
    not the depth of a disjunctive normal form recovered from a table.
    Clauses mentioning more than c_max distinct variables are refused.
    """
    num_vars, clauses = parse_dimacs(text)
    constraints = []
    for idx, clause in enumerate(clauses):
        scope: list[int] = []
        for lit in clause:
            v = abs(lit) - 1
            if v not in scope:
                scope.append(v)
        if len(scope) > c_max:
            raise ScopeTooLarge(
                f"clause {idx + 1} mentions {len(scope)} variables, over the "
                f"limit of {c_max}"
            )
        literals: list[Circuit] = [
            circuits.Var(scope.index(abs(lit) - 1))
            if lit > 0
            else circuits.Not(circuits.Var(scope.index(abs(lit) - 1)))
            for lit in clause
        ]
        circ = circuits.balanced(literals, circuits.Or) if literals else circuits.Const(False)
        constraints.append(Constraint(tuple(scope), circuit=circ))
    return Bcs(num_vars, tuple(constraints), c_max=c_max)


# ---------------------------------------------------------------------------
# JSON round-trip


def relation_to_json(r: Relation) -> dict:
    data: dict = {"op": r.op}
    if r.op == "pin":
        data["plus"], data["minus"] = r.plus, r.minus
    elif r.op == "prop":
        data["left"], data["right"] = r.left, r.right
    elif r.op == "prod":
        data["target"] = r.target
    return data


def relation_from_json(data: object) -> Relation:
    if not isinstance(data, dict) or "op" not in data:
        raise ParseError(f"relation must be an object with 'op': {data!r}")
    op = data["op"]
    try:
        if op == "pin":
            return Relation("pin", plus=data["plus"], minus=data["minus"])
        if op == "prop":
            return Relation("prop", left=bool(data["left"]), right=bool(data["right"]))
        if op == "prod":
            return Relation("prod", target=data["target"])
        if op == "free":
            return Relation("free")
    except (KeyError, TypeError, ValueError) as err:
        raise ParseError(f"bad relation {data!r}: {err}") from None
    raise ParseError(f"unknown relation op {op!r}")


def constraint_to_json(c: Constraint) -> dict:
    data: dict = {"vars": list(c.scope)}
    if c.copies != 1:
        data["copies"] = c.copies
    if c.table is not None:
        data["table"] = [list(row) for row in sorted(c.table)]
    elif c.circuit is not None:
        data["circuit"] = circuits.to_json(c.circuit)
    else:
        data["relation"] = relation_to_json(c.relation)
    return data


def constraint_from_json(data: object) -> Constraint:
    if not isinstance(data, dict) or "vars" not in data:
        raise ParseError(f"constraint must be an object with 'vars': {data!r}")
    scope = data["vars"]
    if not isinstance(scope, list) or not all(isinstance(v, int) for v in scope):
        raise ParseError(f"'vars' must be a list of integers: {scope!r}")
    copies = data.get("copies", 1)
    if not isinstance(copies, int):
        raise ParseError(f"'copies' must be an integer: {copies!r}")
    kinds = sum(key in data for key in ("table", "circuit", "relation"))
    if kinds != 1:
        raise ParseError(
            "constraint needs exactly one of 'table', 'circuit', or 'relation'"
        )
    if "table" in data:
        rows = data["table"]
        if not isinstance(rows, list):
            raise ParseError(f"'table' must be a list of rows: {rows!r}")
        table = frozenset(tuple(row) for row in rows)
        return Constraint(tuple(scope), table=table, copies=copies)
    if "circuit" in data:
        return Constraint(
            tuple(scope), circuit=circuits.from_json(data["circuit"]), copies=copies
        )
    return Constraint(tuple(scope), relation=relation_from_json(data["relation"]))


def to_json(bcs: Bcs) -> dict:
    data: dict = {
        "n": bcs.num_vars,
        "constraints": [constraint_to_json(c) for c in bcs.constraints],
    }
    if bcs.c_max != DEFAULT_MAX_SCOPE:
        data["c_max"] = bcs.c_max
    if bcs.names is not None:
        data["names"] = list(bcs.names)
    return data


def from_json(data: object) -> Bcs:
    if not isinstance(data, dict):
        raise ParseError(f"system must be a JSON object: {data!r}")
    try:
        n, raw = data["n"], data["constraints"]
    except KeyError as missing:
        raise ParseError(f"system is missing field {missing}") from None
    if not isinstance(n, int) or not isinstance(raw, list):
        raise ParseError("'n' must be an integer and 'constraints' a list")
    c_max = data.get("c_max", DEFAULT_MAX_SCOPE)
    if not isinstance(c_max, int):
        raise ParseError(f"'c_max' must be an integer: {c_max!r}")
    names = data.get("names")
    if names is not None and (
        not isinstance(names, list) or not all(isinstance(s, str) for s in names)
    ):
        raise ParseError(f"'names' must be a list of strings: {names!r}")
    return Bcs(
        n,
        tuple(constraint_from_json(c) for c in raw),
        c_max=c_max,
        names=tuple(names) if names is not None else None,
    )


def dumps(bcs: Bcs) -> str:
    return json.dumps(to_json(bcs), indent=2, sort_keys=True)


def loads(text: str) -> Bcs:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err}") from None
    return from_json(data)
