"""Fan-in-two boolean circuits over sign-valued variables.

Variables take values in {+1, -1} with +1 read as true.  A circuit node
refers to variables by *local* index, i.e. position within the scope of
whatever constraint owns it; the owning constraint maps local indices to
global variable ids.

``depth`` counts binary gates (AND/OR/XOR) on the deepest path; negations
and leaves are free.  Branching-program compilation promises length exactly
4**depth for AND/OR/NOT circuits, which is why XOR is kept as a first-class
node here but rewritten by :func:`lower` before compilation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence, Union

from .errors import ParseError, ScopeTooLarge

Circuit = Union["Var", "Const", "Not", "And", "Or", "Xor"]


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: Circuit


@dataclass(frozen=True)
class And:
    left: Circuit
    right: Circuit


@dataclass(frozen=True)
class Or:
    left: Circuit
    right: Circuit


@dataclass(frozen=True)
class Xor:
    left: Circuit
    right: Circuit


def evaluate(c: Circuit, values: Sequence[int]) -> bool:
    if isinstance(c, Var):
        v = values[c.index]
        if v not in (+1, -1):
            raise ValueError(f"variable value must be +1 or -1, got {v!r}")
        return v == +1
    if isinstance(c, Const):
        return c.value
    if isinstance(c, Not):
        return not evaluate(c.arg, values)
    if isinstance(c, And):
        return evaluate(c.left, values) and evaluate(c.right, values)
    if isinstance(c, Or):
        return evaluate(c.left, values) or evaluate(c.right, values)
    if isinstance(c, Xor):
        return evaluate(c.left, values) != evaluate(c.right, values)
    raise TypeError(f"not a circuit node: {c!r}")


def variables(c: Circuit) -> frozenset[int]:
    if isinstance(c, Var):
        return frozenset([c.index])
    if isinstance(c, Const):
        return frozenset()
    if isinstance(c, Not):
        return variables(c.arg)
    return variables(c.left) | variables(c.right)


def depth(c: Circuit) -> int:
    """Binary-gate depth.  NOT and leaves contribute nothing."""
    if isinstance(c, (Var, Const)):
        return 0
    if isinstance(c, Not):
        return depth(c.arg)
    return 1 + max(depth(c.left), depth(c.right))


def lower(c: Circuit) -> Circuit:
    """Rewrite XOR nodes into AND/OR/NOT form.

    x XOR y becomes (x AND NOT y) OR (NOT x AND y), costing one extra
    level of binary-gate depth per XOR node.
    """
    if isinstance(c, (Var, Const)):
        return c
    if isinstance(c, Not):
        return Not(lower(c.arg))
    left, right = lower(c.left), lower(c.right)
    if isinstance(c, And):
        return And(left, right)
    if isinstance(c, Or):
        return Or(left, right)
    return Or(And(left, Not(right)), And(Not(left), right))


def balanced(nodes: list[Circuit], combine: type) -> Circuit:
    """Fold a nonempty list into a balanced fan-in-2 tree."""
    while len(nodes) > 1:
        merged = [
            combine(nodes[i], nodes[i + 1]) if i + 1 < len(nodes) else nodes[i]
            for i in range(0, len(nodes), 2)
        ]
        nodes = merged
    return nodes[0]


def from_satisfying_set(arity: int, satisfying: frozenset[tuple[int, ...]]) -> Circuit:
    """Balanced DNF circuit accepting exactly the given sign tuples."""
    if arity < 0:
        raise ValueError("arity must be nonnegative")
    if not satisfying:
        return Const(False)
    if len(satisfying) == 2**arity:
        return Const(True)
    minterms: list[Circuit] = []
    for row in sorted(satisfying):
        if len(row) != arity:
            raise ValueError(f"tuple {row!r} does not match arity {arity}")
        literals: list[Circuit] = [
            Var(i) if v == +1 else Not(Var(i)) for i, v in enumerate(row)
        ]
        minterms.append(balanced(literals, And) if literals else Const(True))
    return balanced(minterms, Or)


def truth_table(c: Circuit, arity: int) -> frozenset[tuple[int, ...]]:
    """Satisfying sign tuples, enumerated over all 2**arity assignments."""
    if arity > 20:
        raise ScopeTooLarge(f"cannot enumerate 2**{arity} assignments")
    return frozenset(
        row for row in product((-1, +1), repeat=arity) if evaluate(c, row)
    )


def to_json(c: Circuit) -> dict:
    if isinstance(c, Var):
        return {"op": "var", "index": c.index}
    if isinstance(c, Const):
        return {"op": "const", "value": c.value}
    if isinstance(c, Not):
        return {"op": "not", "arg": to_json(c.arg)}
    name = {And: "and", Or: "or", Xor: "xor"}[type(c)]
    return {"op": name, "left": to_json(c.left), "right": to_json(c.right)}


def from_json(data: object) -> Circuit:
    if not isinstance(data, dict) or "op" not in data:
        raise ParseError(f"circuit node must be an object with an 'op': {data!r}")
    op = data["op"]
    try:
        if op == "var":
            index = data["index"]
            if not isinstance(index, int) or index < 0:
                raise ParseError(f"bad variable index: {index!r}")
            return Var(index)
        if op == "const":
            value = data["value"]
            if not isinstance(value, bool):
                raise ParseError(f"const value must be a boolean: {value!r}")
            return Const(value)
        if op == "not":
            return Not(from_json(data["arg"]))
        if op in ("and", "or", "xor"):
            node = {"and": And, "or": Or, "xor": Xor}[op]
            return node(from_json(data["left"]), from_json(data["right"]))
    except KeyError as missing:
        raise ParseError(f"circuit node {op!r} is missing field {missing}") from None
    raise ParseError(f"unknown circuit op: {op!r}")
