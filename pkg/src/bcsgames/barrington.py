"""Width-five permutation branching programs for circuit predicates.

A program is a word of instructions; instruction t names a local variable
and two S5 elements, contributing ``on_true`` when that variable is +1 and
``on_false`` otherwise.  The program *recognizes* a predicate with output
g when the word multiplies to g on accepted inputs and to the identity on
rejected ones.

Compilation follows the classic commutator scheme: a literal is a single
instruction, negation re-aims a subprogram at the inverse output and folds
a constant into its last instruction, and a conjunction is the commutator
A B A' B' of re-aimed subprograms (A', B' the instruction-wise inverses).
Subprograms are padded with do-nothing instructions so that every binary
gate combines equal halves; an AND/OR/NOT circuit of binary-gate depth d
therefore compiles to length exactly 4**d.

Product-lifted constraints get special leaves.  A lifted variable is the
product of k copies, and instructions mapping each copy to an involution
count the -1 copies, so the commutator with a fixed constant recognizes
the product sign in 2k instructions instead of 4**(lg k) or worse; leaves
then cost 2k and the whole predicate 2k * 4**d.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from . import circuits, s5
from .bcs import Constraint
from .circuits import And, Circuit, Const, Not, Or, Var
from .errors import ScopeTooLarge, UnsupportedGate


@dataclass(frozen=True)
class Instruction:
    var: int
    on_true: int
    on_false: int

    def output(self, value: int) -> int:
        if value == +1:
            return self.on_true
        if value == -1:
            return self.on_false
        raise ValueError(f"variable value must be +1 or -1, got {value!r}")


@dataclass(frozen=True)
class Program:
    instructions: tuple[Instruction, ...]
    output: int  # word value on accepted inputs; identity on rejected ones
    arity: int

    def __len__(self) -> int:
        return len(self.instructions)


def run_program(program: Program, values: Sequence[int]) -> int:
    if len(values) != program.arity:
        raise ValueError(f"expected {program.arity} values, got {len(values)}")
    acc = s5.IDENTITY
    for ins in program.instructions:
        acc = s5.mul(acc, ins.output(values[ins.var]))
    return acc


def _pad(instructions: list[Instruction], length: int) -> list[Instruction]:
    if len(instructions) > length:
        raise AssertionError("subprogram exceeded its length budget")
    if len(instructions) < length:
        var = instructions[-1].var if instructions else 0
        filler = Instruction(var, s5.IDENTITY, s5.IDENTITY)
        instructions = instructions + [filler] * (length - len(instructions))
    return instructions


def _fold_right(instructions: list[Instruction], g: int) -> list[Instruction]:
    last = instructions[-1]
    return instructions[:-1] + [
        Instruction(last.var, s5.mul(last.on_true, g), s5.mul(last.on_false, g))
    ]


def _conjugate(instructions: list[Instruction], theta: int) -> list[Instruction]:
    t_inv = s5.inv(theta)
    return [
        Instruction(
            ins.var,
            s5.word(t_inv, ins.on_true, theta),
            s5.word(t_inv, ins.on_false, theta),
        )
        for ins in instructions
    ]


def _literal_leaf(index: int, target: int) -> list[Instruction]:
    return [Instruction(index, target, s5.IDENTITY)]


def _product_leaf(index: int, target: int, copies: int) -> list[Instruction]:
    """Recognize "the product of this variable's copies is +1" in 2k steps."""
    offset = index * copies
    count = [Instruction(offset + t, s5.IDENTITY, s5.PARITY_TAU) for t in range(copies)]
    block1 = _fold_right(count, s5.PARITY_CONST)
    block2 = _fold_right(list(count), s5.inv(s5.PARITY_CONST))
    # The word is gamma on an odd number of -1 copies, identity on even;
    # re-aim at target**-1 and fold target to flip the polarity.
    theta = s5.conjugator(s5.PARITY_GAMMA, s5.inv(target))
    return _fold_right(_conjugate(block1 + block2, theta), target)


def pair_product_program(parity: int = +1, target: int = s5.SIGMA) -> Program:
    """A length-3 program recognizing ``x0 * x1 == parity``.

    Three instructions is minimal: a two-instruction program would force
    the rejected-input words to multiply the accepted word's inverse into
    itself, so the parity predicates need the extra read-back of x0.  The
    generic product leaf spends 2k=4 instructions on the same job; this
    one exists to exercise short tableaux.
    """
    if parity not in (+1, -1):
        raise ValueError("parity must be +1 or -1")
    if not s5.is_five_cycle(target):
        raise ValueError("target must be a five-cycle")
    theta = s5.conjugator(s5.inv(target), target)
    middle = (s5.IDENTITY, s5.inv(target))
    if parity == -1:
        middle = middle[::-1]
    return Program(
        (
            Instruction(0, s5.IDENTITY, s5.inv(theta)),
            Instruction(1, middle[0], middle[1]),
            Instruction(0, target, theta),
        ),
        target,
        2,
    )


def _compile(c: Circuit, target: int, length: int, copies: int) -> list[Instruction]:
    leaf_len = 1 if copies == 1 else 2 * copies
    if isinstance(c, Var):
        leaf = (
            _literal_leaf(c.index, target)
            if copies == 1
            else _product_leaf(c.index, target, copies)
        )
        return _pad(leaf, length)
    if isinstance(c, Const):
        g = target if c.value else s5.IDENTITY
        return _pad([Instruction(0, g, g)], length)
    if isinstance(c, Not):
        return _fold_right(_compile(c.arg, s5.inv(target), length, copies), target)
    if isinstance(c, Or):
        rewritten = Not(And(Not(c.left), Not(c.right)))
        return _compile(rewritten, target, length, copies)
    if isinstance(c, And):
        assert length % 4 == 0, "binary gate needs a length divisible by 4"
        a = _compile(c.left, s5.AND_ALPHA, length // 4, copies)
        b = _compile(c.right, s5.AND_BETA, length // 4, copies)
        a_inv = [Instruction(i.var, s5.inv(i.on_true), s5.inv(i.on_false)) for i in reversed(a)]
        b_inv = [Instruction(i.var, s5.inv(i.on_true), s5.inv(i.on_false)) for i in reversed(b)]
        theta = s5.conjugator(s5.AND_GAMMA, target)
        return _conjugate(a + b + a_inv + b_inv, theta)
    raise UnsupportedGate(f"not a circuit node: {c!r}")


def compile_circuit(c: Circuit, arity: int, target: int = s5.SIGMA) -> Program:
    """Program of length exactly 4**depth recognizing the circuit.

    XOR nodes are lowered to AND/OR/NOT first, so the exponent is the
    binary-gate depth of the lowered circuit.
    """
    if not s5.is_five_cycle(target):
        raise ValueError("output target must be a five-cycle")
    lowered = circuits.lower(c)
    used = circuits.variables(lowered)
    if (used and max(used) >= arity) or arity < 1:
        raise ValueError(f"circuit does not fit arity {arity}")
    length = 4 ** circuits.depth(lowered)
    return Program(tuple(_compile(lowered, target, length, 1)), target, arity)


def compile_constraint(constraint: Constraint, target: int = s5.SIGMA) -> Program:
    """Program over the constraint's full scope, product-lifting aware.

    For a lifted constraint the instruction count is 2k * 4**depth where k
    is the copy count and depth is the base circuit's binary-gate depth
    after XOR lowering.
    """
    if not s5.is_five_cycle(target):
        raise ValueError("output target must be a five-cycle")
    if not constraint.scope:
        raise ValueError("cannot compile a constraint with an empty scope")
    lowered = circuits.lower(constraint.as_circuit())
    k = constraint.copies
    length = (1 if k == 1 else 2 * k) * 4 ** circuits.depth(lowered)
    return Program(
        tuple(_compile(lowered, target, length, k)), target, len(constraint.scope)
    )


def recognizes(program: Program, predicate, arity: int) -> bool:
    """Exhaustively compare word values against a predicate on sign tuples."""
    if arity > 12:
        raise ScopeTooLarge(f"cannot enumerate 2**{arity} assignments")
    for values in product((-1, +1), repeat=arity):
        expected = program.output if predicate(values) else s5.IDENTITY
        if run_program(program, values) != expected:
            return False
    return True
