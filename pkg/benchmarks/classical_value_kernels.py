#!/usr/bin/env python3
"""Time the two exact classical-value kernels against each other.

Both kernels enumerate Alice's deterministic strategies and let Bob
best-respond, scoring in exact integer arithmetic; the numpy kernel
processes strategies in vectorized chunks while the python kernel is the
plain reference loop.  This script times both on a few built-in games and
checks that they agree, skipping the python kernel once the strategy
space gets large enough to be pointless to wait for.  Timings include
the shared best-response table construction, which dominates on the
constraint-constraint games; the kernel gap shows on games with many
strategies and cheap columns.

Run as: python3 benchmarks/classical_value_kernels.py [--repeats N]
"""

import argparse
import sys
import time
from math import prod

from bcsgames import bcs
from bcsgames.games import cc_game, classical_value, cv_game

CHAIN = "p cnf 7 6\n" + "".join(f"{i} -{i + 1} 0\n" for i in range(1, 7))


def cases():
    square = bcs.magic_square()
    yield "magic-square cc", cc_game(square)
    yield "or-clause cv", cv_game(bcs.bcs_from_cnf("p cnf 2 1\n1 2 0\n"))
    yield (
        "two-clause cv",
        cv_game(bcs.bcs_from_cnf("p cnf 3 2\n1 -2 3 0\n-1 2 0\n")),
    )
    yield "implication-chain cv", cv_game(bcs.bcs_from_cnf(CHAIN))
    yield "magic-square cv", cv_game(square)


def strategy_count(game):
    support = game.support()
    asked = [x for x in game.questions_a if any(p[0] == x for p in support)]
    return prod(len(game.answers_a(x)) for x in asked)


def best_of(fn, repeats):
    value, elapsed = None, None
    for _ in range(repeats):
        start = time.perf_counter()
        value = fn()
        took = time.perf_counter() - start
        elapsed = took if elapsed is None else min(elapsed, took)
    return value, elapsed


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="compare the numpy and python classical-value kernels"
    )
    parser.add_argument(
        "--repeats", type=int, default=3, help="best-of timing repeats"
    )
    parser.add_argument(
        "--python-cap",
        type=int,
        default=250_000,
        help="skip the python kernel above this many strategies",
    )
    args = parser.parse_args(argv)

    header = (
        f"{'game':<24} {'strategies':>10} {'numpy':>9} {'python':>9} "
        f"{'speedup':>8}  value"
    )
    print(header)
    print("-" * len(header))
    disagreements = 0
    for name, game in cases():
        count = strategy_count(game)
        fast, fast_t = best_of(
            lambda g=game: classical_value(g, kernel="numpy"), args.repeats
        )
        if count <= args.python_cap:
            slow, slow_t = best_of(
                lambda g=game: classical_value(g, kernel="python"), args.repeats
            )
            agree = fast == slow
            disagreements += not agree
            python_col = f"{slow_t:8.3f}s"
            speedup = f"{slow_t / fast_t:7.1f}x"
            value = str(fast) if agree else f"MISMATCH {fast} vs {slow}"
        else:
            python_col = "skipped"
            speedup = ""
            value = str(fast)
        print(
            f"{name:<24} {count:>10} {fast_t:8.3f}s {python_col:>9} "
            f"{speedup:>8}  {value}"
        )
    if disagreements:
        print(f"{disagreements} kernel disagreement(s)", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
