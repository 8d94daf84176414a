"""Batch command line: build systems, transform them, value and run games.

Every command is deterministic given its flags; the only randomness
source is --seed, fanned out through named substreams.  Outputs are
JSON (artifacts, transcripts) or short fixed-format report lines, and
rerunning a command with the same inputs reproduces its output byte for
byte.  Exit codes: 0 on success (and, for zk-test, only if the whole
suite passes), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
from itertools import product
from pathlib import Path

from . import games, quantum
from .bcs import Bcs, brute_force_satisfiable
from .errors import BcsGamesError, TooLarge
from .games import Game, best_classical_strategies, classical_value
from .harness import (
    ProbeReport,
    deterministic_sampler,
    dishonest_probe,
    dishonest_verifier,
    honest_verifier,
    run_protocol,
    strategy_sampler,
)
from .pipeline import (
    PipelineResult,
    apply_passes,
    load_artifact,
    render_artifact,
)
from .rng import substream
from .samplers import (
    HonestCcSampler,
    HonestObliviousSampler,
    HonestTableauSampler,
    TableauSimulator,
    randomizer_clause_questions,
    sim_oracularized,
    sim_parallel,
    statistical_distance,
    uniformity_test,
)
from .tableau import RECOMMENDED_DEGREE, RECOMMENDED_ROWS

MAX_BRUTE_FORCE_VARS = 24


# ---------------------------------------------------------------------------
# Shared plumbing


def _add_source_args(p: argparse.ArgumentParser, with_passes: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", help="named example system (magic-square)")
    src.add_argument("--cnf", help="path to a DIMACS CNF file")
    src.add_argument("--artifact", dest="artifact",
                     help="path to an artifact JSON whose recipe is replayed")
    if with_passes:
        p.add_argument("--pass", dest="passes", action="append", default=[],
                       metavar="PASS",
                       help="transform pass, e.g. cv, repeat:2, pzk:l=8,k=9; "
                            "repeatable, applied in order")


def _load_recipe(args) -> tuple[dict, list[str]]:
    if args.artifact:
        text = Path(args.artifact).read_text()
        source, passes = load_artifact(text)
        return source, passes + list(getattr(args, "passes", []))
    if args.builtin:
        source = {"builtin": args.builtin}
    else:
        source = {"dimacs": Path(args.cnf).read_text()}
    return source, list(getattr(args, "passes", []))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _witness(system: Bcs) -> tuple[int, ...]:
    if system.num_vars > MAX_BRUTE_FORCE_VARS:
        raise TooLarge(
            f"{system.num_vars} variables is too many to search for a witness"
        )
    witness = brute_force_satisfiable(system)
    if witness is None:
        raise BcsGamesError("system is unsatisfiable; no honest prover exists")
    return witness


# ---------------------------------------------------------------------------
# Provers for cmd_run


def _honest_base(result: PipelineResult):
    if result.tableau is not None:
        return HonestTableauSampler(result.tableau, _witness(result.underlying))
    witness = _witness(result.underlying)
    degree = next(
        (args[0] for name, args, _ in result.stages if name == "obliviate"), None
    )
    if degree is None:
        return HonestCcSampler(result.underlying, witness)
    lifted = next(obj for name, _, obj in result.stages if name == "obliviate")
    return HonestObliviousSampler(lifted, witness, degree)


def _build_prover(result: PipelineResult, kind: str):
    game_passes = [
        (name, args, obj)
        for name, args, obj in result.stages
        if name in ("cc", "cv", "oracularize", "repeat")
    ]
    if not game_passes:
        raise BcsGamesError("running a protocol needs a game pass (cc or cv)")
    if kind == "classical":
        if not isinstance(result.obj, Game):
            raise BcsGamesError("classical prover needs an explicit game")
        _, fa, fb = best_classical_strategies(result.obj)
        return deterministic_sampler(fa, fb)
    if kind == "pauli":
        if result.source != {"builtin": "magic-square"}:
            raise BcsGamesError("the pauli prover plays magic-square games only")
        names = [name for name, _, _ in game_passes]
        strat = quantum.magic_square_strategy()
        if names == ["cv"]:
            strat = quantum.cv_strategy_from_cc(strat, result.underlying)
        elif names != ["cc"]:
            raise BcsGamesError("the pauli prover plays plain cc or cv games only")
        return strategy_sampler(strat)
    if kind == "simulator":
        if result.tableau is None:
            raise BcsGamesError(
                "the simulator prover needs a tableau or pzk pass"
            )
        sampler = TableauSimulator(result.tableau)
    elif kind == "honest":
        sampler = _honest_base(result)
    else:
        raise BcsGamesError(f"unknown prover {kind!r}")

    previous_game: Game | None = None
    for name, args, obj in game_passes:
        if name in ("cc", "cv"):
            # both base samplers answer constraint and variable questions
            pass
        elif name == "oracularize":
            if previous_game is None:
                raise BcsGamesError("oracularize pass with no game before it")
            sampler = sim_oracularized(sampler, previous_game.mu)
        elif name == "repeat":
            sampler = sim_parallel(sampler, args[0])
        if isinstance(obj, Game):
            previous_game = obj
    return sampler


# ---------------------------------------------------------------------------
# Commands


def cmd_build(args) -> int:
    source, passes = _load_recipe(args)
    if passes:
        raise BcsGamesError("build takes no passes; use transform")
    result = apply_passes(source, [])
    _emit(render_artifact(result), args.out)
    return 0


def cmd_transform(args) -> int:
    source, passes = _load_recipe(args)
    result = apply_passes(source, passes)
    _emit(render_artifact(result), args.out)
    return 0


def cmd_value(args) -> int:
    source, passes = _load_recipe(args)
    result = apply_passes(source, passes)
    game = result.game
    if game is None:
        raise BcsGamesError("value needs a game; add a cc or cv pass")
    if args.strategy is None:
        v = classical_value(game)
        print(f"classical value: {v} ({float(v):.10f})")
    elif args.strategy == "pauli":
        if result.source != {"builtin": "magic-square"}:
            raise BcsGamesError("strategy 'pauli' applies to magic-square games")
        strat = quantum.magic_square_strategy()
        if any(name == "cv" for name, _, _ in result.stages):
            strat = quantum.cv_strategy_from_cc(strat, result.underlying)
        v = quantum.strategy_value(game, strat)
        print(f"strategy value: {v:.12f}")
    else:
        raise BcsGamesError(f"unknown strategy {args.strategy!r}")
    return 0


def cmd_zk_test(args) -> int:
    source, passes = _load_recipe(args)
    result = apply_passes(source, passes)
    if result.tableau is None:
        raise BcsGamesError("zk-test needs a tableau or pzk pass")
    tab = result.tableau
    honest = HonestTableauSampler(tab, _witness(result.underlying))
    sim = TableauSimulator(tab)
    failures = 0

    def line(ok: bool | None, name: str, detail: str) -> None:
        nonlocal failures
        status = "PASS" if ok else "SKIP" if ok is None else "FAIL"
        failures += status == "FAIL"
        print(f"{status} {name}: {detail}")

    copies = list(range(tab.underlying_vars * tab.degree))
    subsets = [(c,) for c in copies]
    subsets += [(copies[i], copies[i + 1]) for i in range(len(copies) - 1)]
    for uv in range(tab.underlying_vars):
        subsets.append(tuple(tab.copy_ids(uv)[: tab.degree - 1]))
    checked = skipped = 0
    worst = 0.0
    rng = substream(args.seed, "zk")
    for subset in subsets:
        rep = uniformity_test(honest, subset, exact=args.exact,
                              rounds=args.rounds, rng=rng)
        if not rep.applicable:
            skipped += 1
            continue
        checked += 1
        if rep.distance is not None:
            worst = max(worst, rep.distance)
        if rep.passed is not True:
            line(False, "uniformity", f"subset {subset} deviates: {rep}")
            break
    else:
        mode = "exact" if args.exact else "sampling"
        line(True, "uniformity",
             f"{checked} oblivious subsets uniform ({mode}), {skipped} inapplicable")

    questions = randomizer_clause_questions(tab)
    questions += [("var", v) for v in range(len(copies))]
    fidelity_checked = fidelity_skipped = 0
    bad = None
    for q in questions:
        try:
            tv = statistical_distance(
                honest.question_distribution(q), sim.question_distribution(q)
            )
        except TooLarge:
            fidelity_skipped += 1
            continue
        fidelity_checked += 1
        if tv != 0.0:
            bad = (q, tv)
            break
    if bad:
        line(False, "simulator-fidelity", f"question {bad[0]} has tv={bad[1]}")
    else:
        line(True, "simulator-fidelity",
             f"{fidelity_checked} question distributions match exactly, "
             f"{fidelity_skipped} too large to enumerate")

    strict = tab.rows >= RECOMMENDED_ROWS and tab.degree >= RECOMMENDED_DEGREE
    probe: ProbeReport = dishonest_probe(honest, strict=False)
    if probe.passed:
        line(strict or None, "dishonest-probe",
             f"{probe.pairs_checked} adversarial pairs, no joint leak "
             f"at rows={tab.rows}, degree={tab.degree}")
    else:
        v = probe.violations[0]
        line(False, "dishonest-probe",
             f"violation: questions {v.pair} jointly expose {v.subset} "
             f"(vars {v.covered_vars} fully covered, tv={v.distance})")

    t = run_protocol(games.cv_game(tab.system), honest, rounds=min(args.rounds, 500),
                     seed=args.seed, label="zk-test")
    line(t.value == 1.0, "completeness",
         f"honest prover won {t.value:.4f} of {len(t.rounds)} rounds")

    print(f"{'FAIL' if failures else 'PASS'} suite: {failures} failing check(s)")
    return 1 if failures else 0


def cmd_run(args) -> int:
    source, passes = _load_recipe(args)
    result = apply_passes(source, passes)
    game = result.game
    if game is None:
        raise BcsGamesError("run needs an explicit game; add a cc or cv pass")
    prover = _build_prover(result, args.prover)
    if args.policy == "honest":
        policy = honest_verifier()
    else:
        support = set(game.support())
        off = [
            (x, y)
            for x, y in product(game.questions_a, game.questions_b)
            if (x, y) not in support
        ][:16]
        if not off:
            raise BcsGamesError("game has full support; nothing dishonest to pose")
        policy = dishonest_verifier(off)
    label = (source.get("builtin") or "cnf") + "".join(f"+{p}" for p in passes)
    transcript = run_protocol(
        game, prover, rounds=args.rounds, seed=args.seed,
        policy=policy, jobs=args.jobs, label=label,
    )
    _emit(transcript.to_json(), args.out)
    if args.out:
        print(
            f"value {transcript.value:.6f} over {transcript.scored} scored rounds"
            f" ({transcript.declined} declined)"
        )
    return 0


# ---------------------------------------------------------------------------
# Argument wiring


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcsgames",
        description="Build, transform, value, and run constraint-system games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct a system and emit its artifact")
    _add_source_args(p, with_passes=False)
    p.add_argument("--out", help="artifact path (default: stdout)")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("transform", help="apply passes and emit the artifact")
    _add_source_args(p)
    p.add_argument("--seed", type=int, default=0, help="unused; accepted for symmetry")
    p.add_argument("--out", help="artifact path (default: stdout)")
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("value", help="compute a game value")
    _add_source_args(p)
    p.add_argument("--classical", action="store_true",
                   help="exact optimal classical value (default)")
    p.add_argument("--strategy", help="named strategy to evaluate (pauli)")
    p.set_defaults(fn=cmd_value)

    p = sub.add_parser("zk-test", help="zero-knowledge test suite on a tableau")
    _add_source_args(p)
    p.add_argument("--exact", action=argparse.BooleanOptionalAction, default=True,
                   help="exact distribution comparisons (--no-exact samples)")
    p.add_argument("--rounds", type=int, default=20000,
                   help="rounds per sampled check")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_zk_test)

    p = sub.add_parser("run", help="play protocol rounds and emit the transcript")
    _add_source_args(p)
    p.add_argument("--prover", default="honest",
                   choices=("honest", "simulator", "classical", "pauli"))
    p.add_argument("--policy", default="honest", choices=("honest", "dishonest"))
    p.add_argument("--rounds", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="transcript path (default: stdout)")
    p.set_defaults(fn=cmd_run)

    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except BcsGamesError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
