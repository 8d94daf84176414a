"""Named sources, transform passes, and the JSON artifact format.

A build is described by a source (a named builtin system or DIMACS CNF
text) plus an ordered list of passes.  Artifacts record exactly that
recipe together with size reports and a serialization of the final
object, so any later command can reconstruct the full in-memory object
by replaying the recipe.  Replay is cheap at the sizes this package
targets and keeps callables (predicates, answer sets) out of the files.

Artifacts are a single JSON object with ``schema_version`` 1, rendered
compactly with sorted keys and a trailing newline, so identical recipes
give byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import bcs as bcs_mod
from . import tableau as tableau_mod
from .bcs import Bcs
from .errors import ParseError, PassSpecError
from .games import Game, cc_game, cv_game
from .tableau import TableauBcs
from .transforms import (
    RepeatedGameHandle,
    TransformReport,
    measures,
    oracularize,
    parallel_repeat,
    question_to_json,
    report,
)

SCHEMA_VERSION = 1
MU_TABLE_LIMIT = 10_000

#: pass name -> ordered parameter names
PASS_PARAMS: dict[str, tuple[str, ...]] = {
    "cc": (),
    "cv": (),
    "oracularize": (),
    "repeat": ("k",),
    "obliviate": ("k",),
    "tableau": ("l",),
    "pzk": ("l", "k"),
}

BUILTIN_SYSTEMS = {
    "magic-square": bcs_mod.magic_square,
}


def parse_pass(text: str) -> tuple[str, tuple[int, ...]]:
    """Parse one pass spec, e.g. ``cv``, ``repeat:2``, or ``pzk:l=8,k=9``.

    Parameters may be given positionally or by name; both of the above
    parametrized spellings are accepted.
    """
    name, sep, tail = text.partition(":")
    params = PASS_PARAMS.get(name)
    if params is None:
        known = ", ".join(sorted(PASS_PARAMS))
        raise PassSpecError(f"unknown pass {name!r} (known: {known})")
    tokens = tail.split(",") if sep and tail else []
    if len(tokens) != len(params):
        want = ",".join(params) if params else "none"
        raise PassSpecError(
            f"pass {name!r} takes parameters ({want}), got {tail!r}"
        )
    values: dict[str, int] = {}
    for pos, token in enumerate(tokens):
        key, eq, raw = token.partition("=")
        target = key.strip() if eq else params[pos]
        if target not in params:
            raise PassSpecError(f"unknown parameter {target!r} for pass {name!r}")
        if target in values:
            raise PassSpecError(f"parameter {target!r} given twice in {text!r}")
        try:
            values[target] = int(raw if eq else token)
        except ValueError:
            raise PassSpecError(f"non-integer parameter in {text!r}") from None
    if set(values) != set(params):
        missing = ", ".join(sorted(set(params) - set(values)))
        raise PassSpecError(f"pass {name!r} is missing parameter(s) {missing}")
    args = tuple(values[p] for p in params)
    if any(a < 1 for a in args):
        raise PassSpecError(f"parameters in {text!r} must be positive")
    return name, args


@dataclass
class PipelineResult:
    source: dict
    passes: list[str]
    obj: object
    underlying: Bcs
    tableau: TableauBcs | None
    reports: list[TransformReport]
    #: (pass name, args, object after the pass), one entry per pass
    stages: list[tuple[str, tuple[int, ...], object]]

    @property
    def game(self) -> Game | None:
        return self.obj if isinstance(self.obj, Game) else None


def build_source(source: dict) -> Bcs:
    if "builtin" in source:
        name = source["builtin"]
        try:
            return BUILTIN_SYSTEMS[name]()
        except KeyError:
            known = ", ".join(sorted(BUILTIN_SYSTEMS))
            raise ParseError(f"unknown builtin {name!r} (known: {known})") from None
    if "dimacs" in source:
        return bcs_mod.bcs_from_cnf(source["dimacs"])
    raise ParseError("source must name a builtin or carry dimacs text")


def _expect(stage, kinds: tuple[type, ...], name: str):
    if not isinstance(stage, kinds):
        have = type(stage).__name__
        raise PassSpecError(f"pass {name!r} cannot apply to a {have}")


def apply_passes(source: dict, passes: list[str]) -> PipelineResult:
    """Build the source system and run the passes over it, in order.

    System passes stack until a game pass consumes the system; game
    passes stack after that.  A tableau stage keeps its structured form
    on the side even once a game pass wraps the underlying system, since
    zero-knowledge tooling needs the cell layout, not just the clauses.
    """
    system = build_source(source)
    stage: object = system
    tab: TableauBcs | None = None
    reports: list[TransformReport] = []
    stages: list[tuple[str, tuple[int, ...], object]] = []
    for text in passes:
        name, args = parse_pass(text)
        if name == "obliviate":
            _expect(stage, (Bcs,), name)
            out = tableau_mod.obliviate(stage, args[0])
            reports.append(report(name, {"degree": args[0]}, stage, out))
            stage = out
        elif name == "tableau":
            _expect(stage, (Bcs,), name)
            tab = tableau_mod.tableau(stage, rows=args[0], include_trivial_pairs=True)
            reports.append(report(name, {"rows": args[0]}, stage, tab.system))
            stage = tab
        elif name == "pzk":
            _expect(stage, (Bcs,), name)
            tab = tableau_mod.pzk_transform(stage, rows=args[0], degree=args[1])
            reports.append(
                report(name, {"rows": args[0], "degree": args[1]}, stage, tab.system)
            )
            stage = tab
        elif name in ("cc", "cv"):
            _expect(stage, (Bcs, TableauBcs), name)
            sys_obj = stage.system if isinstance(stage, TableauBcs) else stage
            out = cc_game(sys_obj) if name == "cc" else cv_game(sys_obj)
            reports.append(report(name, {}, sys_obj, out))
            stage = out
        elif name == "oracularize":
            _expect(stage, (Game,), name)
            out = oracularize(stage)
            reports.append(report(name, {}, stage, out))
            stage = out
        elif name == "repeat":
            _expect(stage, (Game,), name)
            out = parallel_repeat(stage, args[0])
            reports.append(report(name, {"rounds": args[0]}, stage, out))
            stage = out
        stages.append((name, args, stage))
    return PipelineResult(
        source=dict(source),
        passes=list(passes),
        obj=stage,
        underlying=system,
        tableau=tab,
        reports=reports,
        stages=stages,
    )


# ---------------------------------------------------------------------------
# Artifact serialization


def _game_payload(g: Game, kind: str) -> dict:
    data: dict = {
        "kind": kind,
        "questions_a": [question_to_json(q) for q in g.questions_a],
        "questions_b": [question_to_json(q) for q in g.questions_b],
        "measures": measures(g),
    }
    support = g.support()
    if len(support) <= MU_TABLE_LIMIT:
        data["mu"] = [
            [question_to_json(x), question_to_json(y), [w.numerator, w.denominator]]
            for (x, y), w in g.mu.items()
            if w > 0
        ]
    else:
        data["mu_support"] = len(support)
    return data


def artifact_payload(result: PipelineResult) -> dict:
    payload: dict = {
        "schema_version": SCHEMA_VERSION,
        "source": result.source,
        "passes": result.passes,
        "reports": [r.to_json() for r in result.reports],
    }
    if result.tableau is not None:
        payload["tableau"] = {
            "rows": result.tableau.rows,
            "degree": result.tableau.degree,
            "program_lengths": [len(p) for p in result.tableau.programs],
        }
    obj = result.obj
    if isinstance(obj, TableauBcs):
        payload["bcs"] = bcs_mod.to_json(obj.system)
    elif isinstance(obj, Bcs):
        payload["bcs"] = bcs_mod.to_json(obj)
    elif isinstance(obj, Game):
        kind = next(
            (parse_pass(t)[0] for t in reversed(result.passes)
             if parse_pass(t)[0] in ("cc", "cv", "oracularize", "repeat")),
            "game",
        )
        payload["game"] = _game_payload(obj, kind)
    elif isinstance(obj, RepeatedGameHandle):
        payload["game"] = {"kind": "sampled_repeat", "measures": measures(obj)}
    return payload


def render_artifact(result: PipelineResult) -> str:
    return json.dumps(artifact_payload(result), sort_keys=True,
                      separators=(",", ":")) + "\n"


def load_artifact(text: str) -> tuple[dict, list[str]]:
    """(source, passes) recipe from an artifact; version-checked."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"artifact is not valid JSON: {e}") from None
    if not isinstance(payload, dict):
        raise ParseError("artifact must be a JSON object")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}")
    source = payload.get("source")
    passes = payload.get("passes", [])
    if not isinstance(source, dict):
        raise ParseError("artifact is missing its source")
    if not isinstance(passes, list) or not all(isinstance(p, str) for p in passes):
        raise ParseError("artifact passes must be a list of strings")
    return source, passes
