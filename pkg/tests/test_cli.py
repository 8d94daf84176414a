"""Command line and pipeline: recipes, artifacts, and exit codes."""

import json
import subprocess
import sys

import pytest

from bcsgames import pipeline
from bcsgames.bcs import Bcs
from bcsgames.cli import main
from bcsgames.errors import ParseError, PassSpecError
from bcsgames.games import Game

TINY_CNF = "p cnf 2 1\n1 2 0\n"
THREE_CNF = "p cnf 3 2\n1 -2 3 0\n-1 2 0\n"


def write_cnf(tmp_path, text, name="f.cnf"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# --- pass specs -------------------------------------------------------------


def test_parse_pass_positional_and_named_forms_agree():
    assert pipeline.parse_pass("cv") == ("cv", ())
    assert pipeline.parse_pass("repeat:2") == ("repeat", (2,))
    assert pipeline.parse_pass("repeat:k=2") == ("repeat", (2,))
    assert pipeline.parse_pass("pzk:l=8,k=9") == ("pzk", (8, 9))
    assert pipeline.parse_pass("pzk:8,9") == ("pzk", (8, 9))
    assert pipeline.parse_pass("pzk:k=9,l=8") == ("pzk", (8, 9))


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("mystery", "unknown pass"),
        ("cv:3", "takes parameters"),
        ("repeat", "takes parameters"),
        ("pzk:l=8", "takes parameters"),
        ("repeat:x=2", "unknown parameter"),
        ("pzk:l=8,l=9", "given twice"),
        ("repeat:two", "non-integer"),
        ("repeat:0", "must be positive"),
    ],
)
def test_parse_pass_rejects_bad_specs(text, fragment):
    with pytest.raises(PassSpecError, match=fragment):
        pipeline.parse_pass(text)


def test_unknown_pass_error_lists_the_known_ones():
    with pytest.raises(PassSpecError, match="pzk"):
        pipeline.parse_pass("nope")


# --- sources and pass ordering ------------------------------------------------


def test_build_source_validation():
    assert isinstance(pipeline.build_source({"builtin": "magic-square"}), Bcs)
    with pytest.raises(ParseError, match="magic-square"):
        pipeline.build_source({"builtin": "kochen-specker"})
    with pytest.raises(ParseError, match="source"):
        pipeline.build_source({})


def test_passes_must_respect_stage_types():
    source = {"dimacs": TINY_CNF}
    with pytest.raises(PassSpecError, match="cannot apply to a Bcs"):
        pipeline.apply_passes(source, ["oracularize"])
    with pytest.raises(PassSpecError, match="cannot apply to a Game"):
        pipeline.apply_passes(source, ["cv", "obliviate:3"])
    with pytest.raises(PassSpecError, match="repeat"):
        pipeline.apply_passes(source, ["repeat:2"])


def test_apply_passes_records_stages_and_underlying():
    result = pipeline.apply_passes({"dimacs": TINY_CNF}, ["obliviate:3", "cv"])
    assert [name for name, _, _ in result.stages] == ["obliviate", "cv"]
    assert result.underlying.num_vars == 2
    assert result.tableau is None
    lifted = result.stages[0][2]
    assert isinstance(lifted, Bcs) and lifted.num_vars == 6
    assert isinstance(result.game, Game)
    assert len(result.reports) == 2


# --- build and transform -------------------------------------------------------


def test_build_emits_a_replayable_artifact(tmp_path, capsys):
    out = tmp_path / "square.json"
    assert main(["build", "--builtin", "magic-square", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["schema_version"] == 1
    assert payload["source"] == {"builtin": "magic-square"}
    assert payload["passes"] == []
    assert payload["bcs"]["n"] == 9
    again = tmp_path / "again.json"
    assert main(["build", "--builtin", "magic-square", "--out", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()


def test_build_without_out_prints_the_artifact(capsys):
    assert main(["build", "--builtin", "magic-square"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema_version"] == 1


def test_build_rejects_passes():
    with pytest.raises(SystemExit):
        main(["build", "--builtin", "magic-square", "--pass", "cv"])


def test_malformed_cnf_reports_the_line(tmp_path, capsys):
    path = write_cnf(tmp_path, "p cnf 2 1\n1 3 0\n")
    assert main(["build", "--cnf", path]) == 2
    err = capsys.readouterr().err
    assert "error:" in err and "line 2" in err


def test_transform_artifacts_are_byte_identical_across_runs(tmp_path, capsys):
    path = write_cnf(tmp_path, THREE_CNF)
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    args = ["transform", "--cnf", path, "--pass", "pzk:l=8,k=9", "--pass", "cv"]
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    payload = json.loads(first.read_text())
    assert payload["passes"] == ["pzk:l=8,k=9", "cv"]
    assert payload["tableau"]["rows"] == 8
    assert payload["tableau"]["degree"] == 9
    # OR-circuit depths 2 and 1, with degree-9 product leaves: 2k * 4^d
    assert payload["tableau"]["program_lengths"] == [18 * 16, 18 * 4]
    reports = payload["reports"]
    assert [r["name"] for r in reports] == ["pzk", "cv"]
    assert reports[0]["after"]["kind"] == "bcs"
    assert reports[0]["after"]["variables"] > reports[0]["before"]["variables"]
    game_sizes = reports[1]["after"]
    assert game_sizes["kind"] == "game"
    assert game_sizes["max_question_bits"] > 0
    assert game_sizes["max_answer_bits"] > 0
    # the cv game over the tableau is too wide for an explicit mu table
    assert "mu" not in payload["game"]
    assert payload["game"]["mu_support"] > 10_000


def test_artifact_recipes_replay_and_extend(tmp_path, capsys):
    path = write_cnf(tmp_path, TINY_CNF)
    art = tmp_path / "lifted.json"
    assert main(["transform", "--cnf", path, "--pass", "obliviate:3",
                 "--out", str(art)]) == 0
    extended = tmp_path / "game.json"
    assert main(["transform", "--artifact", str(art), "--pass", "cv",
                 "--out", str(extended)]) == 0
    payload = json.loads(extended.read_text())
    assert payload["passes"] == ["obliviate:3", "cv"]
    direct = tmp_path / "direct.json"
    assert main(["transform", "--cnf", path, "--pass", "obliviate:3",
                 "--pass", "cv", "--out", str(direct)]) == 0
    assert extended.read_bytes() == direct.read_bytes()


# --- value ---------------------------------------------------------------------


def test_value_reports_exact_classical_optimum(capsys):
    assert main(["value", "--builtin", "magic-square", "--pass", "cc"]) == 0
    out = capsys.readouterr().out
    assert "classical value: 17/18" in out


def test_value_reports_strategy_values(capsys):
    assert main(["value", "--builtin", "magic-square", "--pass", "cv",
                 "--strategy", "pauli"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("strategy value: 1.0000000000")


def test_value_requires_a_game_and_known_strategy(tmp_path, capsys):
    assert main(["value", "--builtin", "magic-square"]) == 2
    assert "needs a game" in capsys.readouterr().err
    path = write_cnf(tmp_path, TINY_CNF)
    assert main(["value", "--cnf", path, "--pass", "cv",
                 "--strategy", "pauli"]) == 2
    assert "magic-square" in capsys.readouterr().err
    assert main(["value", "--builtin", "magic-square", "--pass", "cc",
                 "--strategy", "telepathy"]) == 2
    assert "unknown strategy" in capsys.readouterr().err


# --- zk-test ---------------------------------------------------------------------


def test_zk_test_passes_at_recommended_parameters(tmp_path, capsys):
    path = write_cnf(tmp_path, TINY_CNF)
    code = main(["zk-test", "--cnf", path, "--pass", "pzk:l=8,k=9"])
    out = capsys.readouterr().out
    assert code == 0, out
    lines = out.strip().splitlines()
    assert lines[-1] == "PASS suite: 0 failing check(s)"
    named = {line.split()[1].rstrip(":") for line in lines[:-1]}
    assert named == {
        "uniformity", "simulator-fidelity", "dishonest-probe", "completeness",
    }
    assert all(line.startswith("PASS") for line in lines)


def test_zk_test_flags_the_leak_at_small_parameters(tmp_path, capsys):
    path = write_cnf(tmp_path, TINY_CNF)
    with pytest.warns(UserWarning, match="below the recommended"):
        code = main(["zk-test", "--cnf", path, "--pass", "pzk:l=4,k=5"])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL dishonest-probe" in out
    assert "fully covered" in out
    assert out.strip().splitlines()[-1].startswith("FAIL suite: 1")


def test_zk_test_needs_a_tableau(capsys):
    assert main(["zk-test", "--builtin", "magic-square", "--pass", "cc"]) == 2
    assert "tableau" in capsys.readouterr().err


# --- run -------------------------------------------------------------------------


def test_run_writes_deterministic_transcripts(tmp_path, capsys):
    path = write_cnf(tmp_path, TINY_CNF)
    first, second = tmp_path / "t1.json", tmp_path / "t2.json"
    args = ["run", "--cnf", path, "--pass", "cv", "--rounds", "60",
            "--seed", "5"]
    assert main(args + ["--out", str(first)]) == 0
    summary = capsys.readouterr().out
    assert "value 1.000000 over 60 scored rounds (0 declined)" in summary
    assert main(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    payload = json.loads(first.read_text())
    assert payload["value"] == 1.0
    assert len(payload["rounds"]) == 60


def test_run_simulator_declines_dishonest_pairs(tmp_path, capsys):
    path = write_cnf(tmp_path, TINY_CNF)
    code = main(["run", "--cnf", path, "--pass", "pzk:l=8,k=9", "--pass", "cv",
                 "--prover", "simulator", "--policy", "dishonest",
                 "--rounds", "30", "--out", str(tmp_path / "t.json")])
    assert code == 0
    assert "0 scored rounds (30 declined)" in capsys.readouterr().out


def test_run_rejects_inapplicable_provers(tmp_path, capsys):
    path = write_cnf(tmp_path, TINY_CNF)
    assert main(["run", "--cnf", path, "--pass", "cv",
                 "--prover", "simulator"]) == 2
    assert "tableau" in capsys.readouterr().err
    assert main(["run", "--cnf", path, "--pass", "cv",
                 "--prover", "pauli"]) == 2
    assert "magic-square" in capsys.readouterr().err
    assert main(["run", "--cnf", path]) == 2
    assert "cc or cv" in capsys.readouterr().err


def test_run_honest_prover_through_the_oracular_chain(tmp_path, capsys):
    path = write_cnf(tmp_path, TINY_CNF)
    code = main(["run", "--cnf", path, "--pass", "cv",
                 "--pass", "oracularize", "--pass", "repeat:2",
                 "--rounds", "80", "--seed", "3",
                 "--out", str(tmp_path / "t.json")])
    assert code == 0
    assert "value 1.000000 over 80 scored rounds" in capsys.readouterr().out


def test_console_script_is_wired_up():
    proc = subprocess.run(
        [sys.executable, "-m", "bcsgames.cli", "value",
         "--builtin", "magic-square", "--pass", "cc"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "classical value: 17/18" in proc.stdout
