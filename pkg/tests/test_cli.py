import json

import pytest

from conftest import fixture_path
from molnull.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_prints_program(capsys):
    code, out, _ = run(capsys, "parse", fixture_path("pdppn.mol"))
    assert code == 0 and "method pD(" in out


def test_analyze_static_writes_file(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "analyze-static", fixture_path("pdppn.mol"), "--out", str(out))
    assert code == 0
    text = out.read_text()
    assert "pD,0," in text and "pN,0," in text


def test_check_modes(capsys):
    code, out, _ = run(capsys, "check", fixture_path("clock_work.mol"), "--mode", "conventional")
    assert code == 1
    assert any("WrongOwner" in line and "display" in line for line in out.splitlines())
    code, _, _ = run(capsys, "check", fixture_path("clock_work.mol"), "--mode", "continuum")
    assert code == 0


def test_report_from_static(tmp_path, capsys):
    s = tmp_path / "s.csv"
    run(capsys, "analyze-static", fixture_path("pdppn.mol"), "--out", str(s))
    code, out, _ = run(capsys, "report", "--static", str(s), "--table", "definite", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "ref_params,required,count"
    assert "1,1,1" in out.splitlines()


def test_report_needs_one_source(capsys):
    code, _, err = run(capsys, "report", "--table", "definite")
    assert code == 2 and "exactly one" in err


def test_run_dynamic_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        prof, trace = tmp_path / f"{name}.csv", tmp_path / f"{name}.trace"
        code, _, _ = run(capsys, "run-dynamic", fixture_path("clock_home.mol"), "--entry", "clientSetup",
                         "--seed", "5", "--runs", "3", "--out", str(prof), "--trace-out", str(trace))
        assert code == 0
        outs.append((prof.read_bytes(), trace.read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][1].count(b"#end") == 3


def test_run_dynamic_unknown_entry(capsys):
    code, _, err = run(capsys, "run-dynamic", fixture_path("clock_home.mol"), "--entry", "nope", "--seed", "1")
    assert code == 1 and "unresolved entry nope" in err


def test_gen_corpus_then_analyze(tmp_path, capsys):
    code, out, _ = run(capsys, "gen-corpus", "--methods", "40", "--seed", "4", "--out", str(tmp_path))
    assert code == 0 and len(out.splitlines()) == 4
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["spec"]["seed"] == 4
    code, _, _ = run(capsys, "analyze-static", str(tmp_path / "corpus.mol"), "--format", "text")
    assert code == 0


def test_missing_file_is_usage_error(capsys):
    code, _, err = run(capsys, "parse", "/nonexistent/x.mol")
    assert code == 2 and "cannot read" in err


def test_syntax_error_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.mol"
    bad.write_text("classifier ;")
    code, _, err = run(capsys, "parse", str(bad))
    assert code == 1 and "syntax" in err


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
