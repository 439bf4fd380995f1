import json
from pathlib import Path

import pytest

from lak.cli import BAD_INPUT, MISMATCH, OK, main

MACHINES = Path(__file__).resolve().parent.parent / "machines"


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def _records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.fixture(scope="module")
def all_ones_term(tmp_path_factory):
    path = tmp_path_factory.mktemp("compiled") / "all-ones.term"
    assert main(["compile", str(MACHINES / "all-ones.json"), "-o", str(path)]) == OK
    return path


def test_eval_prints_normal_form(tmp_path, capsys):
    f = tmp_path / "t.lak"
    f.write_text("(\\x. x) #3")
    code, io = _run(capsys, "eval", f)
    assert code == OK
    assert io.out.splitlines()[0] == "#3"


def test_eval_trace_is_jsonl(tmp_path, capsys):
    f, trace = tmp_path / "t.lak", tmp_path / "trace.jsonl"
    f.write_text("(\\x. x) ((\\y. y) #3)")
    code, _ = _run(capsys, "eval", f, "--trace", trace)
    records = _records(trace.read_text())
    assert code == OK and len(records) == 2
    assert [r["rule"] for r in records] == ["Beta", "Beta"]


def test_missing_file_is_bad_input(capsys):
    code, io = _run(capsys, "eval", "/nonexistent/term.lak")
    assert code == BAD_INPUT and "error" in io.err


def test_unknown_option_is_bad_input(capsys):
    code, _ = _run(capsys, "eval")
    assert code == BAD_INPUT


def test_parse_error_is_bad_input(tmp_path, capsys):
    f = tmp_path / "t.lak"
    f.write_text("(\\x. ")
    assert _run(capsys, "eval", f)[0] == BAD_INPUT


def test_fuel_exhaustion_is_reported(tmp_path, capsys):
    f = tmp_path / "t.lak"
    f.write_text("(\\x. x) ((\\y. y) #3)")
    code, io = _run(capsys, "eval", f, "--fuel", "1")
    assert code == MISMATCH and "fuel exhausted" in io.out


def test_simulate(capsys):
    code, io = _run(capsys, "simulate", MACHINES / "all-ones.json", "1,1,1", "--format", "records")
    (rec,) = _records(io.out)
    assert code == OK
    assert rec["outcome"] == "accept" and rec["steps"] == 12 and rec["output"] == ["1"]


def test_simulate_rejects_empty_input(capsys):
    assert _run(capsys, "simulate", MACHINES / "all-ones.json", "")[0] == BAD_INPUT


def test_compare_exhaustive(capsys):
    code, io = _run(capsys, "compare", MACHINES / "all-ones.json", "--exhaustive", 3)
    assert code == OK and "8/8 agreements" in io.out


def test_compare_random_rationals(capsys):
    code, io = _run(capsys, "compare", MACHINES / "running-sum.json", "--random", 10,
                    "--seed", 7, "--max-length", 3)
    assert code == OK and "10/10 agreements" in io.out


def test_compare_detects_a_corrupted_term(tmp_path, capsys, all_ones_term):
    # swap the constant 1 for the constant 0 everywhere: acceptance is no longer reported
    bad = tmp_path / "bad.term"
    bad.write_text(all_ones_term.read_text().replace("op3", "op2"))
    code, io = _run(capsys, "compare", MACHINES / "all-ones.json", "--inputs", "1,1;0,1",
                    "--term", bad, "--format", "records")
    assert code == MISMATCH
    summary = _records(io.out)[-1]
    assert summary["total"] == 2 and summary["agreements"] < 2


def test_compare_records_are_byte_identical(capsys):
    argv = ("compare", MACHINES / "parity.json", "--inputs", "1;1,0", "--format", "records")
    first = _run(capsys, *argv)
    second = _run(capsys, *argv)
    assert first[0] == OK and first[1].out == second[1].out


def test_compile_and_check_derivation(tmp_path, capsys):
    term, deriv = tmp_path / "u.term", tmp_path / "u.deriv"
    code, io = _run(capsys, "compile", MACHINES / "identity.json", "-o", term, "--emit-derivation", deriv)
    assert code == OK and "List(K) -o $$List(K)" in io.out
    code, io = _run(capsys, "check", deriv, "--format", "records")
    (rec,) = _records(io.out)
    assert code == OK and rec["accepted"] and rec["formula"] == "List(K) -o $$List(K)"


def test_check_rejects_a_corrupted_derivation(tmp_path, capsys):
    term, deriv = tmp_path / "u.term", tmp_path / "u.deriv"
    _run(capsys, "compile", MACHINES / "identity.json", "-o", term, "--emit-derivation", deriv)
    deriv.write_text(deriv.read_text().replace("$$List(K)", "$List(K)", 1))
    code, _ = _run(capsys, "check", deriv)
    assert code in (MISMATCH, BAD_INPUT)


def test_bench_machine_steps_grow_within_the_bound(capsys):
    code, io = _run(capsys, "bench", "--machine", MACHINES / "identity.json", "--lengths", 5,
                    "--format", "records")
    rows = _records(io.out)
    assert code == OK and len(rows) == 5
    steps = [r["steps"] for r in rows]
    assert steps == sorted(steps)
    assert all(r["steps"] <= r["bound"] and r["status"] == "ok" for r in rows)


def test_bench_depth_zero_terms(tmp_path, capsys):
    files = []
    for i, text in enumerate(["(\\x. x) #1", "(\\f. \\x. f x) (\\y. y) #2", "dup #1 (\\a. \\b. a)"]):
        f = tmp_path / f"t{i}.lak"
        f.write_text(text)
        files.append(f)
    code, io = _run(capsys, "bench", *files, "--format", "records")
    rows = _records(io.out)
    assert code == OK and len(rows) == 3
    assert all(r["depth"] == 0 and r["steps"] <= r["measure"] ** 2 for r in rows)


def test_bench_with_nothing_to_do(capsys):
    code, io = _run(capsys, "bench")
    assert code == OK
