"""End-to-end tests of the command-line interface (in-process)."""

from __future__ import annotations

import json

import pytest

from pcsp import corpus, jsonio
from pcsp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen_solve_verify_chain(tmp_path, capsys):
    inst = tmp_path / "i.json"
    asg = tmp_path / "a.json"
    code, out, _ = run(capsys, "gen", "didactic", "--n", "6", "--m", "4",
                       "--seed", "3")
    assert code == 0
    inst.write_text(out)
    code, out2, _ = run(capsys, "gen", "didactic", "--n", "6", "--m", "4",
                        "--seed", "3")
    assert out2 == out          # byte-identical on identical input

    code, out, _ = run(capsys, "solve", "didactic", "fam-gL", str(inst))
    assert code == 0
    doc = json.loads(out)
    assert doc["side"] == "Q" and len(doc["values"]) == 6
    asg.write_text(out)

    code, out, _ = run(capsys, "verify", "didactic", str(inst), str(asg))
    assert code == 0 and out == "OK\n"


def test_solve_reject_exit_code(tmp_path, capsys):
    inst = tmp_path / "i.json"
    # x != x is rationally feasible only at the half-integer point
    inst.write_text(json.dumps(
        {"n": 2, "clauses": [{"c": "neq", "vars": [1, 1]}]}))
    code, out, _ = run(capsys, "solve", "twosat", "maj", str(inst))
    assert code == 1
    assert out == "REJECT: no ring point on affine hull\n"


def test_check_pol_ok_and_counterexample(capsys):
    code, out, _ = run(capsys, "check-pol", "didactic", "fam-gL",
                       "--arity", "3")
    assert code == 0 and out.startswith("OK: fam-gL[3]")
    code, out, _ = run(capsys, "check-pol", "didactic", "fam-gL",
                       "--arity", "4")
    assert code == 1
    assert out.startswith("COUNTEREXAMPLE")
    assert "outside the weak relation" in out


def test_check_pol_invalid_arity(capsys):
    code, out, _ = run(capsys, "check-pol", "rainbow", "rainbow",
                       "--arity", "3")
    assert code == 1 and out.startswith("INVALID ARITY")


def test_verify_detects_violation(tmp_path, capsys):
    inst = tmp_path / "i.json"
    asg = tmp_path / "a.json"
    inst.write_text(json.dumps(
        {"n": 2, "clauses": [{"c": "or2", "vars": [1, 2]}]}))
    asg.write_text(json.dumps({"side": "Q", "values": [0, 0]}))
    code, out, _ = run(capsys, "verify", "twosat", str(inst), str(asg))
    assert code == 1 and out == "FAIL: clause 0 violated\n"


def test_verify_value_count_mismatch(tmp_path, capsys):
    inst = tmp_path / "i.json"
    asg = tmp_path / "a.json"
    inst.write_text(json.dumps(
        {"n": 2, "clauses": [{"c": "or2", "vars": [1, 2]}]}))
    asg.write_text(json.dumps({"side": "Q", "values": [0]}))
    code, _, err = run(capsys, "verify", "twosat", str(inst), str(asg))
    assert code == 2 and "values for 2 variables" in err


def test_unknown_names_exit_two(capsys, tmp_path):
    code, _, err = run(capsys, "gen", "who", "--n", "3", "--m", "1")
    assert code == 2 and "unknown template" in err
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps({"n": 2, "clauses": []}))
    code, _, err = run(capsys, "solve", "twosat", "who", str(inst))
    assert code == 2 and "unknown family" in err


def test_malformed_json_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    code, _, err = run(capsys, "solve", "twosat", "maj", str(bad))
    assert code == 2 and "invalid JSON" in err
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps({"n": 2}))
    code, _, err = run(capsys, "solve", "twosat", "maj", str(schema))
    assert code == 2 and "missing key" in err


def test_template_and_family_from_files(tmp_path, capsys):
    e = corpus.entry("twosat")
    tpl = tmp_path / "t.json"
    fam = tmp_path / "f.json"
    inst = tmp_path / "i.json"
    tpl.write_text(jsonio.dumps(jsonio.template_to_json(e.template)))
    fam.write_text(jsonio.dumps(jsonio.family_to_json(e.family)))
    inst.write_text(json.dumps(
        {"n": 3, "clauses": [{"c": "or2", "vars": [1, 2]},
                             {"c": "neq", "vars": [2, 3]}]}))
    code, out, _ = run(capsys, "solve", str(tpl), str(fam), str(inst))
    assert code == 0
    values = json.loads(out)["values"]
    assert values[1] != values[2] and (values[0], values[1]) != (0, 0)


def test_relax_lp_feeds_lp_subcommand(tmp_path, capsys):
    inst = tmp_path / "i.json"
    sys_file = tmp_path / "s.json"
    inst.write_text(json.dumps(
        {"n": 3, "clauses": [{"c": "or2", "vars": [1, 2]},
                             {"c": "neq", "vars": [2, 3]}]}))
    code, out, _ = run(capsys, "relax", "twosat", "maj", str(inst),
                       "--dump", "lp")
    assert code == 0
    sys_file.write_text(out)
    code, out, _ = run(capsys, "lp", str(sys_file), "--ring", "zsqrt:2")
    assert code == 0
    point = json.loads(out)
    assert all(set(c) == {"a", "b", "q"} for c in point)


def test_relax_le_dump(tmp_path, capsys):
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps(
        {"n": 3, "clauses": [{"c": "sum1mod7", "vars": [1, 2, 3]}]}))
    code, out, _ = run(capsys, "relax", "mod7-sandwich", "mod7", str(inst),
                       "--dump", "le")
    assert code == 0
    doc = json.loads(out)
    assert doc["quotient"] == [[7]]
    assert len(doc["rows"]) == 4


def test_relax_dump_mismatches_exit_two(tmp_path, capsys):
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps(
        {"n": 3, "clauses": [{"c": "sum1mod7", "vars": [1, 2, 3]}]}))
    code, _, err = run(capsys, "relax", "mod7-sandwich", "mod7", str(inst),
                       "--dump", "lp")
    assert code == 2 and "no LP relaxation" in err


def test_lp_pinned_reject_line(tmp_path, capsys):
    half = tmp_path / "h.json"
    half.write_text(json.dumps(
        {"vars": 1, "le": [{"a": [[0, 1]], "b": "1/2"},
                           {"a": [[0, -1]], "b": "-1/2"}]}))
    code, out, _ = run(capsys, "lp", str(half))
    assert code == 1
    assert out == "REJECT: no ring point on affine hull\n"


def test_lp_empty_polytope(tmp_path, capsys):
    empty = tmp_path / "e.json"
    empty.write_text(json.dumps(
        {"vars": 1, "le": [{"a": [[0, 1]], "b": 0},
                           {"a": [[0, -1]], "b": -1}]}))
    code, out, _ = run(capsys, "lp", str(empty))
    assert code == 1
    assert out == "REJECT: empty relaxation polytope\n"


def test_lp_bad_ring_spec(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"vars": 1, "le": [{"a": [[0, 1]], "b": 1}]}))
    code, _, err = run(capsys, "lp", str(f), "--ring", "gauss")
    assert code == 2 and "unknown ring" in err
    code, _, err = run(capsys, "lp", str(f), "--ring", "zsqrt:4")
    assert code == 2


def test_solve_periodic_and_simplex_paths(tmp_path, capsys):
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps(
        {"n": 4, "clauses": [{"c": "sum1mod7", "vars": [1, 2, 3]},
                             {"c": "sum1mod7", "vars": [2, 3, 4]}]}))
    code, out, _ = run(capsys, "solve", "mod7-sandwich", "mod7", str(inst))
    assert code == 0
    asg = tmp_path / "a.json"
    asg.write_text(out)
    code, out, _ = run(capsys, "verify", "mod7-sandwich", str(inst), str(asg))
    assert code == 0

    inst.write_text(json.dumps(
        {"n": 4, "clauses": [{"c": "perm", "vars": [1, 2, 3]},
                             {"c": "perm", "vars": [2, 3, 4]}]}))
    code, out, _ = run(capsys, "solve", "rainbow", "rainbow", str(inst))
    assert code == 0
    asg.write_text(out)
    code, out, _ = run(capsys, "verify", "rainbow", str(inst), str(asg))
    assert code == 0


def test_gen_rejects_bad_sizes(capsys):
    code, _, err = run(capsys, "gen", "twosat", "--n", "0", "--m", "2")
    assert code == 2 and "n >= 1" in err
