from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import pytest

from liespec.cli import main

ROOT = Path(__file__).resolve().parents[1]
INPUTS = ROOT / "docs" / "inputs"
EXAMPLE = str(INPUTS / "builtin_example.json")
INPUT_SCHEMA = json.loads((ROOT / "docs" / "input.schema.json").read_text())
OUTPUT_SCHEMA = json.loads((ROOT / "docs" / "output.schema.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    doc = json.loads(out)
    jsonschema.validate(doc, OUTPUT_SCHEMA)
    return code, doc


def write(tmp_path, doc, name="in.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_shipped_inputs_match_schema():
    for p in INPUTS.glob("*.json"):
        jsonschema.validate(json.loads(p.read_text()), INPUT_SCHEMA)


# --- spectrum ------------------------------------------------------------------


def test_spectrum_builtin_example(capsys):
    code, doc = run_json(capsys, "spectrum", EXAMPLE)
    assert code == 0
    pts = doc["result"]["points"]
    assert [p["f"] for p in pts] == [["0", "-3/2"], ["0", "1/2"]]
    assert [p["betti"] for p in pts] == [[0, 1, 1], [1, 1, 0]]
    alg = doc["algebra"]
    assert (alg["n"], alg["solvable"], alg["nilpotent"], alg["dim_L2"], alg["bracket_sign"]) == (2, True, False, 1, -1)
    assert doc["tolerances"]["rank"] == 1e-9


def test_spectrum_float_backend(capsys):
    code, doc = run_json(capsys, "spectrum", EXAMPLE, "--backend", "float")
    assert code == 0
    pts = [p["f"] for p in doc["result"]["points"]]
    assert pts == [[[0.0, 0.0], [-1.5, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]


def test_spectrum_single_generator(capsys):
    code, doc = run_json(capsys, "spectrum", INPUTS / "single_a.json")
    assert [p["f"] for p in doc["result"]["points"]] == [["-1/2"], ["1/2"]]


def test_spectrum_candidates_only(capsys):
    code, doc = run_json(capsys, "spectrum", EXAMPLE, "--candidates-only")
    assert code == 0
    assert [c["f"] for c in doc["result"]["candidates"]] == [["0", "-3/2"], ["0", "-1/2"], ["0", "1/2"], ["0", "3/2"]]


def test_spectrum_table(capsys):
    code, out = run(capsys, "spectrum", EXAMPLE, "--table")
    assert code == 0
    assert "(0, -3/2)" in out and "0 1 1" in out


def test_not_closed_exit_code(capsys):
    code, doc = run_json(capsys, "spectrum", INPUTS / "not_closed.json")
    assert code == 2
    assert doc["error"]["type"] == "NotClosed"


def test_not_solvable_exit_code(capsys, tmp_path):
    sl2 = {
        "dim_E": 2,
        "scalar_mode": "exact",
        "generators": [
            {"name": "e", "matrix": [["0", "1"], ["0", "0"]]},
            {"name": "f", "matrix": [["0", "0"], ["1", "0"]]},
            {"name": "h", "matrix": [["1", "0"], ["0", "-1"]]},
        ],
    }
    code, doc = run_json(capsys, "spectrum", write(tmp_path, sl2))
    assert code == 3
    code, _ = run_json(capsys, "check", write(tmp_path, sl2), "-f", "0,0,0")
    assert code == 3


# --- check / homology ----------------------------------------------------------


@pytest.mark.parametrize("f, inside", [("0,0.5", True), ("0,1/2", True), ("0,-3/2", True), ("0,7", False)])
def test_check(capsys, f, inside):
    code, doc = run_json(capsys, "check", EXAMPLE, f"-f={f}")
    assert code == 0
    assert doc["result"]["in_spectrum"] is inside


def test_check_non_character(capsys):
    code, doc = run_json(capsys, "check", EXAMPLE, "-f", "1,0")
    assert code == 5
    assert doc["error"]["type"] == "NotACharacter"


def test_check_wrong_arity(capsys):
    code, _ = run_json(capsys, "check", EXAMPLE, "-f", "0")
    assert code == 1


def test_check_float_complex_syntax(capsys):
    code, doc = run_json(capsys, "check", EXAMPLE, "--backend", "float", "-f", "0,1/2+0i")
    assert code == 0 and doc["result"]["in_spectrum"]


def test_homology(capsys):
    code, doc = run_json(capsys, "homology", EXAMPLE, "-f=0,-3/2")
    res = doc["result"]
    assert code == 0
    assert res["chain_dims"] == [2, 4, 2]
    assert res["betti"] == [0, 1, 1]
    assert res["euler_characteristic"] == 0
    assert res["chain_defect"] == 0.0


# --- taylor --------------------------------------------------------------------


def test_taylor_diag_pair(capsys):
    code, doc = run_json(capsys, "taylor", INPUTS / "diag_pair.json")
    assert code == 0
    assert [p["f"] for p in doc["result"]["points"]] == [[[1.0, 0.0], [3.0, 0.0]], [[2.0, 0.0], [4.0, 0.0]]]


def test_taylor_noncommuting(capsys):
    code, doc = run_json(capsys, "taylor", EXAMPLE)
    assert code == 6


# --- verify --------------------------------------------------------------------


def test_verify_example_all_properties(capsys):
    code, doc = run_json(capsys, "verify", EXAMPLE)
    assert code == 0
    assert doc["result"]["all_passed"]


def test_verify_nilpotent_bound_precondition(capsys):
    code, doc = run_json(capsys, "verify", EXAMPLE, "--properties", "nilpotent_bound")
    assert code == 0
    (rep,) = doc["result"]["reports"]
    assert rep["applicable"] is False
    assert "not nilpotent" in rep["note"]
    v = rep["witnesses"]["violations"][0]
    assert v["abs_f_x"] == 1.5 and v["norm_x"] == 0.5


def test_verify_random_batch(capsys):
    code, doc = run_json(capsys, "verify", "--random", "5", "--seed", "1")
    assert code == 0
    assert doc["algebra"] is None
    assert doc["result"]["summary"]["nonempty"]["passed"] == 5


def test_verify_failure_exit_code(capsys, monkeypatch):
    import liespec.harness as harness

    def broken(L, policy, rng, seed):
        return [harness.TheoremReport("nonempty", L.fingerprint(), False, True, {"forced": True}, {}, seed)]

    monkeypatch.setitem(harness.PROPERTIES, "nonempty", broken)
    code, doc = run_json(capsys, "verify", EXAMPLE, "--properties", "nonempty")
    assert code == 7
    assert doc["result"]["all_passed"] is False


def test_verify_bad_arguments(capsys):
    assert run(capsys, "verify")[0] == 1
    assert run(capsys, "verify", EXAMPLE, "--properties", "bogus")[0] == 1


# --- random --------------------------------------------------------------------


def test_random_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "random", "--seed", "42", "-o", a)[0] == 0
    assert run(capsys, "random", "--seed", "42", "-o", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    jsonschema.validate(json.loads(a.read_text()), INPUT_SCHEMA)


@pytest.mark.parametrize("seed", range(15))
def test_random_round_trips_through_spectrum(tmp_path, capsys, seed):
    p = tmp_path / "r.json"
    assert run(capsys, "random", "--seed", seed, "--n", 3, "--m", 4, "-o", p)[0] == 0
    code, doc = run_json(capsys, "spectrum", p)
    assert code == 0 and doc["result"]["points"]


def test_random_nilpotent_flag(tmp_path, capsys):
    p = tmp_path / "n.json"
    run(capsys, "random", "--seed", 3, "--n", 3, "--m", 4, "--nilpotent", "-o", p)
    code, doc = run_json(capsys, "spectrum", p)
    assert doc["algebra"]["nilpotent"] is True


def test_random_single_generator_is_abelian(tmp_path, capsys):
    p = tmp_path / "one.json"
    run(capsys, "random", "--seed", 8, "--n", 1, "-o", p)
    code, doc = run_json(capsys, "spectrum", p)
    assert doc["algebra"]["n"] == 1 and doc["algebra"]["dim_L2"] == 0


def test_random_unwritable_path(capsys):
    assert run(capsys, "random", "-o", "/nonexistent-dir/x.json")[0] == 1


def test_random_invalid_spec(capsys):
    assert run(capsys, "random", "--m", "2", "--n", "9")[0] == 1


# --- input validation and determinism ------------------------------------------


BASE = {"dim_E": 1, "scalar_mode": "exact", "generators": [{"name": "x", "matrix": [["1"]]}]}


@pytest.mark.parametrize(
    "doc",
    [
        [],
        {**BASE, "dim_E": 0},
        {**BASE, "scalar_mode": "decimal"},
        {**BASE, "generators": []},
        {**BASE, "generators": [{"name": "x", "matrix": [[[1, 0]]]}]},
        {**BASE, "scalar_mode": "float"},
        {**BASE, "scalar_mode": "float", "generators": [{"name": "x", "matrix": [[1.0]]}]},
        {**BASE, "generators": [{"name": "x", "matrix": [["1", "0"]]}]},
        {**BASE, "generators": [{"name": "x", "matrix": [["1"]]}, {"name": "x", "matrix": [["2"]]}]},
        {**BASE, "extra": 1},
        {**BASE, "generators": [{"name": "x", "matrix": [["one"]]}]},
    ],
)
def test_malformed_inputs_exit_1(tmp_path, capsys, doc):
    code, out = run_json(capsys, "spectrum", write(tmp_path, doc))
    assert code == 1
    assert out["error"]["type"] == "MalformedInput"


def test_missing_and_invalid_json(tmp_path, capsys):
    assert run(capsys, "spectrum", tmp_path / "missing.json")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "spectrum", bad)[0] == 1


def test_output_is_deterministic(capsys, tmp_path):
    p = tmp_path / "r.json"
    run(capsys, "random", "--seed", 5, "--n", 3, "--m", 4, "-o", p)
    outs = [run(capsys, "spectrum", p)[1] for _ in range(2)]
    assert outs[0] == outs[1]
    outs = [run(capsys, "spectrum", EXAMPLE)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_output_file_flag(capsys, tmp_path):
    p = tmp_path / "out.json"
    code, out = run(capsys, "spectrum", EXAMPLE, "-o", p)
    assert code == 0 and out == ""
    jsonschema.validate(json.loads(p.read_text()), OUTPUT_SCHEMA)
