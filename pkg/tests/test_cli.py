import json
from pathlib import Path

import pytest

from openimage.cli import main

SAMPLES = Path(__file__).resolve().parent.parent / "sample_inputs"


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def write(tmp_path, doc, name="in.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_bounds_report(capsys):
    code, rep, _ = run(["bounds", "--input", str(SAMPLES / "bounds_n2.json")], capsys)
    assert code == 0
    assert rep["implication_holds"] is True
    assert rep["constants"]["gamma"]["value"] == 10 ** 13
    assert rep["constants"]["delta"]["expression"] == "exp(exp(exp(12)))"
    assert rep["constants"]["adelic_exponent"] == {"expression": "5000*n*(n-1)", "value": 10000}
    assert rep["headline"]["tier"] == "loglog"
    assert all("formula" in p["pair_index"] for p in rep["pairs"])


def test_bounds_missing_field(tmp_path, capsys):
    code, rep, err = run(["bounds", "--input", write(tmp_path, {"K_degree": 1, "heights": [0, 0]})], capsys)
    assert code == 2 and rep is None
    assert "'n' is a required property" in err


def test_bounds_rejects_single_curve(tmp_path, capsys):
    code, _, err = run(["bounds", "--input", write(tmp_path, {"n": 1, "K_degree": 1, "heights": [0]})], capsys)
    assert code == 2
    assert "$.n" in err


def test_bounds_height_count_mismatch(tmp_path, capsys):
    code, _, err = run(["bounds", "--input", write(tmp_path, {"n": 3, "K_degree": 1, "heights": [0, 0]})], capsys)
    assert code == 2 and "heights" in err


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(["bounds", "--input", str(p)], capsys)
    assert code == 2 and "not valid JSON" in err


def test_lie_diagonal(capsys):
    code, rep, _ = run(["lie", "--input", str(SAMPLES / "diagonal_sl2_z9.json")], capsys)
    assert code == 0
    assert rep["group_order"] == 648
    assert rep["kernel"]["basis"] == []
    assert rep["graph_defect_depth"] == rep["N"] == 2


def test_lie_planted_kernel(capsys):
    code, rep, _ = run(["lie", "--input", str(SAMPLES / "planted_kernel_t2.json")], capsys)
    assert code == 0
    assert rep["kernel"]["valuation"] == 2
    assert rep["special_basis"]["kernel_valuation"] == 2
    assert rep["graph_defect_depth"] == 2


def test_lie_empty_generators(capsys):
    code, rep, _ = run(["lie", "--input", str(SAMPLES / "trivial_group.json")], capsys)
    assert code == 0
    assert rep["group_order"] == 1 and rep["lattice"]["basis"] == []
    assert rep["special_basis"] is None


def test_lie_size_cap(capsys):
    code, rep, _ = run(["lie", "--input", str(SAMPLES / "diagonal_sl2_z9.json"), "--cap", "50"], capsys)
    assert code == 1 and rep["error"] == "SizeCapExceeded"


def test_lie_prime_override(tmp_path, capsys):
    doc = json.loads((SAMPLES / "trivial_group.json").read_text())
    del doc["ell"]
    code, rep, _ = run(["lie", "--input", write(tmp_path, doc), "--prime", "5"], capsys)
    assert code == 0 and rep["ell"] == 5


def test_inner(capsys):
    code, rep, _ = run(["inner", "--input", str(SAMPLES / "conjugation_3_14.json")], capsys)
    assert code == 0
    assert rep["intertwines"] and rep["trace_congruence"]
    assert rep["certificate"]["certified_precision"] == 4


def test_inner_below_hypothesis(tmp_path, capsys):
    doc = {"ell": 5, "N": 12, "s": 1, "n": 12, "conjugator": [[1, 1], [0, 1]]}
    code, rep, _ = run(["inner", "--input", write(tmp_path, doc)], capsys)
    assert code == 1 and rep["error"] == "HypothesisFails"


def test_goursat_from_matrix(capsys):
    code, rep, _ = run(["goursat", "--input", str(SAMPLES / "s_matrix.json")], capsys)
    assert code == 0
    assert rep["exponents"] == [6, 5, 6]


def test_goursat_from_group(tmp_path, capsys):
    group = json.loads((SAMPLES / "diagonal_sl2_z9.json").read_text())
    code, rep, _ = run(["goursat", "--input", write(tmp_path, {"group": group})], capsys)
    assert code == 0
    assert rep["contains_ball"] is True


def test_goursat_side_condition(tmp_path, capsys):
    code, rep, _ = run(["goursat", "--input", write(tmp_path, {"ell": 2, "s_matrix": [[0, 1], [1, 0]]})], capsys)
    assert code == 1 and rep["error"] == "SideConditionViolated"


def test_verify_hensel_seed_42(capsys):
    code, rep, _ = run(["verify", "--suite", "hensel", "--seed", "42"], capsys)
    assert code == 0 and rep["passed"]
    (suite,) = rep["suites"]
    assert suite["details"]["trials_per_config"] == 1000 and suite["failures"] == 0


def test_verify_goursat(capsys):
    code, rep, _ = run(["verify", "--suite", "goursat"], capsys)
    assert code == 0
    assert rep["suites"][0]["trials"] == 20


def test_verify_unknown_suite(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope"])
    assert exc.value.code == 2


def test_verify_output_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["verify", "--suite", "conj_gain", "--suite", "ball_index",
                     "--seed", "3", "--output", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
