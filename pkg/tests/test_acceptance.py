"""Acceptance criteria, one test each, at the stated sizes and tolerances.

A summary line per criterion is printed at the end of the pytest run.
"""

import json
import subprocess
import sys
import time
from pathlib import Path

from openimage import bounds as B
from openimage.cli import main
from openimage.groups import ball_index, enumerate_ball, enumerate_sl2
from openimage.suites import (suite_goursat, suite_hensel, suite_inner,
                              suite_conj_gain, suite_eigen_defect, suite_adjoint_charpoly)

SAMPLES = Path(__file__).resolve().parent.parent / "sample_inputs"


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_01_hensel_oracle(record_criterion):
    rep, dt = timed(suite_hensel, seed=0, trials=1000)
    ok = rep["failures"] == 0 and rep["trials"] == 3000 and dt < 10
    record_criterion(1, "Hensel lifts match exhaustive roots", ok,
                     f"{rep['trials']} trials, {rep['failures']} failures, {dt:.1f}s")
    assert rep["failures"] == 0, rep["failure_examples"]
    assert dt < 10


def test_criterion_02_eigen_defect_inequality(record_criterion):
    rep, dt = timed(suite_eigen_defect, seed=0, trials=100_000)
    grid = rep["details"]["grid_instances"]
    ok = rep["failures"] == 0 and grid > 0 and dt < 30
    record_criterion(2, "val(p_g(lambda)) >= n - b", ok,
                     f"10^5 random + {grid} grid, {rep['failures']} failures, {dt:.1f}s")
    assert rep["failures"] == 0, rep["failure_examples"]
    assert grid > 0 and dt < 30


def test_criterion_03_adjoint_char_poly(record_criterion):
    rep = suite_adjoint_charpoly(seed=0, trials=10_000)
    ok = rep["failures"] == 0 and rep["trials"] == 30_000
    record_criterion(3, "char poly of ad(g) is t^3 + 4 det(g) t", ok,
                     f"{rep['trials']} matrices, {rep['failures']} mismatches")
    assert ok, rep["failure_examples"]


def test_criterion_04_inner_reconstruction(record_criterion):
    rep, dt = timed(suite_inner, seed=0, trials=200)
    ok = rep["failures"] == 0 and rep["trials"] == 600 and dt < 60
    record_criterion(4, "inner matrix from approximate conjugations", ok,
                     f"{rep['trials']} instances, {rep['failures']} failures, {dt:.1f}s")
    assert rep["failures"] == 0, rep["failure_examples"]
    assert dt < 60


def test_criterion_05_goursat(record_criterion):
    rep, dt = timed(suite_goursat, seed=0)
    rows = rep["details"]["instances"]
    sizes_ok = all(r["order"] < 500_000 for r in rows)
    families = {r["group"].split("/", 1)[1] for r in rows}
    ok = (rep["failures"] == 0 and len(rows) == 20 and sizes_ok and dt < 60
          and families == {"SL2(Z/9)^3", "SL2(Z/8)^2"})
    record_criterion(5, "product ball inside every constructed subgroup", ok,
                     f"{len(rows)} groups, max order {max(r['order'] for r in rows)}, {dt:.1f}s")
    assert rep["failures"] == 0, rep["failure_examples"]
    assert len(rows) == 20 and sizes_ok and dt < 60
    assert families == {"SL2(Z/9)^3", "SL2(Z/8)^2"}


def test_criterion_06_ball_index(record_criterion):
    checks = []
    for ell, N, s in ((2, 3, 1), (2, 3, 2), (3, 2, 1)):
        checks.append(ball_index(ell, s) * len(enumerate_ball(ell, N, s)) == len(enumerate_sl2(ell, N)))
    ok = all(checks)
    record_criterion(6, "ball index times ball order equals |SL_2|", ok,
                     f"{sum(checks)}/3 configurations")
    assert ok


def test_criterion_07_conjugation_gain(record_criterion):
    rep = suite_conj_gain(seed=0, trials=100)
    ok = rep["failures"] == 0 and rep["trials"] == 100
    record_criterion(7, "conjugation-stable W contains l^(t+4) sl_2", ok,
                     f"{rep['trials']} lattices, {rep['failures']} failures")
    assert ok, rep["failure_examples"]


def test_criterion_08_constants_in_report(record_criterion, tmp_path):
    out = tmp_path / "bounds.json"
    assert main(["bounds", "--input", str(SAMPLES / "bounds_n2.json"), "--output", str(out)]) == 0
    c = json.loads(out.read_text())["constants"]
    n = 2
    expected = [
        (c["gamma"]["expression"], "10^13"), (c["gamma"]["value"], 10 ** 13),
        (c["delta"]["expression"], "exp(exp(exp(12)))"),
        (c["f_odd"]["constant"], 800), (c["f_two"]["constant"], 15421),
        (c["f_two"]["coefficient"], 19008),
        (c["adelic_exponent"]["expression"], "5000*n*(n-1)"),
        (c["adelic_exponent"]["value"], 5000 * n * (n - 1)),
        (c["alpha_2"]["value"], 8192),
        (c["K_ell_cap"]["expression"], "2*48^2"), (c["K_ell_cap"]["value"], 4608),
        (c["K2_cap"]["expression"], "3^2*2^16"), (c["K2_cap"]["value"], 589824),
    ]
    bad = [(got, want) for got, want in expected if got != want]
    record_criterion(8, "bound constants reproduced in the bounds report", not bad,
                     f"{len(expected) - len(bad)}/{len(expected)} matches")
    assert not bad


def test_criterion_09_implication_and_landmark(record_criterion):
    held = []
    for n in (2, 3, 5):
        for K in (1, 10, 100):
            for H in (1, 10):
                inp = B.BoundInputs(K, n, (H,) * n)
                held.append(B.check_implication(inp, dps=max(10, B.DEFAULT_DPS)))
    marks = B.delta_power_landmarks(2)
    landmark = float(marks["log10_log10"])
    landmark_ok = abs(landmark - 70683.8) <= 0.1
    ok = all(held) and landmark_ok
    record_criterion(9, "implication over the grid and the delta^2 landmark", ok,
                     f"grid {sum(held)}/{len(held)} hold; log10 log10 delta^2 = "
                     f"{landmark:.4f}, expected 70683.8 +- 0.1")
    assert all(held)
    assert landmark_ok, (
        f"log10 log10 delta^2 = {landmark:.4f} (log10 ln delta^2 = {marks['log10_ln']})")


def test_criterion_10_determinism(record_criterion, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"verify{k}.json"
        proc = subprocess.run([sys.executable, "-m", "openimage.cli", "verify", "--seed", "11",
                               "--output", str(path)], capture_output=True)
        assert proc.returncode == 0, proc.stderr.decode()
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1]
    record_criterion(10, "verify is byte-identical across two runs", ok,
                     f"{len(outs[0])} bytes")
    assert ok
