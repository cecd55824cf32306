"""Acceptance criteria, one test each; every test logs a PASS/FAIL line.

The lines are collected in ``RESULTS`` and printed in the terminal summary
(see conftest.py) so they show up in ``pytest -v`` output without ``-s``.
Criteria 2-10 and 12 share one pair of full default CLI campaign runs.
"""
import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from cohsmooth import measures as M
from cohsmooth.smoothing import BallSpec, SmoothConfig, qubit_bloch_oracle, smooth_min
from cohsmooth.states import random_density

RESULTS: list[str] = []


def criterion(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def campaign_runs(tmp_path_factory):
    """Two full default ``cohsmooth propcheck`` runs, launched side by side."""
    out = tmp_path_factory.mktemp("campaign")
    env = dict(os.environ)
    env.pop("COHSMOOTH_SEED", None)
    procs, paths = [], []
    t0 = time.perf_counter()
    for tag in ("a", "b"):
        js, cs = out / f"{tag}.json", out / f"{tag}.csv"
        paths.append((js, cs))
        procs.append(subprocess.Popen(
            [sys.executable, "-m", "cohsmooth.cli", "propcheck", "--seed", "0", "-o", str(js),
             "--csv", str(cs)], env=env, stdout=subprocess.PIPE, stderr=subprocess.PIPE))
    codes = []
    for p in procs:
        _, err = p.communicate(timeout=3600)
        codes.append(p.returncode)
        if p.returncode not in (0, 2):
            raise RuntimeError(err.decode())
    elapsed = time.perf_counter() - t0
    reports = {r["prop_id"]: r for r in json.loads(paths[0][0].read_text())}
    return {"paths": paths, "codes": codes, "reports": reports, "elapsed": elapsed}


def test_c01_oracle_agreement():
    t0 = time.perf_counter()
    cfg = SmoothConfig(oracle=False)
    eps_grid = (0.05, 0.1, 0.2)
    worst, fails, n = -np.inf, 0, 0
    for i in range(100):
        rho = random_density(2, seed=1000 + i)
        ball = BallSpec("trace", eps_grid[i % 3])
        for kind in ("l1", "relent"):
            res = smooth_min(rho, ball, kind, cfg)
            orc = qubit_bloch_oracle(rho, ball, kind)
            # the solver may beat the grid by at most its discretization error
            excess = max(res.value - orc.min - 2e-3, orc.min - orc.grid_error_min - res.value)
            worst = max(worst, excess)
            fails += excess > 0
            n += 1
    elapsed = time.perf_counter() - t0
    criterion(1, fails == 0 and elapsed < 600,
              f"oracle agreement: {n} comparisons, {fails} outside 2e-3 + grid error "
              f"(worst excess {worst:.2e}), {elapsed:.1f}s")


def test_c02_prop1(campaign_runs):
    r = campaign_runs["reports"]["P1"]
    criterion(2, r["violations"] == 0 and r["samples"] >= 200 and r["skipped"] == 0,
              f"P1 ordering: {r['samples']} instances, {r['violations']} violations, "
              f"max slack {r['max_slack']:.2e}")


def test_c03_prop2(campaign_runs):
    r = campaign_runs["reports"]["P2"]
    criterion(3, r["violations"] == 0 and r["samples"] - r["skipped"] >= 500,
              f"P2 monotonicity: {r['samples']} state/channel pairs, {r['violations']} violations, "
              f"{r['skipped']} skipped")


def test_c04_prop3(campaign_runs):
    r = campaign_runs["reports"]["P3"]
    w = r["worst_witness"]
    ok = (r["passed"] and r["violations"] == r["samples"] > 0 and w["reproduced"]
          and w["c_min_rho"] <= 1e-3 and w["branch_sum_lo"] >= 0.01
          and r["tolerance"] >= 0.009)
    criterion(4, ok, f"P3 counterexample: C_min(rho)={w['c_min_rho']:.2e}, "
              f"branch sum >= {w['branch_sum_lo']:.4f}, {r['violations']}/{r['samples']} "
              f"measures reproduce the violation at margin {r['tolerance']}")


def test_c05_prop4_prop5(campaign_runs):
    p4, p5 = campaign_runs["reports"]["P4"], campaign_runs["reports"]["P5"]
    ok = all(r["violations"] == 0 and r["samples"] >= 100 for r in (p4, p5))
    criterion(5, ok, f"P4 convexity {p4['samples']}/{p4['violations']} viol, "
              f"P5 continuity {p5['samples']}/{p5['violations']} viol "
              f"(max slack {p4['max_slack']:.2e}, {p5['max_slack']:.2e})")


def test_c06_prop6(campaign_runs):
    r = campaign_runs["reports"]["P6"]
    ok = r["violations"] == 0 and r["max_slack"] <= 5e-4 and r["samples"] >= 50
    criterion(6, ok, f"P6 equality: {r['samples']} (state, p) instances, "
              f"max slack {r['max_slack']:.2e} <= 5e-4; {r['notes'][0]}")


def test_c07_prop7(campaign_runs):
    r = campaign_runs["reports"]["P7"]
    ok = r["violations"] == 0 and r["max_slack"] <= 2e-3
    criterion(7, ok, f"P7 bounds: {r['samples'] - r['skipped']} judged, {r['skipped']} skipped "
              f"(eps > C_D), {r['violations']} violations, max slack {r['max_slack']:.2e}")


def test_c08_cd_identity(campaign_runs):
    r = campaign_runs["reports"]["ID_CD"]
    judged = r["samples"] - r["skipped"]
    ok = r["violations"] == 0 and judged >= 100 and r["max_slack"] <= 5e-3
    criterion(8, ok, f"C_D identity: {judged} qubit instances, max slack {r['max_slack']:.2e}")


def test_c09_relent_variant(campaign_runs):
    cre, wsm = campaign_runs["reports"]["CRE_BOUND"], campaign_runs["reports"]["WSM"]
    ok = cre["violations"] == 0 and wsm["violations"] == 0 and cre["samples"] > cre["skipped"]
    criterion(9, ok, f"relent ball: bound {cre['samples'] - cre['skipped']} judged / "
              f"{cre['violations']} viol; weak strong monotonicity "
              f"{wsm['samples'] - wsm['skipped']} feasible branch sets / {wsm['violations']} viol")


def test_c10_oneshot_bounds(campaign_runs):
    p9, p10 = campaign_runs["reports"]["P9"], campaign_runs["reports"]["P10"]
    # distillation is compared with the lower side of C_max, the smoothed
    # minimum with the lower side of the cost: both one-sided safe
    sound = (p9["audit"]["lhs_sides"] == ["distill-family"]
             and all(s.startswith("max:") for s in p9["audit"]["rhs_sides"])
             and all(s.startswith("min:") for s in p10["audit"]["lhs_sides"])
             and p10["audit"]["rhs_sides"] == ["cost-family"])
    ok = sound and p9["violations"] == 0 and p10["violations"] == 0 and p9["samples"] == 20
    criterion(10, ok, f"one-shot bounds: P9 {p9['samples']} instances / {p9['violations']} viol, "
              f"P10 {p10['samples'] - p10['skipped']} feasible / {p10['violations']} viol, "
              f"audit sound={sound}")


def test_c11_closed_form_cross_check():
    worst = 0.0
    n = 0
    for d in (2, 3):
        for i in range(50):
            rho = random_density(d, seed=2000 + 100 * d + i)
            direct, _ = M.c_rel_ent_direct(rho)
            worst = max(worst, abs(direct - M.c_rel_ent(rho)))
            n += 1
    criterion(11, worst <= 1e-5, f"closed form vs direct minimization: {n} samples, "
              f"max |diff| {worst:.2e}")


def test_c12_cli_determinism(campaign_runs):
    (a, ac), (b, bc) = campaign_runs["paths"]
    same = a.read_bytes() == b.read_bytes() and ac.read_bytes() == bc.read_bytes()
    codes = campaign_runs["codes"]
    ok = same and codes == [0, 0]
    criterion(12, ok, f"full CLI campaign twice: exit codes {codes}, byte-identical={same}, "
              f"{campaign_runs['elapsed']:.0f}s wall for both runs")
