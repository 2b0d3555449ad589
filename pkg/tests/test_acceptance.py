"""Acceptance gate: one test per criterion, one printed pass/fail line each.

All decision thresholds come from the versioned thresholds.json; nothing is
hard-coded in the test logic.
"""

import filecmp
import math
import time

import numpy as np
import pytest
from scipy import integrate

from horofarey.experiments import ExperimentConfig, load_thresholds, run_case_a, \
    run_case_b, run_joint, write_report
from horofarey.farey import farey_count_asymptotic, farey_count_exact
from horofarey.groups import commute_flow, conjugator, flow, n_minus, n_plus
from horofarey.lattices import ObservableSpec, evaluate_observable
from horofarey.proof_geometry import ConeRegion, cone_volume, cone_volume_mc, \
    disjointness_scan, mahler_epsilon0, step2_premise_batch, \
    thickening_equivalence_batch
from horofarey.reference_laws import case_b_quadrature, case_b_reference, \
    fundamental_domain_batch, haar_exact_d2, haar_reference_horosphere
from horofarey.sampling import chunk_rng
from horofarey.stats import ks_sample_vs_interpolated, ks_two_sample

THR = load_thresholds()
SV = ObservableSpec("shortest_vector")
SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    # pay the JIT compilation cost outside the timed criteria
    evaluate_observable(SV, np.eye(2))
    evaluate_observable(SV, np.eye(3))
    evaluate_observable(ObservableSpec("second_minimum"), np.eye(2))
    evaluate_observable(ObservableSpec("ball_count", radius=1.5), np.eye(2))
    evaluate_observable(ObservableSpec("fundamental_y"), np.eye(2))


def report(num, name, ok, detail):
    line = f"[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_farey_counts():
    t0 = time.perf_counter()
    r2 = farey_count_exact(2, 10_000) / (10_000 ** 2 * 3.0 / math.pi ** 2)
    r3 = farey_count_exact(3, 200) / farey_count_asymptotic(3, 200)
    elapsed = time.perf_counter() - t0
    ok = (THR["farey_ratio_d2_lo"] <= r2 <= THR["farey_ratio_d2_hi"]
          and THR["farey_ratio_d3_lo"] <= r3 <= THR["farey_ratio_d3_hi"]
          and elapsed < 10.0)
    report(1, "farey count vs asymptotic",
           ok, f"d2 ratio {r2:.6f}, d3 ratio {r3:.6f}, {elapsed:.2f}s")


def test_criterion_02_algebraic_identities():
    tol = THR["algebra_rel_tol"]
    trials = 10_000
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 4):
        rng = chunk_rng(1001, d)
        xs = rng.uniform(-20.0, 20.0, size=(trials, d - 1))
        ts = rng.uniform(-3.0, 3.0, size=trials)
        As = rng.uniform(0.3, 2.0, size=(trials, d - 1, d - 1)) + np.eye(d - 1)
        for i in range(trials):
            x, t, A = xs[i], ts[i], As[i]
            lhs, rhs = commute_flow(x, t)
            worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
            lhs = np.linalg.inv(n_minus(x) @ flow(d, t)).T
            rhs = n_plus(-x) @ flow(d, -t)
            worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
            C = conjugator(A)
            lhs = n_minus(x @ A) @ flow(d, t)
            rhs = C @ n_minus(x) @ flow(d, t) @ np.linalg.inv(C)
            worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    elapsed = time.perf_counter() - t0
    ok = worst < tol and elapsed < 5.0
    report(2, "algebraic identity suite",
           ok, f"worst relative error {worst:.2e} over 3x{trials} trials, {elapsed:.2f}s")


def test_criterion_03_thickening_equivalence():
    t0 = time.perf_counter()
    total, bad = 0, 0
    example = None
    for d in (2, 3):
        n, b, ex = thickening_equivalence_batch(d, 50_000, chunk_rng(1003, d))
        total += n
        bad += b
        example = example or ex
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and total >= 100_000 and elapsed < 30.0
    report(3, "thickening ball/cone equivalence",
           ok, f"{total} inputs, {bad} disagreements"
               f"{'' if example is None else ' e.g. ' + str(example)}, {elapsed:.2f}s")


def test_criterion_04_disjointness_implication_and_scan():
    t0 = time.perf_counter()
    checked = violations = 0
    for d in (2, 3, 4):
        c, v = step2_premise_batch(d, 400_000, chunk_rng(1004, d))
        checked += c
        violations += v
    eps0 = mahler_epsilon0([np.eye(1)])
    clash = disjointness_scan(200, 0.0, eps0 * 0.98)
    elapsed = time.perf_counter() - t0
    ok = (violations == 0 and checked >= 10 ** 6 and clash is None
          and elapsed < 60.0)
    report(4, "disjointness implication + ball scan",
           ok, f"{checked} premise trials, {violations} violations, "
               f"eps0 {eps0:.3f}, overlap {clash}, {elapsed:.2f}s")


def test_criterion_05_cone_volume():
    t0 = time.perf_counter()
    sig = THR["cone_volume_sigmas"]
    worst_z = 0.0
    combos = [(d, eps, theta) for d in (2, 3, 4)
              for eps, theta in ((0.3, 0.2), (0.7, 0.5), (1.2, 0.8))]
    ok = True
    for i, (d, eps, theta) in enumerate(combos):
        region = ConeRegion(d=d, epsilon=eps, theta=theta)
        est, se = cone_volume_mc(region, 10 ** 7, chunk_rng(1005, i))
        z = abs(est - cone_volume(region)) / se
        worst_z = max(worst_z, z)
        ok = ok and z <= sig
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30.0
    report(5, "cone volume closed form vs Monte Carlo",
           ok, f"9 combos at 1e7 points, worst z {worst_z:.2f} (limit {sig}), {elapsed:.2f}s")


def test_criterion_06_plain_ensemble_vs_oracle_and_quadrature():
    t0 = time.perf_counter()
    limit = THR["case_b_ks"]
    qlimit = THR["oracle_quadrature_ks"]
    details = []
    ok = True
    for sigma in (0.0, 1.0):
        cfg = ExperimentConfig(case="case_b", d=2, Q=2000, sigma=sigma, seed=1006,
                               n_reference=100_000, subsample=100_000)
        rep = run_case_b(cfg)
        oracle = case_b_reference(SV, 2, sigma, 100_000, seed=1006 + 1)
        values, weights = case_b_quadrature(SV, 2, sigma)
        qks = ks_sample_vs_interpolated(oracle.samples, values, weights)
        details.append(f"sigma {sigma:g}: KS {rep.ks:.4f}, quad KS {qks:.4f}")
        ok = ok and rep.ks < limit and qks < qlimit
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 300.0
    report(6, "plain ensemble vs oracle + quadrature cross-check",
           ok, "; ".join(details) + f", {elapsed:.1f}s")


def test_criterion_07_oracle_internals():
    t0 = time.perf_counter()
    tol_mean = THR["oracle_mean_s_rel_tol"]
    tol_tail = THR["mu_h_tail_rel_tol"]
    ok = True
    details = []
    for d in (2, 3):
        law = case_b_reference(SV, d, 0.0, 100_000, seed=1007 + d)
        target = 1.0 / (d * (d - 1))
        got = law.meta["mean_s_minus_sigma"]
        details.append(f"d={d} mean s {got:.5f} vs {target:.5f}")
        ok = ok and abs(got - target) / target < tol_mean
    _, y = fundamental_domain_batch(200_000, chunk_rng(1007, 0))

    def tail_quadrature(a):
        val, _ = integrate.dblquad(
            lambda yy, xx: 3.0 / math.pi / yy ** 2,
            -0.5, 0.5,
            lambda xx: max(a, math.sqrt(max(1.0 - xx * xx, 0.0))),
            math.inf,
        )
        return val

    for a in (2.0, 3.0):
        emp = float(np.mean(y > a))
        quad = tail_quadrature(a)
        details.append(f"P(y>{a:g}) {emp:.4f} vs {quad:.4f}")
        ok = ok and abs(emp - quad) / quad < tol_tail
    elapsed = time.perf_counter() - t0
    report(7, "oracle internals (flow-time mean, hyperbolic tails)",
           ok, "; ".join(details) + f", {elapsed:.1f}s")


def test_criterion_08_sheared_ensemble_d2_and_negative_control():
    t0 = time.perf_counter()
    limit = THR["case_a_d2_ks"]
    factor = THR["negative_control_factor"]
    cfg = ExperimentConfig(case="case_a", d=2, Q=2000, seed=1008, shear=SQRT2,
                           shear_is_irrational=True, n_reference=100_000,
                           subsample=100_000, reference_t=10.0)
    rep = run_case_a(cfg)
    ks_exact = rep.extras["ks_vs_haar_exact"]
    ctrl = ExperimentConfig(case="case_a", d=2, Q=2000, seed=1008, shear=1.0,
                            rational_control=True, n_reference=100_000,
                            subsample=100_000, reference_t=10.0)
    rep_ctrl = run_case_a(ctrl)
    elapsed = time.perf_counter() - t0
    ok = (rep.ks < limit and ks_exact < limit
          and rep_ctrl.ks >= factor * rep.ks and elapsed < 300.0)
    report(8, "sheared ensemble (irrational) vs Haar + rational control",
           ok, f"KS horosphere {rep.ks:.4f}, KS exact {ks_exact:.4f}, "
               f"control KS {rep_ctrl.ks:.4f} ({rep_ctrl.ks / rep.ks:.1f}x), {elapsed:.1f}s")


def test_criterion_09_sheared_ensemble_d3():
    t0 = time.perf_counter()
    limit = THR["case_a_d3_ks"]
    cfg = ExperimentConfig(case="case_a", d=3, Q=120, seed=1009,
                           shear=[[SQRT2, 0.0], [0.0, 1.0 / SQRT2]],
                           shear_is_irrational=True, n_reference=100_000,
                           reference_t=10.0)
    rep = run_case_a(cfg)
    elapsed = time.perf_counter() - t0
    ok = rep.ks < limit and elapsed < 600.0
    report(9, "sheared ensemble d=3 vs Haar",
           ok, f"KS {rep.ks:.4f} (limit {limit}), n {rep.n_empirical}, {elapsed:.1f}s")


def test_criterion_10_joint_independence():
    t0 = time.perf_counter()
    gap_limit = THR["joint_gap"]
    cfg = ExperimentConfig(case="joint", d=2, seed=1010, shear=SQRT2,
                           shear_is_irrational=True, t=8.0, n_points=100_000)
    rep = run_joint(cfg)
    ctrl = ExperimentConfig(case="joint", d=2, seed=1010, shear=1.0,
                            rational_control=True, t=8.0, n_points=20_000)
    rep_ctrl = run_joint(ctrl)
    corr_ctrl = rep_ctrl.extras["correlation"]
    elapsed = time.perf_counter() - t0
    ok = rep.ks < gap_limit and abs(corr_ctrl - 1.0) < 1e-9
    report(10, "joint product structure + degenerate control",
           ok, f"gap {rep.ks:.4f} (limit {gap_limit}), "
               f"corr {rep.extras['correlation']:.4f}, control corr {corr_ctrl:.6f}, "
               f"{elapsed:.1f}s")


def test_criterion_11_determinism_across_worker_counts(tmp_path):
    t0 = time.perf_counter()
    paths = {}
    for w in (1, 4):
        cfg = ExperimentConfig(case="case_b", d=2, Q=2000, sigma=0.0, seed=1006,
                               n_reference=100_000, subsample=100_000, workers=w)
        rep = run_case_b(cfg)
        out = write_report(rep, tmp_path / f"w{w}", stem="run", config=cfg, plot=False)
        paths[w] = out["csv"]
    same = filecmp.cmp(paths[1], paths[4], shallow=False)
    elapsed = time.perf_counter() - t0
    report(11, "byte-identical sample CSVs at worker counts 1 and 4",
           same, f"{paths[1].stat().st_size} bytes each, {elapsed:.1f}s")
