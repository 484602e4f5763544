"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

The recovery-frequency criteria run full 200-trial curves and dominate
the runtime (a couple of hours single-core); run with ``-s`` to watch the
per-criterion lines appear.
"""

import numpy as np
import pytest

from helpers import gated_instance
from sigspace.dictionaries import make_random_orthonormal
from sigspace.experiments import ExperimentSpec, export_csv, run_curve
from sigspace.linalg import top_k_indices
from sigspace.metrics import (
    bound_report,
    convergence_constants,
    drip_constant,
    localization_factor,
    tail_energy,
)
from sigspace.projections import ProjectionScheme, lambda_opt_bruteforce, sd_threshold
from sigspace.pursuit import SolverSpec, solve
from sigspace.signals import SupportModel, gen_p_compressible, gen_sparse_coef
from sigspace.sssp import SsspConfig, sssp_recover
from sigspace.dictionaries import SensingMatrix, make_gaussian_sensing, make_identity


def report(criterion: str, passed: bool, detail: str) -> bool:
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    return passed


ORTHONORMAL_SPEC = ExperimentSpec(
    n=256, d=256, k=10, dict_kind="random-orthonormal", dict_seed=11,
    support_model=SupportModel("uniform"),
    m_values=tuple(range(20, 121, 5)), trials=200,
    algorithms=("sssp:threshold",),
    success_rel_tol=1e-4, master_seed=2024,
)

RENORMALIZED_SPEC = ExperimentSpec(
    n=256, d=256, k=10, dict_kind="renormalized-orthogonal", dict_seed=11,
    support_model=SupportModel("uniform"),
    m_values=tuple(range(20, 121, 5)), trials=200,
    algorithms=("sssp:threshold", "omp", "cosamp", "bp"),
    success_rel_tol=1e-4, master_seed=2024,
    l1_max_iter=800, l1_tol=1e-6,
)

DFT_SEPARATED_SPEC = ExperimentSpec(
    n=256, d=1024, k=8, dict_kind="overcomplete-dft", oversampling=4,
    support_model=SupportModel("separated"),
    m_values=tuple(range(20, 161, 20)), trials=200,
    algorithms=("sssp:l1", "sssp:threshold", "omp"),
    success_rel_tol=1e-4, master_seed=77,
    sssp_max_iter=6, l1_max_iter=300, l1_tol=1e-6, inner_iters=10,
)

DFT_CLUSTERED_SPEC = ExperimentSpec(
    n=256, d=1024, k=8, dict_kind="overcomplete-dft", oversampling=4,
    support_model=SupportModel("clustered"),
    m_values=tuple(range(20, 161, 20)), trials=200,
    algorithms=("sssp:cosamp", "omp"),
    success_rel_tol=1e-4, master_seed=31,
    sssp_max_iter=6, l1_max_iter=300, l1_tol=1e-6, inner_iters=10,
)


def frequencies(curves, algorithm):
    curve = next(c for c in curves if c.algorithm == algorithm)
    return {p.m: p.frequency for p in curve.points}


@pytest.fixture(scope="module")
def orthonormal_curves():
    return run_curve(ORTHONORMAL_SPEC)


@pytest.fixture(scope="module")
def renormalized_curves():
    return run_curve(RENORMALIZED_SPEC)


@pytest.fixture(scope="module")
def dft_separated_curves():
    return run_curve(DFT_SEPARATED_SPEC)


@pytest.fixture(scope="module")
def dft_clustered_curves():
    return run_curve(DFT_CLUSTERED_SPEC)


def test_criterion_01_orthonormal_reproduction(orthonormal_curves):
    freq = frequencies(orthonormal_curves, "sssp:threshold")
    passed = freq[55] >= 0.80 and freq[70] >= 0.95
    assert report("1 (orthonormal reproduction)", passed,
                  f"frequency at m=55: {freq[55]:.3f} (need >= 0.80), "
                  f"at m=70: {freq[70]:.3f} (need >= 0.95)")


def test_criterion_02_baseline_ordering(renormalized_curves):
    sssp = frequencies(renormalized_curves, "sssp:threshold")
    omp = frequencies(renormalized_curves, "omp")
    cosamp = frequencies(renormalized_curves, "cosamp")
    bp = frequencies(renormalized_curves, "bp")
    slack = 0.05
    ordering_ok = all(sssp[m] >= omp[m] - slack and sssp[m] >= cosamp[m] - slack
                      for m in sssp)
    window = [m for m in bp if 60 <= m <= 70]
    bp_ok = max(bp[m] for m in window) >= 0.90 and bp[70] >= 0.90
    worst = min((sssp[m] - max(omp[m], cosamp[m]), m) for m in sssp)
    passed = ordering_ok and bp_ok
    assert report("2 (baseline ordering)", passed,
                  f"worst SSSP margin {worst[0]:+.3f} at m={worst[1]} (slack {slack}), "
                  f"BP in m=[60,70]: {[f'{bp[m]:.2f}' for m in window]}")


def test_criterion_03_dft_separated(dft_separated_curves):
    l1 = frequencies(dft_separated_curves, "sssp:l1")
    thr = frequencies(dft_separated_curves, "sssp:threshold")
    omp = frequencies(dft_separated_curves, "omp")
    slack = 0.05
    ms = [m for m in l1 if m >= 80]
    passed = all(l1[m] >= thr[m] - slack and l1[m] >= omp[m] - slack for m in ms)
    detail = ", ".join(f"m={m}: l1={l1[m]:.2f} thr={thr[m]:.2f} omp={omp[m]:.2f}"
                       for m in ms)
    assert report("3 (DFT separated supports)", passed, detail)


def test_criterion_04_dft_clustered(dft_clustered_curves):
    cosamp = frequencies(dft_clustered_curves, "sssp:cosamp")
    omp = frequencies(dft_clustered_curves, "omp")
    omp_low = all(omp[m] <= 0.2 for m in omp)
    gap = max((cosamp[m] - omp[m], m) for m in cosamp if m <= 120)
    passed = omp_low and gap[0] >= 0.10
    assert report("4 (DFT clustered supports)", passed,
                  f"max OMP frequency {max(omp.values()):.2f} (need <= 0.2), "
                  f"best SSSP(CoSaMP) margin {gap[0]:+.2f} at m={gap[1]} (need >= +0.10)")


def test_criterion_05_geometric_decay(tmp_path):
    instances = 0
    violations = 0
    logged = 0
    evidence = []
    seed = 0
    while instances < 50 and seed < 400:
        k = 1 + seed % 2
        inst = gated_instance(seed, n=12, k=k,
                              noise_rel=0.08 if seed % 3 == 0 else 0.0)
        seed += 1
        if inst is None:
            continue
        instances += 1
        A, D, coef, x, y, noise_norm, delta = inst
        res = sssp_recover(A, D, y, SsspConfig(k=k, scheme=ProjectionScheme("bruteforce"),
                                               max_iter=8), keep_iterates=True)
        prev = np.zeros_like(x)
        for _, xl in res.iterates:
            rep = bound_report("contraction", x=x, x_prev=prev, x_iter=xl,
                               e_norm=noise_norm, delta=delta)
            evidence.append(rep)
            logged += 1
            if not rep.holds(1e-12 * np.linalg.norm(x)):
                violations += 1
            prev = xl
    log = tmp_path / "contraction_evidence.jsonl"
    log.write_text("\n".join(r.to_json() for r in evidence) + "\n")
    passed = instances >= 50 and violations == 0
    assert report("5 (per-iteration decay)", passed,
                  f"{instances} gated instances, {logged} logged iterations, "
                  f"{violations} violations (evidence: {log})")


def test_criterion_06_norm_inflation_bound(tmp_path):
    rng = np.random.default_rng(123)
    violations = 0
    evidence = []
    for trial in range(1000):
        n = 8
        m = int(rng.integers(4, 9))
        k = int(rng.integers(1, 4))
        A = SensingMatrix(rng.standard_normal((m, n)) / np.sqrt(m))
        delta = drip_constant(A, make_identity(n), k).delta
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        rep = bound_report("rip-upper", A=A, x=x, delta=delta, k=k)
        evidence.append(rep)
        if not rep.holds(1e-10):
            violations += 1
    log = tmp_path / "norm_inflation_evidence.jsonl"
    log.write_text("\n".join(r.to_json() for r in evidence) + "\n")
    passed = violations == 0
    assert report("6 (norm inflation bound)", passed,
                  f"1000 instances with exact constants, {violations} violations")


def test_criterion_07_localization_factor_orthonormal():
    rng = np.random.default_rng(5)
    worst = 0.0
    for i in range(10):
        n = int(rng.integers(8, 17))
        k = int(rng.integers(1, 4))
        eta = localization_factor(make_random_orthonormal(n, seed=200 + i), k, seed=i)
        worst = max(worst, abs(eta - 1.0))
    passed = worst <= 1e-6
    assert report("7 (orthonormal localization factor)", passed,
                  f"max |eta - 1| = {worst:.2e} over 10 dictionaries")


def test_criterion_08_convergence_constants():
    c1, c2 = convergence_constants(0.1, 0.1, 1.0)
    passed = c1 <= 0.5 and c2 <= 7.5
    report("8 (convergence constants)", passed,
           f"got C1={c1:.4f} (claimed <= 0.5), C2={c2:.4f} (claimed <= 7.5)")
    assert passed, (
        f"the stated constants are inconsistent with the defining formula: "
        f"((2+0.1)*0.1+0.1)*(2+1)*sqrt(1.1/0.9) = {c1:.4f} > 0.5 and "
        f"(2+1)*((2+0.1)*1.1+2)/sqrt(0.9) = {c2:.4f} > 7.5; the formula itself is "
        f"pinned by the zero-point check C(0,0,0) = (0, 8), so the claim cannot "
        f"hold under any reading that keeps that check true"
    )


def test_criterion_09_compressible_tail_bounds():
    violations = 0
    checks = 0
    for p in (0.3, 0.5, 0.8):
        d1 = 1.0 / (1.0 / p - 1.0)
        d2 = (2.0 / p - 1.0) ** -0.5
        for k in (4, 8, 16):
            for seed in range(5):
                x = gen_p_compressible(256, p=p, R=1.0, seed=seed)
                mags = np.sort(np.abs(x))[::-1]
                tail = mags[k:]
                checks += 3
                if np.sum(tail) > d1 * k ** (1 - 1.0 / p) + 1e-12:
                    violations += 1
                if np.linalg.norm(tail) > d2 * k ** (0.5 - 1.0 / p) + 1e-12:
                    violations += 1
                if tail_energy(x, k, 0.3) > 2 * d1 * k ** (0.5 - 1.0 / p) + 0.3 + 1e-12:
                    violations += 1
    passed = violations == 0
    assert report("9 (compressible tail bounds)", passed,
                  f"{checks} bound evaluations, {violations} violations")


def test_criterion_10_oracle_equivalence():
    rng = np.random.default_rng(9)
    D = make_random_orthonormal(8, seed=42)
    mismatches = 0
    for _ in range(500):
        z = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        if not np.array_equal(sd_threshold(D, z, 2).support,
                              lambda_opt_bruteforce(D, z, 2).support):
            mismatches += 1

    ident = make_identity(40)
    sp_mismatches = 0
    for seed in range(100):
        A = make_gaussian_sensing(20, 40, seed=seed)
        coef = gen_sparse_coef(40, 3, SupportModel("uniform"), seed=seed + 999)
        y = A.matrix @ coef.dense()
        res = sssp_recover(A, ident, y, SsspConfig(k=3))
        sp = solve(A.matrix, y, SolverSpec("sp", 3))
        if not np.array_equal(res.support, sp.support):
            sp_mismatches += 1
    passed = mismatches == 0 and sp_mismatches == 0
    assert report("10 (oracle equivalence)", passed,
                  f"threshold vs exhaustive: {mismatches}/500 mismatches; "
                  f"identity-dictionary engine vs subspace pursuit: {sp_mismatches}/100")


def test_criterion_11_csv_determinism(orthonormal_curves, tmp_path):
    first = tmp_path / "run1.csv"
    second = tmp_path / "run2.csv"
    export_csv(orthonormal_curves, first)
    export_csv(run_curve(ORTHONORMAL_SPEC), second)
    passed = first.read_bytes() == second.read_bytes()
    assert report("11 (byte-identical reruns)", passed,
                  f"{first.stat().st_size} bytes compared equal" if passed
                  else "CSV bytes differ between identical runs")
