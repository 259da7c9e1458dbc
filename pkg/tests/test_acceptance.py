"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run under pytest (``pytest tests/test_acceptance.py -v``) or directly
(``python tests/test_acceptance.py``) for the plain per-criterion report.

Criterion 2 (the quoted baseline deviation ratios) is expected to fail on
its two (1,1) entries: the eight quoted reference values are mutually
inconsistent with the bundled five-decimal inputs, since by construction
all eight ratios equal one shift value divided by the respective sigma and
no shift reproduces all of them (see the data README and the companion
test for the attainable six).  The test asserts the quoted values anyway
and is marked as a strict expected failure rather than loosened.
"""
import time
from functools import lru_cache

import numpy as np
import pytest

import covrepair as cr
from helpers import random_block_diagonal_physical, random_physical_cm

# Table of reference confidence levels per bipartition for the three
# recovered matrices (diagonal-shift baseline, weighted repair, unweighted
# repair), quoted at two decimals.
CONFIDENCE_TABLE = {
    "1|2,3,4": (16.18, 19.09, 18.46),
    "1,3,4|2": (13.04, 16.52, 15.93),
    "1,2,4|3": (11.18, 15.42, 14.52),
    "1,2,3|4": (16.24, 19.27, 18.96),
    "1,2|3,4": (18.14, 21.69, 20.77),
    "1,3|2,4": (15.97, 18.87, 18.44),
    "1,4|2,3": (4.29, 8.48, 7.57),
}

GME_VIOLATIONS = {
    "1|2,3,4": 5.57,
    "1,3,4|2": 3.04,
    "1,2,4|3": 3.05,
    "1,2,3|4": 5.03,
    "1,2|3,4": 15.28,
    "1,3|2,4": 6.66,
    "1,4|2,3": 3.04,
}

QUOTED_BASELINE_XX = (16.59, 6.59, 6.29, 9.87)
QUOTED_BASELINE_PP = (11.84, 5.30, 3.70, 11.91)


@lru_cache(maxsize=None)
def _measured() -> cr.Dataset:
    return cr.load_bundled("fourpartite")


@lru_cache(maxsize=None)
def _reference() -> cr.Dataset:
    return cr.load_bundled("fourpartite_repaired")


@lru_cache(maxsize=None)
def _weighted() -> cr.RepairResult:
    ds = _measured()
    return cr.repair(ds.gamma, ds.sigma)


@lru_cache(maxsize=None)
def _unweighted() -> cr.RepairResult:
    return cr.repair(_measured().gamma, None)


def _report(num, detail: str) -> None:
    print(f"[criterion {num}] PASS: {detail}")


# --- criterion 1: four-partite repair ---------------------------------------


def test_c1_fourpartite_repair():
    ds = _measured()
    start = time.perf_counter()
    result = cr.repair(ds.gamma, ds.sigma)
    elapsed = time.perf_counter() - start
    assert result.solution.status == "optimal"
    assert abs(result.s_star - 1.88) <= 0.01
    ref = _reference().gamma
    dev_xx = np.abs(result.gamma_star.xx - ref.xx).max()
    dev_pp = np.abs(result.gamma_star.pp - ref.pp).max()
    assert dev_xx <= 2e-2 and dev_pp <= 2e-2
    assert elapsed < 5.0
    _report(1, f"s* = {result.s_star:.5f} (1.88 +- 0.01), max elementwise deviation "
               f"{max(dev_xx, dev_pp):.2e} <= 2e-2, runtime {elapsed:.2f} s < 5 s")


# --- criterion 2: baseline deviation ratios ----------------------------------


def _baseline_diagonal_ratios():
    ds = _measured()
    shifted = cr.baseline_shift(ds.gamma)
    dev = cr.deviation_report(ds.gamma, shifted, ds.sigma)
    xx = [dev.ratios[i, i] for i in range(4)]
    pp = [dev.ratios[4 + i, 4 + i] for i in range(4)]
    return xx, pp


@pytest.mark.xfail(
    strict=True,
    reason="the quoted (1,1) ratios are inconsistent with the bundled five-decimal "
    "inputs: all eight ratios equal one diagonal shift divided by sigma_ii, and no "
    "single shift value reproduces every quoted entry (the bundled data gives 16.62 "
    "and 11.86 instead of 16.59 and 11.84); the six consistent values are asserted "
    "in test_c2_baseline_ratios_attainable",
)
def test_c2_baseline_ratios_as_quoted():
    xx, pp = _baseline_diagonal_ratios()
    for got, want in zip(xx, QUOTED_BASELINE_XX):
        assert abs(got - want) <= 0.01
    for got, want in zip(pp, QUOTED_BASELINE_PP):
        assert abs(got - want) <= 0.01


def test_c2_baseline_ratios_attainable():
    xx, pp = _baseline_diagonal_ratios()
    # the six entries consistent with the bundled inputs, at the quoted tolerance
    for got, want in zip(xx[1:], QUOTED_BASELINE_XX[1:]):
        assert abs(got - want) <= 0.01
    for got, want in zip(pp[1:], QUOTED_BASELINE_PP[1:]):
        assert abs(got - want) <= 0.01
    # the (1,1) entries as the bundled data actually determines them
    assert xx[0] == pytest.approx(16.6192, abs=0.01)
    assert pp[0] == pytest.approx(11.8553, abs=0.01)
    # self-consistency: every diagonal ratio is the same shift over sigma_ii
    ds = _measured()
    shift = 1.001 * abs(cr.physicality_defect(ds.gamma).min_eig)
    expect = np.concatenate([shift / np.diag(ds.sigma.xx), shift / np.diag(ds.sigma.pp)])
    assert np.allclose(np.concatenate([xx, pp]), expect, atol=1e-9)
    _report("2*", "six of eight quoted ratios reproduced to +-0.01; (1,1) entries are "
                  f"{xx[0]:.4f} / {pp[0]:.4f} as determined by the bundled inputs "
                  "(quoted 16.59 / 11.84 unreachable, see xfail)")


# --- criterion 3: confidence table across the three recovered matrices ------


def test_c3_confidence_table():
    ds = _measured()
    matrices = (
        cr.baseline_shift(ds.gamma),
        _weighted().gamma_star,
        _unweighted().gamma_star,
    )
    worst = 0.0
    for column, gamma in enumerate(matrices):
        verdicts = {v.bipartition.label: v for v in cr.scan(gamma, ds.sigma)}
        assert len(verdicts) == 7
        for label, expected in CONFIDENCE_TABLE.items():
            got = verdicts[label].s0
            assert got is not None
            assert abs(got - expected[column]) <= 0.05, (
                f"column {column}, {label}: {got:.3f} vs {expected[column]}"
            )
            worst = max(worst, abs(got - expected[column]))
    _report(3, f"21 confidence levels match the reference table, worst deviation "
               f"{worst:.3f} <= 0.05")


# --- criterion 4: saturation count -------------------------------------------


def test_c4_saturation_count():
    ds = _measured()
    dev = cr.deviation_report(ds.gamma, _weighted().gamma_star, ds.sigma, threshold=1.87)
    assert dev.count_above == 9
    # 20 independent elements in the two upper triangles at n=4
    upper = np.triu_indices(4)
    total = len(upper[0]) * 2
    assert total == 20
    _report(4, f"exactly {dev.count_above} of {total} independent elements deviate "
               "by more than 1.87 sigma")


# --- criterion 5: genuine multipartite entanglement --------------------------


def test_c5_genuine_entanglement():
    ds = _measured()
    verdicts = cr.evaluate(ds.witness, _weighted().gamma_star, ds.sigma, maximizers=ds.maximizers)
    worst = 0.0
    for v in verdicts:
        expected = GME_VIOLATIONS[v.bipartition.label]
        rel = abs(v.violation - expected) / expected
        assert rel <= 0.05, f"{v.bipartition.label}: {v.violation:.3f} vs {expected}"
        worst = max(worst, rel)
    assert cr.certifies(verdicts, threshold=3.0)
    from covrepair.cli import main

    assert main(["genuine", "fourpartite", "--threshold", "3"]) == 0
    _report(5, f"seven violations within {worst * 100:.1f}% <= 5% of reference; "
               "certified at threshold 3 (CLI exit 0)")


# --- criterion 6: assembled problem shapes -----------------------------------


def test_c6_problem_shapes():
    one_mode = cr.CovarianceMatrix(xx=[[0.4]], pp=[[0.45]], xp=[[0.05]])
    p1 = cr.assemble(one_mode)
    assert (p1.num_vars, p1.total_dim) == (4, 11)
    ten_mode = cr.CovarianceMatrix.vacuum(10)
    p10 = cr.assemble(ten_mode)
    assert (p10.num_vars, p10.total_dim) == (111, 261)
    _report(6, "LMI shapes: (4 vars, dim 11) at n=1 full, (111 vars, dim 261) at "
               "n=10 block-diagonal")


# --- criterion 7: property suites --------------------------------------------


def test_c7a_repair_idempotence_on_physical_inputs():
    rng = np.random.default_rng(123)
    worst = 0.0
    for trial in range(100):
        n = trial % 6 + 1
        if trial % 2:
            gamma = random_physical_cm(n, rng)
        else:
            gamma = random_block_diagonal_physical(n, rng)
        sigma = cr.SigmaMatrix.uniform(n, 0.01) if trial % 3 == 0 else None
        result = cr.repair(gamma, sigma)
        worst = max(worst, result.s_star)
        assert result.s_star <= 1e-6
    _report("7a", f"100 physical inputs repaired with s* <= 1e-6 (worst {worst:.2e})")


def test_c7b_partial_transpose_involution_exact():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        cm = random_physical_cm(n, rng)
        modes = rng.choice(np.arange(1, n + 1), size=rng.integers(1, n), replace=False)
        bp = cr.Bipartition.from_group(modes, n)
        back = cr.partial_transpose(cr.partial_transpose(cm, bp), bp)
        assert np.array_equal(back.matrix, cm.matrix)
    _report("7b", "partial transposition is an exact involution on 50 random states")


def test_c7c_sign_choice_equivalence():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        xx = rng.standard_normal((n, n))
        xx = (xx + xx.T) / 2 + n * np.eye(n)
        pp = rng.standard_normal((n, n))
        pp = (pp + pp.T) / 2 + n * np.eye(n)
        cm = cr.CovarianceMatrix(xx=xx, pp=pp)
        modes = rng.choice(np.arange(1, n + 1), size=rng.integers(1, n), replace=False)
        bp = cr.Bipartition.from_group(modes, n)
        e = bp.signs()
        plus = np.linalg.eigvalsh(cr.ppt_matrix(cm, bp))
        minus = np.linalg.eigvalsh(
            np.block([[cm.xx, -0.5 * np.diag(e)], [-0.5 * np.diag(e), cm.pp]])
        )
        worst = max(worst, float(np.abs(plus - minus).max()))
        assert np.abs(plus - minus).max() <= 1e-12
    _report("7c", f"either sign of the group matrix gives identical spectra "
                  f"(worst gap {worst:.2e} <= 1e-12)")


def test_c7d_rank_one_identities():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        n = int(rng.integers(2, 5))
        h = rng.standard_normal(n)
        g = rng.standard_normal(n)
        size = int(rng.integers(1, n))
        modes = tuple(sorted(rng.choice(np.arange(1, n + 1), size=size, replace=False)))
        idx = np.array(modes) - 1
        tsp = cr.trace_sqrt_pair(np.outer(h, h), np.outer(g, g), modes)
        assert abs(tsp - abs(h[idx] @ g[idx])) <= 1e-8

        xx = rng.standard_normal((n, n))
        xx = (xx + xx.T) / 2 + n * np.eye(n)
        pp = rng.standard_normal((n, n))
        pp = (pp + pp.T) / 2 + n * np.eye(n)
        cm = cr.CovarianceMatrix(xx=xx, pp=pp)
        sxx = rng.uniform(0.01, 0.1, (n, n))
        sm = cr.SigmaMatrix(xx=(sxx + sxx.T) / 2, pp=(sxx + sxx.T) / 2)
        w = cr.MatrixWitness.from_vectors(h, g)
        assert abs(cr.witness_expectation(w, cm) - (h @ xx @ h + g @ pp @ g)) <= 1e-8
        h2, g2 = h**2, g**2
        direct = np.sqrt(h2 @ sm.xx**2 @ h2 + g2 @ sm.pp**2 @ g2)
        assert abs(cr.witness_sigma(w, sm) - direct) <= 1e-8
    _report("7d", "trace-sqrt vs dot product and matrix vs vector pairings agree "
                  "to 1e-8 on 1000 random trials")


def test_c7e_separable_states_respect_the_bound():
    from helpers import direct_sum

    rng = np.random.default_rng(29)
    worst = -np.inf
    for _ in range(1000):
        ka = int(rng.integers(1, 4))
        kb = int(rng.integers(1, 4))
        n = ka + kb
        modes = list(rng.permutation(np.arange(1, n + 1)))
        bp = cr.Bipartition(group_a=tuple(modes[:ka]), group_b=tuple(modes[ka:]))
        state = direct_sum(
            bp, random_physical_cm(len(bp.group_a), rng), random_physical_cm(len(bp.group_b), rng)
        )
        h = rng.standard_normal(n)
        g = rng.standard_normal(n)
        measured = h @ state.xx @ h + g @ state.pp @ g
        ia = [i - 1 for i in bp.group_a]
        ib = [i - 1 for i in bp.group_b]
        violation = (abs(h[ia] @ g[ia]) + abs(h[ib] @ g[ib])) - measured
        worst = max(worst, violation)
        assert violation <= 1e-9
    _report("7e", f"no separable direct-sum state violates the bound in 1000 trials "
                  f"(max margin {worst:.2e})")


def test_c7f_confidence_scale_invariance():
    ds = _reference()
    bp = cr.Bipartition.from_group([1], 4)
    w = cr.extract_witness(ds.gamma, bp)
    base = cr.confidence(w, bp, ds.gamma, ds.sigma).s0
    for lam in (2.0, 3.0, 0.5, 17.0):
        scaled = cr.WitnessVector(x_coeff=lam * w.x_coeff, p_coeff=lam * w.p_coeff)
        other = cr.confidence(scaled, bp, ds.gamma, ds.sigma).s0
        assert abs(base - other) <= 1e-12
    _report("7f", "confidence level invariant under witness rescaling to 1e-12")


def test_c7g_solver_certificates():
    rng = np.random.default_rng(31)
    ds = _measured()
    problems = [
        cr.assemble(ds.gamma, ds.sigma),
        cr.assemble(ds.gamma, None),
        cr.assemble(cr.CovarianceMatrix.vacuum(3)),
    ]
    for _ in range(5):
        n = int(rng.integers(1, 5))
        gamma = random_block_diagonal_physical(n, rng, margin=0.01)
        broken = cr.CovarianceMatrix(xx=gamma.xx - 0.03 * np.eye(n), pp=gamma.pp - 0.03 * np.eye(n))
        problems.append(cr.assemble(broken, cr.SigmaMatrix.uniform(n, 0.01)))
    worst = np.inf
    for problem in problems:
        sol = cr.solve(problem)
        assert sol.status == "optimal"
        report = cr.verify(problem, sol.x)
        worst = min(worst, report.min_eig)
        assert report.min_eig >= -1e-8
    _report("7g", f"{len(problems)} optimal solves pass independent verification "
                  f"(worst block eigenvalue {worst:.2e} >= -1e-8)")


# --- criterion 8: ten-mode synthetic scaling ----------------------------------


def test_c8_ten_mode_repair_runtime():
    rng = np.random.default_rng(99)
    physical = random_block_diagonal_physical(10, rng, margin=0.02)
    broken = cr.CovarianceMatrix(
        xx=physical.xx - 0.05 * np.eye(10), pp=physical.pp - 0.05 * np.eye(10)
    )
    assert cr.physicality_defect(broken).min_eig < 0
    sigma = cr.SigmaMatrix.uniform(10, 0.01)
    start = time.perf_counter()
    result = cr.repair(broken, sigma)
    elapsed = time.perf_counter() - start
    assert result.solution.status == "optimal"
    assert elapsed < 60.0
    assert cr.physicality_defect(result.gamma_star).min_eig >= -1e-6
    _report(8, f"10-mode repair finished optimal in {elapsed:.2f} s < 60 s "
               f"(s* = {result.s_star:.3f}, {result.solution.iterations} iterations)")


# --- standalone runner --------------------------------------------------------

CRITERIA = [
    ("1", "four-partite repair level, matrix and runtime", test_c1_fourpartite_repair, False),
    ("2", "baseline deviation ratios as quoted", test_c2_baseline_ratios_as_quoted, True),
    ("2*", "baseline deviation ratios, attainable part", test_c2_baseline_ratios_attainable, False),
    ("3", "confidence table for baseline/weighted/unweighted", test_c3_confidence_table, False),
    ("4", "saturation count 9 of 20", test_c4_saturation_count, False),
    ("5", "genuine multipartite entanglement violations", test_c5_genuine_entanglement, False),
    ("6", "assembled LMI shapes", test_c6_problem_shapes, False),
    ("7a", "repair idempotence on physical inputs", test_c7a_repair_idempotence_on_physical_inputs, False),
    ("7b", "partial transposition involution", test_c7b_partial_transpose_involution_exact, False),
    ("7c", "sign-choice equivalence", test_c7c_sign_choice_equivalence, False),
    ("7d", "rank-1 identities", test_c7d_rank_one_identities, False),
    ("7e", "separable-state soundness", test_c7e_separable_states_respect_the_bound, False),
    ("7f", "confidence scale invariance", test_c7f_confidence_scale_invariance, False),
    ("7g", "solver certificates", test_c7g_solver_certificates, False),
    ("8", "ten-mode synthetic repair runtime", test_c8_ten_mode_repair_runtime, False),
]


def main() -> int:
    failures = 0
    for num, desc, fn, expected_fail in CRITERIA:
        try:
            fn()
        except AssertionError as exc:
            if expected_fail:
                print(f"[criterion {num}] EXPECTED FAIL: {desc} "
                      f"(inconsistent reference values; see data README)")
            else:
                failures += 1
                print(f"[criterion {num}] FAIL: {desc}: {exc}")
        else:
            if expected_fail:
                failures += 1
                print(f"[criterion {num}] UNEXPECTED PASS: {desc}")
    print("acceptance:", "FAILED" if failures else "OK (one expected failure documented)")
    return 1 if failures else 0


if __name__ == "__main__":
    import sys

    sys.exit(main())
