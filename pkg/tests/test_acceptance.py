"""Acceptance checks, one test per criterion.  Each prints a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import explicit, piecewise, shift
from opchaos.classify import (
    DCCertificate,
    Status,
    classify_li_yorke,
    classify_mean_li_yorke,
    dc_certificate_check,
)
from opchaos.density import IndexSet, block_mask, counting_function, density_estimate
from opchaos.norms import formula_gap_report, jensen_excess, np_cesaro, per_index_cesaro
from opchaos.oracle import (
    brute_count,
    brute_density_counts,
    brute_singleton_ratios,
    norm_oracle_sweep,
    random_table_specs,
)
from opchaos.orbit import SetFamily, construct_dc_vector
from opchaos.system import build_shift_system, hopf_decompose, lp, verify_wandering
from opchaos.weights import BlockConcat, Constant, Frontier, RatioPower, Table, unilateral


@pytest.fixture
def report(capsys):
    """Run a criterion body, print one PASS/FAIL line and re-raise failures."""

    def run(label, body):
        t0 = time.perf_counter()
        try:
            detail = body()
        except AssertionError as exc:
            with capsys.disabled():
                first = str(exc).splitlines()[0] if str(exc) else "assertion failed"
                print(f"\n[acceptance] {label}: FAIL ({time.perf_counter() - t0:.2f}s) {first}")
            raise
        with capsys.disabled():
            print(f"\n[acceptance] {label}: PASS ({time.perf_counter() - t0:.2f}s) {detail or ''}")

    return run


def test_c1_norm_formula_oracle(report):
    def body():
        t0 = time.perf_counter()
        cases = norm_oracle_sweep(count=100, n_max=16, ps=(1.0, 2.0, "sup"), length=64)
        elapsed = time.perf_counter() - t0
        worst = max(c.rel_delta for c in cases)
        assert len(cases) == 100 * 16 * 3
        assert worst <= 1e-9, f"max relative delta {worst:.3e}"
        assert elapsed < 10.0, f"runtime {elapsed:.2f}s"
        return f"{len(cases)} cases, max rel delta {worst:.2e}"

    report("C1 norm formula vs dense powers", body)


def test_c2_cesaro_bound_and_harmonic_divergence(report):
    def body():
        t0 = time.perf_counter()
        rep = np_cesaro(shift(RatioPower(2.0), 1.0), 1000, (1, 10_000))
        i = 10_000
        value = per_index_cesaro(shift(RatioPower(2.0), 2.0), i, i - 1, 2.0)
        elapsed = time.perf_counter() - t0
        expected = i / (i - 1) * math.fsum(1.0 / k for k in range(1, i))
        assert rep.value <= 4.0, f"N_1 scan {rep.value}"
        assert abs(value - expected) <= 1e-9 * expected, f"{value} vs {expected}"
        assert value > 9.5
        assert elapsed < 30.0, f"runtime {elapsed:.2f}s"
        return f"N_1 scan {rep.value:.6f} <= 4, q-side sum {value:.9f}"

    report("C2 Cesaro bound and q-side divergence", body)


def test_c3_bayart_certificate_replay(report):
    def body():
        system = shift(RatioPower(1.0))
        cert = DCCertificate.bayart((3, 4, 5))
        assert cert.schedule == [k ** k + 1 for k in (3, 4, 5)]
        assert cert.N == [k * (k ** k + 1) for k in (3, 4, 5)]
        t0 = time.perf_counter()
        verdict = dc_certificate_check(system, cert)
        elapsed = time.perf_counter() - t0
        assert verdict.status is Status.CERTIFIED and verdict.holds
        counts = []
        for level, (k, N) in enumerate(zip(cert.ks, cert.N)):
            wit = verdict.witnesses[level]
            assert wit["count"] >= (k - 2) / k * N
            cells = [cert.family[j][0] for j, _ in cert.combos[level]]
            b = [bj for _, bj in cert.combos[level]]
            assert all(bj == 1.0 / i for i, bj in zip(cells, b))
            ratios = brute_singleton_ratios(system, cells, b, N)
            assert brute_count(lambda n: ratios[n - 1] > k, N) == wit["count"]
            counts.append(wit["count"])
        assert elapsed < 5.0, f"runtime {elapsed:.2f}s"
        return f"counts {counts} for N {cert.N}"

    report("C3 counting certificate replay", body)


def test_c4_dc_vector_bound(report):
    def body():
        plan = construct_dc_vector(shift(Constant(2.0), 1.0), SetFamily.translated([1]), IndexSet.naturals(), 200)
        assert plan.bound == pytest.approx(2.0)
        assert all(s <= plan.bound for s in plan.partial_sums)
        assert abs(plan.partial_sums[-1] - (1 + 1 / math.sqrt(2))) <= 1e-9
        for n in range(1, 61):
            target = 2 ** ((n - 1) / 2)
            assert abs(plan.lower_bounds[n - 1] - target) <= 1e-12 * target
        return f"limit {plan.partial_sums[-1]:.10f} <= {plan.bound}"

    report("C4 dense chaos vector series bound", body)


def test_c5_li_yorke_dichotomies(report):
    def body():
        cases = [
            (shift(Constant(2.0)), True),
            (shift(Constant(0.5)), False),
            (piecewise(2.0, 0.5), False),
        ]
        for system, holds in cases:
            v = classify_li_yorke(system)
            assert v.status is Status.EXACT, v.status
            assert v.holds is holds
        return "unilateral 2 holds, unilateral 1/2 and bilateral 2|1/2 refuted"

    report("C5 Li-Yorke dichotomies", body)


def test_c6_mean_li_yorke_bilateral(report):
    def body():
        cases = [
            (piecewise(0.5, 2.0), True),
            (piecewise(2.0, 0.5), False),
            (shift(Constant(1.0), 1.0, "Z"), False),
        ]
        for system, holds in cases:
            v = classify_mean_li_yorke(system)
            assert v.status is Status.CERTIFIED, v.status
            assert v.holds is holds
        return "1/2|2 holds, 2|1/2 and w = 1 refuted"

    report("C6 bilateral mean Li-Yorke", body)


def test_c7_density_estimator(report):
    def body():
        t0 = time.perf_counter()
        evens = density_estimate(IndexSet.evens(), 1 << 12)
        assert evens.exact == (0.5, 0.5)
        horizon = 1 << 20
        D = IndexSet.from_mask(block_mask(4, 1, 2, horizon))
        est = density_estimate(D, horizon)
        assert abs(est.lower_stat - 1 / 3) <= 0.01 and abs(est.upper_stat - 2 / 3) <= 0.01
        # n lies in some [4^k, 2 * 4^k) iff its highest set bit sits at an even position
        checkpoints = [1 << k for k in range(21)] + [3 * (1 << k) for k in range(19)] + [horizon]
        brute = brute_density_counts(lambda n: (n.bit_length() - 1) % 2 == 0, checkpoints)
        counts = counting_function(D, horizon)
        assert all(int(counts[n - 1]) == brute[n] for n in checkpoints)
        elapsed = time.perf_counter() - t0
        assert elapsed < 5.0, f"runtime {elapsed:.2f}s"
        return f"dyadic blocks ({est.lower_stat:.4f}, {est.upper_stat:.4f}), {len(brute)} checkpoints exact"

    report("C7 density estimator", body)


def test_c8_formula_gap(report):
    def body():
        t0 = time.perf_counter()
        rep = formula_gap_report(unilateral(BlockConcat(2)), 1.0, 120, 10_000)
        elapsed = time.perf_counter() - t0
        v_max = max(list(rep.lp_means) + list(rep.checkpoints.values()))
        assert rep.c0_value > 2.7, f"c0 statistic {rep.c0_value}"
        assert v_max < math.e, f"V_N reached {v_max}"
        assert elapsed < 10.0, f"runtime {elapsed:.2f}s"
        v = rep.checkpoints[10_000]
        assert abs(v - (math.e - 1)) <= 1e-3, (
            f"V_N at N=10^4 is {v:.9f}, off e-1 by {abs(v - (math.e - 1)):.3e} "
            f"(block-aligned index gives {rep.aligned_checkpoints[10_000]:.9f})"
        )
        return f"c0 {rep.c0_value:.4f} > 2.7, max V_N {v_max:.4f} < e, V_10^4 {v:.6f}"

    report("C8 formula gap on block weights", body)


def test_c9_jensen_monotonicity(report):
    def body():
        t0 = time.perf_counter()
        worst = -math.inf
        for vals in random_table_specs(50, 64, seed=7):
            s = build_shift_system(unilateral(Table(vals, 1, Frontier.ZERO)), lp(2.0))
            worst = max(worst, jensen_excess(s, 64, np.arange(1, 130), 1.0, 2.0))
        elapsed = time.perf_counter() - t0
        assert worst <= 1e-12, f"excess {worst}"
        assert elapsed < 10.0, f"runtime {elapsed:.2f}s"
        return f"max mean_1 - mean_2^(1/2) = {worst:.3e}"

    report("C9 Jensen monotonicity", body)


def test_c10_hopf_decomposition(report):
    def body():
        perm = hopf_decompose(explicit({1: 2, 2: 3, 3: 4, 4: 1}))
        assert perm.dissipative.is_empty() and perm.conservative.members == frozenset({1, 2, 3, 4})
        bi = hopf_decompose(shift(Constant(2.0), 1.0, "Z"), 1000)
        assert bi.dissipative.everything and bi.wandering_generator.members == frozenset({0})
        mixed_sys = explicit({1: 2, 2: 3, 3: 1, 4: 5, 5: 6, 6: 1})
        mixed = hopf_decompose(mixed_sys, 1000)
        assert mixed.conservative.members == frozenset({1, 2, 3})
        assert mixed.dissipative.members == frozenset({4, 5, 6})
        assert mixed.wandering_generator.members == frozenset({4})
        assert verify_wandering(mixed_sys, [4], mixed.dissipative, 1000, backward=False)
        return "permutation conservative, bilateral dissipative, mixed {1,2,3}/{4,5,6}"

    report("C10 Hopf decomposition", body)
