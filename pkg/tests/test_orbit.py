import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import explicit, shift
from opchaos.density import IndexSet
from opchaos.errors import DivergentASeries, DivergentSum, NonInjectiveMap, SupNormMismatch, SupportExplosion
from opchaos.orbit import (
    SetFamily,
    SparseVector,
    TailBound,
    apply_operator,
    builtin_tail_bound,
    construct_dc_vector,
    construct_ddc_vector,
    dc_terms,
    fitted_tail_bound,
    irregularity_report,
    norm,
    orbit_norm_series,
    resolve_tail,
)
from opchaos.system import MassSpec, lp, reduce_translation
from opchaos.weights import Constant, Frontier, Periodic, RatioPower, StepFunction, Table, unilateral, window_product


def test_apply_kills_first_basis_vector(const2):
    assert apply_operator(const2, SparseVector.basis(1)).entries == {}


def test_apply_on_table_weights():
    s = shift(Table((1.0, 2.0, 3.0, 4.0), 1, Frontier.ERROR))
    assert apply_operator(s, SparseVector.basis(3)).entries == {2: 2.0}


def test_apply_on_translation_cells():
    s = reduce_translation(unilateral(StepFunction((2.0,), 1.0, 1.0, Frontier.HOLD)), lp(1.0), 1)
    assert apply_operator(s, SparseVector.indicator([5])).entries == {4: 2.0}


def test_apply_sums_over_fibers():
    s = explicit({1: 3, 2: 3, 3: 3}, weights={1: 2.0, 2: 3.0, 3: 1.0})
    assert apply_operator(s, SparseVector.basis(3)).entries == {1: 2.0, 2: 3.0, 3: 1.0}


def test_orbit_dies(const2):
    series = orbit_norm_series(const2, SparseVector.basis(5), 8)
    assert series.norms == [2.0, 4.0, 8.0, 16.0, 0.0, 0.0, 0.0, 0.0]
    assert series.cesaro[3] == pytest.approx(7.5)


def test_orbit_identity_bilateral():
    series = orbit_norm_series(shift(Constant(1.0), 1.0, "Z"), SparseVector.basis(0), 20)
    assert series.norms == [1.0] * 20
    assert irregularity_report(series).consistent_with == []


@pytest.mark.parametrize("i", [5, 12])
def test_orbit_ratio_power(ratio1, i):
    series = orbit_norm_series(ratio1, SparseVector.basis(i), i + 2)
    for n in range(1, i + 3):
        expected = i / (i - n) if n < i else 0.0
        assert series.norms[n - 1] == pytest.approx(expected, rel=1e-12)


def test_support_cap():
    s = explicit({1: 1, 2: 1, 3: 1})
    with pytest.raises(SupportExplosion):
        orbit_norm_series(s, SparseVector.basis(1), 3, support_cap=2)


def test_orbit_profile_for_basis_family(const2):
    peaks = []
    for k in (3, 6, 9):
        s = orbit_norm_series(const2, SparseVector.basis(k), 2 * k)
        assert s.norms[-1] == 0.0
        peaks.append(max(s.norms))
    assert peaks == [2.0 ** 2, 2.0 ** 5, 2.0 ** 8]


def test_tail_bound_sums():
    g = TailBound("geometric", 2.0, 0.5)
    assert g.tail_sum(3) == pytest.approx(2.0 * 0.5 ** 4 / 0.5)
    ps = TailBound("p_series", 1.0, 2.0)
    assert ps.tail_sum(10) >= math.fsum(1.0 / n ** 2 for n in range(11, 100000))
    assert g.violations({1: 1.0, 2: 0.6}) == [2]
    with pytest.raises(ValueError):
        TailBound("geometric", 1.0, 1.5)


def test_builtin_tail_is_exact_for_periodic_weights():
    s = shift(Periodic((4.0, 0.5)))
    fam = SetFamily.translated([1])
    terms = dc_terms(s, fam, IndexSet.naturals(), 40)
    tb = builtin_tail_bound(s, fam, terms, 1.0)
    assert tb is not None and tb.rate == pytest.approx(0.5 ** 0.5)
    assert tb.violations(terms) == []


def test_resolve_tail_sources(const2):
    fam = SetFamily.translated([1])
    terms = dc_terms(const2, fam, IndexSet.naturals(), 30)
    assert resolve_tail(const2, fam, terms, None)[1] == "builtin"
    assert resolve_tail(const2, fam, terms, TailBound("geometric", 1.0, 0.5))[1] == "declared"
    assert resolve_tail(const2, fam, terms, TailBound("geometric", 0.1, 0.2))[1] == "declared-rejected"
    s = shift(RatioPower(0.5))
    rterms = dc_terms(s, fam, IndexSet.naturals(), 30)
    assert resolve_tail(s, fam, rterms, None)[1] in ("fitted", "none")
    assert fitted_tail_bound({1: 1.0}) is None


def test_dc_vector_constant_two(const2):
    plan = construct_dc_vector(const2, SetFamily.translated([1]), IndexSet.naturals(), 200)
    assert plan.a[:4] == pytest.approx([0.5, 0.25, 0.125, 0.0625], rel=1e-12)
    assert plan.r[:3] == pytest.approx([1.0, 0.5, 0.25], rel=1e-12)
    assert plan.c[:3] == pytest.approx([2 ** -1, 2 ** -1.5, 2 ** -2], rel=1e-12)
    assert plan.bound == pytest.approx(2.0)
    assert plan.bound_holds
    assert plan.partial_sums[-1] == pytest.approx(1 + 1 / math.sqrt(2), abs=1e-9)
    assert plan.lower_bounds[:60] == pytest.approx([2 ** ((n - 1) / 2) for n in range(1, 61)], rel=1e-12)
    assert all(b > a for a, b in zip(plan.lower_bounds, plan.lower_bounds[1:]))
    assert plan.tail_source == "builtin"


def test_dc_vector_orbit_exceeds_lower_bounds(const2):
    plan = construct_dc_vector(const2, SetFamily.translated([1]), IndexSet.naturals(), 200)
    series = orbit_norm_series(const2, plan.vector, 40)
    for n in range(1, 41):
        assert series.norms[n - 1] >= plan.lower_bounds[n - 1] * (1 - 1e-12)
    rep = irregularity_report(orbit_norm_series(const2, plan.vector, 60), M=1e3)
    assert "cesaro-unbounded" in rep.consistent_with


def test_dc_vector_identity_diverges():
    with pytest.raises(DivergentASeries):
        construct_dc_vector(shift(Constant(1.0)), SetFamily.translated([1]), IndexSet.naturals(), 50)


def test_dc_vector_rejects_sup():
    with pytest.raises(SupNormMismatch):
        construct_dc_vector(shift(Constant(2.0), "sup"), SetFamily.translated([1]), IndexSet.naturals(), 10)


@pytest.mark.parametrize("k, expected", [(1, 1.0), (3, 0.25)])
def test_ddc_vector_constant_two(const2, k, expected):
    plan = construct_ddc_vector(const2, [1], IndexSet.naturals(), k, 200)
    assert plan.norm == pytest.approx(expected, rel=1e-12)
    assert plan.lower_bound_holds
    assert all(v >= 1.0 - 1e-12 for v in plan.checked.values())


def test_ddc_vector_finite_mass():
    s = shift(Constant(1.0), masses=MassSpec(1.0, 0.5))
    plan = construct_ddc_vector(s, [1], IndexSet.naturals(), 1, 200)
    assert plan.norm == pytest.approx(0.5, rel=1e-12)


def test_ddc_vector_permutation_diverges():
    s = explicit({1: 2, 2: 3, 3: 1})
    with pytest.raises(DivergentSum):
        construct_ddc_vector(s, [1], IndexSet.naturals(), 1, 50)


def test_ddc_vector_non_injective():
    s = explicit({1: 2, 2: 3, 3: 1, 4: 5, 5: 6, 6: 1})
    with pytest.raises(NonInjectiveMap):
        construct_ddc_vector(s, [4], IndexSet.naturals(), 1, 50)


@given(st.dictionaries(st.integers(2, 40), st.floats(-3.0, 3.0, allow_nan=False), min_size=1, max_size=8),
       st.integers(1, 5))
def test_apply_operator_matches_window_products(entries, n):
    spec = unilateral(Table(tuple(np.linspace(0.3, 2.5, 48).tolist()), 1, Frontier.HOLD))
    s = shift(spec.generator)
    v = SparseVector(entries)
    cur = v
    for _ in range(n):
        cur = apply_operator(s, cur)
    for x, c in cur.entries.items():
        assert c == pytest.approx(window_product(spec, x, n) * entries[x + n], rel=1e-12)
    assert set(cur.entries) == {y - n for y, c in entries.items() if y - n >= 1 and c != 0.0}


@given(st.integers(1, 30), st.integers(1, 30))
def test_dc_partial_sums_respect_bound(start, stride):
    base = shift(Constant(1.5 + 0.1 * (start % 5)))
    plan = construct_dc_vector(base, SetFamily.translated([start]), IndexSet.periodic([True] + [False] * (stride % 4)), 120)
    assert plan.bound_holds
    assert max(plan.partial_sums) <= plan.bound * (1 + 1e-15)


def test_norm_is_mass_weighted():
    s = shift(Constant(2.0), 2.0, masses=MassSpec(1.0, 0.5))
    v = SparseVector({1: 1.0, 2: 2.0})
    assert norm(s, v) == pytest.approx(math.sqrt(0.5 * 1 + 0.25 * 4))
