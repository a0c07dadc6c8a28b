from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opchaos.density import (
    IndexSet,
    block_mask,
    counting_function,
    density_estimate,
    index_set_from_json,
    lower_density_stat,
    positive_upper_density,
    upper_density_stat,
)
from opchaos.errors import ConfigError
from opchaos.oracle import brute_density_counts


def test_evens_exact():
    est = density_estimate(IndexSet.evens(), 1000)
    assert est.exact == (Fraction(1, 2), Fraction(1, 2))
    assert est.upper_stat == pytest.approx(0.5)


def test_finite_set_has_density_zero():
    D = IndexSet.finite([3, 5, 8])
    assert D.exact_density() == (Fraction(0), Fraction(0))
    assert D.members(20).tolist() == [3, 5, 8]
    assert positive_upper_density(D) == (False, True, 0.0)


def test_eventually_periodic_density_ignores_preperiod():
    D = IndexSet.periodic([True, False, False], [True] * 10)
    assert D.exact_density() == (Fraction(1, 3), Fraction(1, 3))
    assert D.contains(7) and D.contains(11) and not D.contains(12)


def test_dyadic_blocks_moderate_horizon():
    D = IndexSet.from_mask(block_mask(4, 1, 2, 1 << 14))
    est = density_estimate(D, 1 << 14)
    assert est.exact is None
    assert abs(est.lower_stat - 1 / 3) < 0.01
    assert abs(est.upper_stat - 2 / 3) < 0.01


def test_block_mask_membership():
    mask = block_mask(4, 1, 2, 40)
    members = (np.flatnonzero(mask) + 1).tolist()
    assert members == [1, 4, 5, 6, 7, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31]


def test_threshold_sets():
    D = IndexSet.threshold([0.1, 3.0, 0.2, 5.0], ">", 1.0)
    assert D.members(4).tolist() == [2, 4]
    with pytest.raises(ValueError):
        D.contains(5)


def test_density_statistics_on_masks():
    assert upper_density_stat(np.array([], dtype=bool)) == 0.0
    mask = np.zeros(100, dtype=bool)
    mask[::2] = True
    assert lower_density_stat(mask) == pytest.approx(0.5)
    assert upper_density_stat(mask) == pytest.approx(26 / 51)


@pytest.mark.parametrize(
    "doc",
    [
        {"kind": "naturals"},
        {"kind": "periodic", "preperiod": [1, 0], "period": [0, 1]},
        {"kind": "finite", "members": [2, 3]},
        {"kind": "members", "members": [1, 4, 9], "horizon": 10},
        {"kind": "threshold", "series": [1, 2, 3], "op": "<=", "threshold": 2},
    ],
)
def test_index_set_json_round_trip(doc):
    D = index_set_from_json(doc)
    again = index_set_from_json(D.to_json())
    h = D.horizon or 30
    assert np.array_equal(D.indicator(h), again.indicator(h))


@pytest.mark.parametrize(
    "doc, pointer",
    [
        ({"kind": "periodic", "period": []}, "/period"),
        ({"kind": "finite", "members": [0]}, "/members"),
        ({"kind": "blocks", "base": 1, "horizon": 10}, "/"),
        ({"kind": "threshold", "series": [1], "op": "!=", "threshold": 0}, "/op"),
        ({"kind": "cantor"}, "/kind"),
    ],
)
def test_index_set_json_errors(doc, pointer):
    with pytest.raises(ConfigError) as err:
        index_set_from_json(doc)
    assert err.value.pointer == pointer


@given(st.lists(st.booleans(), min_size=1, max_size=8), st.lists(st.booleans(), max_size=8),
       st.integers(1, 300))
def test_counting_matches_brute(period, pre, horizon):
    D = IndexSet.periodic(period, pre)
    counts = counting_function(D, horizon)
    brute = brute_density_counts(D.contains, range(1, horizon + 1))
    assert all(counts[n - 1] == brute[n] for n in range(1, horizon + 1))


@given(st.lists(st.booleans(), min_size=1, max_size=8))
def test_periodic_statistics_converge_to_exact(period):
    D = IndexSet.periodic(period)
    est = density_estimate(D, 4096)
    exact = float(D.exact_density()[0])
    assert abs(est.upper_stat - exact) <= len(period) / 2048 + 1e-12
    assert abs(est.lower_stat - exact) <= len(period) / 2048 + 1e-12
