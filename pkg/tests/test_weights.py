import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opchaos.errors import ConfigError, DomainMismatch, IndexOutOfDomain, NonFiniteWeight
from opchaos.weights import (
    EXACT,
    BlockConcat,
    Constant,
    Frontier,
    Growth,
    Periodic,
    PiecewiseBilateral,
    RatioPower,
    StepFunction,
    Table,
    WindowProductCache,
    backward_window_product,
    bilateral,
    generator_from_json,
    liminf_backward_products,
    spec_from_json,
    sup_window_product,
    unilateral,
    window_product,
)


@pytest.mark.parametrize(
    "spec, i, n, expected",
    [
        (unilateral(RatioPower(2.0)), 1, 3, 2.0),
        (unilateral(Constant(2.0)), 7, 5, 32.0),
        (unilateral(Table((1, 2, 3, 4), 1)), 2, 2, 6.0),
        (unilateral(Periodic((2.0, 0.5))), 1, 2, 1.0),
    ],
)
def test_window_product(spec, i, n, expected):
    assert window_product(spec, i, n) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "spec, i, n, expected",
    [
        (bilateral(Constant(2.0)), 0, 4, 16.0),
        (unilateral(Constant(2.0)), 3, 5, 0.0),
        (unilateral(RatioPower(1.0)), 10, 4, 10 / 6),
    ],
)
def test_backward_window_product(spec, i, n, expected):
    assert backward_window_product(spec, i, n) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "spec, n, value, witness",
    [
        (unilateral(RatioPower(1.0)), 4, 5.0, 1),
        (unilateral(Constant(0.5)), 3, 0.125, None),
        (unilateral(Periodic((2.0, 0.5))), 2, 1.0, 1),
    ],
)
def test_sup_window_exact(spec, n, value, witness):
    sw = sup_window_product(spec, n, EXACT)
    assert sw.exact
    assert sw.value == pytest.approx(value, rel=1e-12)
    if witness is not None:
        assert sw.witness == witness


def test_sup_window_scan_matches_exact():
    spec = unilateral(RatioPower(3.0))
    for n in (1, 2, 7, 20):
        exact = sup_window_product(spec, n)
        scanned = sup_window_product(spec, n, (1, 500))
        assert scanned.value == pytest.approx(exact.value, rel=1e-12)
        assert scanned.witness == exact.witness == 1


@pytest.mark.parametrize(
    "gen, expected",
    [(Constant(0.5), 0.0), (Constant(2.0), math.inf), (Periodic((2.0, 0.5)), 1.0)],
)
def test_liminf_backward_products(gen, expected):
    res = liminf_backward_products(bilateral(gen), 64)
    assert res.exact_limit == expected


def test_liminf_backward_needs_bilateral():
    with pytest.raises(DomainMismatch):
        liminf_backward_products(unilateral(Constant(2.0)), 10)


def test_growth_classes():
    assert Constant(2.0).growth(None) is Growth.DIVERGENT
    assert Constant(1.0).growth(None) is Growth.BOUNDED
    assert RatioPower(2.0).growth(None) is Growth.DIVERGENT
    assert Periodic((2.0, 0.5)).growth(None) is Growth.BOUNDED
    assert BlockConcat(2).growth(None) is Growth.BOUNDED


def test_table_frontiers():
    t = unilateral(Table((1.0, 2.0, 3.0), 1, Frontier.HOLD))
    assert window_product(t, 3, 3) == pytest.approx(27.0)
    z = unilateral(Table((1.0, 2.0, 3.0), 1, Frontier.ZERO))
    assert window_product(z, 3, 2) == 0.0
    e = unilateral(Table((1.0, 2.0, 3.0), 1, Frontier.ERROR))
    with pytest.raises(IndexOutOfDomain):
        window_product(e, 3, 2)


def test_unilateral_rejects_nonpositive_index():
    with pytest.raises(IndexOutOfDomain):
        unilateral(Constant(2.0)).value(0)
    with pytest.raises(DomainMismatch):
        bilateral(RatioPower(1.0))


def test_nonfinite_weight_rejected():
    with pytest.raises(NonFiniteWeight):
        Constant(math.inf)


def test_block_concat_products_stay_in_range():
    g = BlockConcat(2)
    spec = unilateral(g)
    ks = np.arange(0, 20000)
    L = g.log_prefix(ks)
    assert L.min() >= 0.0 and L.max() <= 1.0 + 1e-15
    # every block multiplies to one
    for m in (2, 3, 10):
        s = int(g.block_start(m))
        assert window_product(spec, s, m + 1) == pytest.approx(1.0, abs=1e-14)
    assert np.array_equal(g.log_prefix_range(0, 5000), g.log_prefix(np.arange(0, 5001)))


def test_block_concat_table_agrees():
    g = BlockConcat(3)
    t = g.table(6)
    a, b = unilateral(g), unilateral(t)
    for i in range(1, 30):
        for n in (1, 3, 7):
            if i + n - 1 <= t.end:
                assert window_product(a, i, n) == pytest.approx(window_product(b, i, n), rel=1e-12)


def test_step_function_unit_cells_is_table():
    s = unilateral(StepFunction((2.0, 0.5, 3.0), 1.0, 1.0, Frontier.HOLD))
    t = unilateral(Table((2.0, 0.5, 3.0), 1, Frontier.HOLD))
    for i in range(1, 6):
        assert window_product(s, i, 3) == pytest.approx(window_product(t, i, 3))


def test_piecewise_uses_both_sides():
    spec = bilateral(PiecewiseBilateral(Constant(0.5), Constant(2.0)))
    assert spec.value(0) == 0.5 and spec.value(1) == 2.0
    assert window_product(spec, -1, 4) == pytest.approx(0.25 * 4.0)


def test_window_cache_memoises():
    cache = WindowProductCache(unilateral(Constant(2.0)))
    assert cache.window_product(3, 4) == pytest.approx(16.0)
    cache.window_product(3, 4)
    assert len(cache) == 1


@pytest.mark.parametrize(
    "doc",
    [
        {"kind": "constant", "value": 2},
        {"kind": "geometric", "r": 0.5},
        {"kind": "ratio_power", "q": 2},
        {"kind": "periodic", "block": [2, 0.5]},
        {"kind": "table", "values": [1, 2], "origin": 1, "frontier": "zero"},
        {"kind": "step", "values": [1, 2], "origin": 0, "cell_width": 0.5, "frontier": "hold"},
        {"kind": "block_concat", "first_block": 2},
        {"kind": "piecewise", "neg": {"kind": "constant", "value": 0.5}, "pos": {"kind": "constant", "value": 2}},
    ],
)
def test_generator_json_round_trip(doc):
    g = generator_from_json(doc)
    assert generator_from_json(g.to_json()) == g


@pytest.mark.parametrize(
    "doc, pointer",
    [
        ({"domain": "N", "generator": {"kind": "constant"}}, "/generator"),
        ({"domain": "Q", "generator": {"kind": "constant", "value": 1}}, "/domain"),
        ({"domain": "N", "generator": {"kind": "nope"}}, "/generator/kind"),
        ({"domain": "N", "generator": {"kind": "constant", "value": 1, "extra": 0}}, "/generator"),
        ({"domain": "N", "generator": {"kind": "table", "values": [1, "x"]}}, "/generator/values/1"),
    ],
)
def test_spec_json_errors_carry_pointer(doc, pointer):
    with pytest.raises(ConfigError) as err:
        spec_from_json(doc)
    assert err.value.pointer.startswith(pointer)


weights_st = st.lists(st.floats(0.05, 5.0), min_size=4, max_size=24)


@given(weights_st, st.integers(1, 20), st.integers(1, 20))
def test_window_product_is_multiplicative(vals, i, n):
    spec = unilateral(Table(tuple(vals), 1, Frontier.HOLD))
    for k in range(1, n):
        whole = window_product(spec, i, n)
        split = window_product(spec, i, k) * window_product(spec, i + k, n - k)
        assert whole == pytest.approx(split, rel=1e-12)


@given(weights_st, st.integers(1, 12))
def test_sup_scan_dominates_every_window(vals, n):
    spec = unilateral(Table(tuple(vals), 1, Frontier.ZERO))
    sw = sup_window_product(spec, n, (1, len(vals)))
    for i in range(1, len(vals) + 1):
        assert window_product(spec, i, n) <= sw.value * (1 + 1e-12)
