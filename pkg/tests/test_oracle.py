import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import explicit, random_table, shift
from opchaos.errors import BoundaryContamination, WindowTooLarge
from opchaos.norms import iterate_norm
from opchaos.oracle import (
    brute_count,
    brute_density_counts,
    brute_norm,
    dense_truncation,
    norm_oracle_sweep,
    random_table_specs,
)
from opchaos.weights import Constant, RatioPower


def test_truncation_is_weighted_superdiagonal(const2):
    t = dense_truncation(const2, (1, 4))
    assert t.atoms == [1, 2, 3, 4]
    assert np.array_equal(t.matrix, np.diag([2.0, 2.0, 2.0], k=1))
    assert t.power(2)[0, 2] == 4.0


def test_truncation_of_permutation():
    s = explicit({1: 2, 2: 3, 3: 1})
    t = dense_truncation(s, (1, 3))
    assert np.array_equal(t.matrix, np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float))
    assert np.array_equal(t.power(3), np.eye(3))


def test_window_cap(const2):
    with pytest.raises(WindowTooLarge):
        dense_truncation(const2, (1, 100), cap=50)


@pytest.mark.parametrize("p, expected", [(1.0, 32.0), (2.0, 32.0), ("sup", 32.0)])
def test_brute_norm_constant_two(p, expected):
    s = shift(Constant(2.0), p)
    bn = brute_norm(dense_truncation(s, (1, 20)), 5, p)
    assert bn.value == pytest.approx(expected, rel=1e-12)
    if p == 2.0:
        assert bn.svd_value == pytest.approx(expected, rel=1e-12)


def test_brute_norm_identity_weights():
    s = shift(Constant(1.0), 2.0)
    assert brute_norm(dense_truncation(s, (1, 30)), 7, 2.0).value == pytest.approx(1.0)


def test_brute_norm_ratio_power():
    s = shift(RatioPower(1.0))
    bn = brute_norm(dense_truncation(s, (1, 40)), 4, 1.0)
    assert bn.value == pytest.approx(iterate_norm(s, 4).value, rel=1e-12)


def test_contamination_when_window_too_short():
    t = dense_truncation(shift(Constant(2.0), 1.0, "Z"), (0, 3))
    with pytest.raises(BoundaryContamination):
        brute_norm(t, 5, 1.0)


@pytest.mark.parametrize(
    "predicate, N, expected",
    [(lambda n: False, 10, 0), (lambda n: True, 10, 10), (lambda n: n % 2 == 0, 11, 5)],
)
def test_brute_count(predicate, N, expected):
    assert brute_count(predicate, N) == expected


def test_brute_density_counts():
    assert brute_density_counts(lambda n: n % 3 == 0, [10, 3, 30]) == {3: 1, 10: 3, 30: 10}


def test_random_specs_are_seeded():
    assert random_table_specs(3, 8, seed=5) == random_table_specs(3, 8, seed=5)
    assert random_table_specs(3, 8, seed=5) != random_table_specs(3, 8, seed=6)


def test_small_sweep():
    cases = norm_oracle_sweep(count=5, n_max=6, length=24)
    assert len(cases) == 5 * 3 * 6
    assert max(c.rel_delta for c in cases) <= 1e-9


@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(1, 5))
def test_matrix_powers_compose(seed, a, b):
    s = shift(random_table(np.random.default_rng(seed), 16))
    t = dense_truncation(s, (1, 17))
    assert np.allclose(t.power(a) @ t.power(b), t.power(a + b), rtol=1e-12, atol=0)
