import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import explicit, shift
from opchaos.errors import ConfigError, IndexOutOfDomain, NonUnitGrid, SupNormMismatch, UndecidableTail
from opchaos.system import (
    AtomSet,
    ExplicitSystem,
    MassSpec,
    Tail,
    hopf_decompose,
    lp,
    mu_n_preimage,
    reduce_translation,
    sup_weight_on_preimage,
    system_from_json,
    system_to_json,
    validate_boundedness,
    verify_wandering,
)
from opchaos.weights import Constant, Frontier, Periodic, RatioPower, StepFunction, Table, bilateral, unilateral


def test_shift_structure(const2):
    assert const2.image(4) == 5
    assert const2.preimage(5) == [4]
    assert const2.preimage(1) == []
    assert const2.weight(3) == 2.0


def test_sup_shift_rejects_mu_n():
    s = shift(RatioPower(2.0), "sup")
    assert s.space.is_sup
    with pytest.raises(SupNormMismatch):
        mu_n_preimage(s, [3], 1)


def test_error_frontier_rejects_out_of_range():
    s = shift(Table((1.0, 2.0), 1, Frontier.ERROR), 2.0)
    with pytest.raises(IndexOutOfDomain):
        s.weight(5)


@pytest.mark.parametrize(
    "system, B, n, expected",
    [
        (shift(Constant(2.0)), [5], 3, 8.0),
        (shift(Constant(2.0)), [1], 1, 0.0),
        (shift(Constant(2.0)), [2], 4, 0.0),
        (shift(Table((1.0,), 0, Frontier.HOLD), 1.0, "Z"), [0], 5, 1.0),
        (shift(Periodic((2.0, 0.5)), 1.0, "Z"), [0], 2, 1.0),
    ],
)
def test_mu_n_preimage(system, B, n, expected):
    assert mu_n_preimage(system, B, n) == pytest.approx(expected, rel=1e-12)


def test_translation_measure():
    spec = unilateral(StepFunction((2.0,), 1.0, 1.0, Frontier.HOLD))
    one = reduce_translation(spec, lp(1.0), 1)
    assert mu_n_preimage(one, one.interval_atoms(5, 6), 3) == pytest.approx(8.0)
    two = reduce_translation(spec, lp(1.0), 2)
    atoms = two.interval_atoms(5, 6)
    assert len(atoms) == 2
    assert all(two.mass(x) == pytest.approx(0.5) for x in atoms)
    assert mu_n_preimage(two, atoms, 3) == pytest.approx(8.0)


def test_translation_constant_one_preserves_measure():
    spec = unilateral(StepFunction((1.0,), 1.0, 1.0, Frontier.HOLD))
    s = reduce_translation(spec, lp(1.0), 2)
    B = s.interval_atoms(6, 9)
    assert mu_n_preimage(s, B, 2) == pytest.approx(3.0)
    assert mu_n_preimage(s, B, 6) == pytest.approx(2.0)  # only [1, 3) has a preimage


def test_translation_off_grid_rejected():
    spec = bilateral(StepFunction((2.0, 0.5), 0.0, 0.3, Frontier.HOLD))
    with pytest.raises(NonUnitGrid):
        reduce_translation(spec, lp(1.0), 1)


def test_sup_weight_on_preimage():
    s = shift(Constant(2.0), "sup")
    assert sup_weight_on_preimage(s, [5], 3) == pytest.approx(8.0, rel=1e-14)
    assert sup_weight_on_preimage(s, [2], 3) == 0.0


@pytest.mark.parametrize(
    "system, c_min",
    [(shift(Constant(2.0)), 2.0), (shift(Constant(1.0), 3.0), 1.0), (shift(RatioPower(2.0), 2.0), 2.0)],
)
def test_boundedness(system, c_min):
    rep = validate_boundedness(system, 100)
    assert rep.c_min == pytest.approx(c_min, rel=1e-12)
    assert rep.violations == []
    assert rep.checked_pairs > 0


def test_boundedness_non_injective_fiber():
    # 1, 2 and 3 all land on 3, so the whole fiber decides c
    s = explicit({1: 3, 2: 3, 3: 3}, weights={1: 2.0, 2: 3.0, 3: 1.0})
    assert validate_boundedness(s, 10).c_min == pytest.approx(2.0 + 3.0 + 1.0)
    s2 = explicit({1: 3, 2: 3, 3: 3}, weights={1: 2.0, 2: 3.0, 3: 1.0}, p=2.0)
    assert validate_boundedness(s2, 10).c_min == pytest.approx(4.0 + 9.0 + 1.0)


def test_hopf_permutation_is_conservative():
    s = explicit({1: 2, 2: 3, 3: 4, 4: 5, 5: 1})
    part = hopf_decompose(s)
    assert part.conservative.members == frozenset(range(1, 6))
    assert part.dissipative.is_empty()
    assert part.wandering_generator is None
    assert set(part.periods.values()) == {5}


def test_hopf_bilateral_shift():
    part = hopf_decompose(shift(Constant(2.0), 1.0, "Z"), 1000)
    assert part.dissipative.everything
    assert part.wandering_generator.members == frozenset({0})


def test_hopf_mixed_example():
    s = explicit({1: 2, 2: 3, 3: 1, 4: 5, 5: 6, 6: 1})
    part = hopf_decompose(s, 1000)
    assert part.conservative.members == frozenset({1, 2, 3})
    assert part.dissipative.members == frozenset({4, 5, 6})
    assert part.wandering_generator.members == frozenset({4})
    assert verify_wandering(s, [4], part.dissipative, 1000, backward=False)
    assert not verify_wandering(s, [1], AtomSet(frozenset({1, 2, 3})), 10, backward=False)


def test_explicit_with_tail():
    tail = Tail(10, unilateral(Constant(2.0)), MassSpec())
    s = ExplicitSystem((1, 2), {1: 2, 2: 10}, {1: 3.0}, lp(1.0), {}, tail)
    assert s.image(2) == 10 and s.image(12) == 13
    assert s.preimage(10) == [2]
    assert s.log_weight_product(1, 4) == pytest.approx(math.log(3.0 * 1.0 * 2.0 * 2.0))
    part = hopf_decompose(s)
    assert 1 in part.wandering_generator.members


def test_explicit_undescribed_target():
    with pytest.raises(UndecidableTail):
        ExplicitSystem((1,), {1: 7}, {}, lp(1.0))


@pytest.mark.parametrize(
    "doc",
    [
        {"kind": "shift", "weights": {"domain": "N", "generator": {"kind": "constant", "value": 2}},
         "space": {"kind": "lp", "p": 2}, "masses": {"scale": 1, "ratio": 0.5}},
        {"kind": "shift", "weights": {"domain": "Z", "generator": {"kind": "periodic", "block": [2, 0.5]}},
         "space": {"kind": "sup"}},
        {"kind": "explicit", "atoms": [1, 2, 3], "map": {"1": 2, "2": 3, "3": 1},
         "weights": {"1": 2, "2": 1, "3": 1}, "masses": {"1": 1, "2": 1, "3": 1}, "space": {"kind": "lp", "p": 1}},
    ],
)
def test_system_json_round_trip(doc):
    s = system_from_json(doc)
    again = system_from_json(system_to_json(s))
    for x in (1, 2, 3):
        assert again.image(x) == s.image(x)
        assert again.weight(x) == s.weight(x)
        assert again.mass(x) == s.mass(x)


@pytest.mark.parametrize(
    "doc, pointer",
    [
        ({"kind": "shift"}, "/weights"),
        ({"kind": "warp"}, "/kind"),
        ({"kind": "shift", "weights": {"generator": {"kind": "constant", "value": 1}}, "space": {"kind": "lp", "p": 0.5}},
         "/space/p"),
        ({"kind": "explicit", "atoms": [1], "map": {"x": 1}}, "/map/x"),
    ],
)
def test_system_json_errors(doc, pointer):
    with pytest.raises(ConfigError) as err:
        system_from_json(doc)
    assert err.value.pointer == pointer


@given(st.lists(st.floats(0.1, 4.0), min_size=6, max_size=20), st.integers(1, 6),
       st.sets(st.integers(8, 30), min_size=1, max_size=5), st.sets(st.integers(31, 50), min_size=1, max_size=5))
def test_mu_n_is_additive_over_disjoint_sets(vals, n, A, B):
    s = shift(Table(tuple(vals), 1, Frontier.HOLD), 2.0)
    assert mu_n_preimage(s, A | B, n) == pytest.approx(mu_n_preimage(s, A, n) + mu_n_preimage(s, B, n), rel=1e-12)


@given(st.integers(1, 8), st.integers(1, 8))
def test_mu_n_composes(n, m):
    s = shift(Constant(1.5), 1.0, masses=MassSpec(1.0, 0.5))
    B = [40]
    # mu_{n+m}(f^{-(n+m)}B) agrees with a direct product of weights and masses
    lhs = mu_n_preimage(s, B, n + m)
    x = 40 - n - m
    assert lhs == pytest.approx(s.mass(x) * 1.5 ** (n + m), rel=1e-12)
