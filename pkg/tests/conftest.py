import numpy as np
import pytest
from hypothesis import settings

from opchaos.system import SUP, ExplicitSystem, build_shift_system, lp
from opchaos.weights import Constant, Frontier, PiecewiseBilateral, RatioPower, Table, bilateral, unilateral

settings.register_profile("opchaos", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("opchaos")


def shift(gen, p=1.0, domain="N", masses=None):
    spec = unilateral(gen) if domain == "N" else bilateral(gen)
    space = SUP if p == "sup" else lp(float(p))
    return build_shift_system(spec, space, masses)


def piecewise(neg, pos, p=1.0):
    return shift(PiecewiseBilateral(Constant(neg), Constant(pos)), p, "Z")


def explicit(fmap, weights=None, masses=None, p=1.0):
    atoms = tuple(sorted(fmap))
    return ExplicitSystem(atoms, dict(fmap), dict(weights or {}), lp(p), dict(masses or {}), None)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def const2():
    return shift(Constant(2.0))


@pytest.fixture
def ratio1():
    return shift(RatioPower(1.0))


def random_table(rng, length=32, lo=0.1, hi=3.0):
    return Table(tuple(rng.uniform(lo, hi, size=length).tolist()), 1, Frontier.ZERO)
