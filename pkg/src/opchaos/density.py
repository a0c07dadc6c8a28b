"""Index sets of positive integers and their natural densities."""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError

_OPS = {">": operator.gt, ">=": operator.ge, "<": operator.lt, "<=": operator.le}


@dataclass(frozen=True)
class ExplicitBitset:
    """Membership of 1..horizon, bit k-1 for integer k."""

    bits: Tuple[bool, ...]

    @property
    def horizon(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class EventuallyPeriodic:
    preperiod: Tuple[bool, ...]
    period: Tuple[bool, ...]

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")


@dataclass(frozen=True)
class Predicate:
    """{n : series[n-1] op threshold} for n up to len(series)."""

    series: Tuple[float, ...]
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"op must be one of {sorted(_OPS)}")


Descriptor = object


@dataclass(frozen=True)
class IndexSet:
    descriptor: Descriptor

    # constructors
    @classmethod
    def periodic(cls, period: Sequence[bool], preperiod: Sequence[bool] = ()) -> "IndexSet":
        return cls(EventuallyPeriodic(tuple(bool(b) for b in preperiod), tuple(bool(b) for b in period)))

    @classmethod
    def naturals(cls) -> "IndexSet":
        return cls.periodic([True])

    @classmethod
    def evens(cls) -> "IndexSet":
        return cls.periodic([False, True])

    @classmethod
    def finite(cls, members: Iterable[int]) -> "IndexSet":
        ms = sorted(set(int(m) for m in members))
        if ms and ms[0] < 1:
            raise ValueError("index sets live in {1, 2, ...}")
        top = ms[-1] if ms else 0
        pre = [False] * top
        for m in ms:
            pre[m - 1] = True
        return cls.periodic([False], pre)

    @classmethod
    def from_function(cls, member: Callable[[int], bool], horizon: int) -> "IndexSet":
        return cls(ExplicitBitset(tuple(bool(member(n)) for n in range(1, horizon + 1))))

    @classmethod
    def from_mask(cls, mask: Sequence[bool]) -> "IndexSet":
        return cls(ExplicitBitset(tuple(bool(b) for b in mask)))

    @classmethod
    def threshold(cls, series: Sequence[float], op: str, threshold: float) -> "IndexSet":
        return cls(Predicate(tuple(float(x) for x in series), op, float(threshold)))

    # queries
    @property
    def horizon(self) -> Optional[int]:
        """Largest n with decidable membership (None: all n)."""
        d = self.descriptor
        if isinstance(d, EventuallyPeriodic):
            return None
        if isinstance(d, ExplicitBitset):
            return d.horizon
        return len(d.series)

    def contains(self, n: int) -> bool:
        if n < 1:
            return False
        d = self.descriptor
        if isinstance(d, EventuallyPeriodic):
            k = len(d.preperiod)
            if n <= k:
                return d.preperiod[n - 1]
            return d.period[(n - k - 1) % len(d.period)]
        h = self.horizon
        if n > h:
            raise ValueError(f"membership of {n} undecided beyond horizon {h}")
        if isinstance(d, ExplicitBitset):
            return d.bits[n - 1]
        return bool(_OPS[d.op](d.series[n - 1], d.threshold))

    def indicator(self, horizon: int) -> np.ndarray:
        """Boolean array whose entry n-1 says whether n belongs, n = 1..horizon."""
        d = self.descriptor
        if isinstance(d, EventuallyPeriodic):
            k = len(d.preperiod)
            out = np.empty(horizon, dtype=bool)
            head = min(k, horizon)
            out[:head] = d.preperiod[:head]
            if horizon > k:
                reps = -(-(horizon - k) // len(d.period))
                out[k:] = np.tile(np.asarray(d.period, dtype=bool), reps)[: horizon - k]
            return out
        h = self.horizon
        if horizon > h:
            raise ValueError(f"membership undecided beyond horizon {h}")
        if isinstance(d, ExplicitBitset):
            return np.asarray(d.bits[:horizon], dtype=bool)
        vals = np.asarray(d.series[:horizon])
        return _OPS[d.op](vals, d.threshold)

    def members(self, horizon: int) -> np.ndarray:
        return np.flatnonzero(self.indicator(horizon)) + 1

    def exact_density(self) -> Optional[Tuple[Fraction, Fraction]]:
        d = self.descriptor
        if not isinstance(d, EventuallyPeriodic):
            return None
        dens = Fraction(sum(d.period), len(d.period))
        return dens, dens

    def to_json(self) -> dict:
        d = self.descriptor
        if isinstance(d, EventuallyPeriodic):
            return {"kind": "periodic", "preperiod": [int(b) for b in d.preperiod],
                    "period": [int(b) for b in d.period]}
        if isinstance(d, ExplicitBitset):
            return {"kind": "members", "horizon": d.horizon,
                    "members": [int(n) for n in np.flatnonzero(d.bits) + 1]}
        return {"kind": "threshold", "series": list(d.series), "op": d.op, "threshold": d.threshold}


def index_set_from_json(doc, ptr: str = "") -> IndexSet:
    from .weights import _check_keys, _int, _need, _real

    if not isinstance(doc, dict):
        raise ConfigError(ptr, "expected an object")
    kind = _need(doc, "kind", ptr)
    if kind == "naturals":
        _check_keys(doc, {"kind"}, ptr)
        return IndexSet.naturals()
    if kind == "periodic":
        _check_keys(doc, {"kind", "preperiod", "period"}, ptr)
        per = _need(doc, "period", ptr)
        pre = doc.get("preperiod", [])
        for name, bits in (("period", per), ("preperiod", pre)):
            if not isinstance(bits, list) or any(b not in (0, 1, True, False) for b in bits):
                raise ConfigError(f"{ptr}/{name}", "expected a list of 0/1 bits")
        if not per:
            raise ConfigError(f"{ptr}/period", "period must be nonempty")
        return IndexSet.periodic(per, pre)
    if kind == "finite":
        _check_keys(doc, {"kind", "members"}, ptr)
        ms = _need(doc, "members", ptr)
        if not isinstance(ms, list):
            raise ConfigError(f"{ptr}/members", "expected a list of integers")
        vals = [_int(m, f"{ptr}/members/{k}") for k, m in enumerate(ms)]
        if any(v < 1 for v in vals):
            raise ConfigError(f"{ptr}/members", "members must be >= 1")
        return IndexSet.finite(vals)
    if kind == "members":
        _check_keys(doc, {"kind", "members", "horizon"}, ptr)
        h = _int(_need(doc, "horizon", ptr), f"{ptr}/horizon")
        ms = set(_int(m, f"{ptr}/members/{k}") for k, m in enumerate(_need(doc, "members", ptr)))
        if any(m < 1 or m > h for m in ms):
            raise ConfigError(f"{ptr}/members", "members must lie in [1, horizon]")
        return IndexSet.from_function(lambda n: n in ms, h)
    if kind == "blocks":
        # union of [base^k * lo, base^k * hi) over k >= 0, decided up to horizon
        _check_keys(doc, {"kind", "base", "lo", "hi", "horizon"}, ptr)
        base = _int(_need(doc, "base", ptr), f"{ptr}/base")
        lo = _int(doc.get("lo", 1), f"{ptr}/lo")
        hi = _int(doc.get("hi", 2), f"{ptr}/hi")
        h = _int(_need(doc, "horizon", ptr), f"{ptr}/horizon")
        if base < 2 or not (1 <= lo < hi):
            raise ConfigError(ptr, "blocks need base >= 2 and 1 <= lo < hi")
        return IndexSet.from_mask(block_mask(base, lo, hi, h))
    if kind == "threshold":
        _check_keys(doc, {"kind", "series", "op", "threshold"}, ptr)
        series = _need(doc, "series", ptr)
        if not isinstance(series, list):
            raise ConfigError(f"{ptr}/series", "expected a list of numbers")
        op = _need(doc, "op", ptr)
        if op not in _OPS:
            raise ConfigError(f"{ptr}/op", f"op must be one of {sorted(_OPS)}")
        return IndexSet.threshold([_real(x, f"{ptr}/series/{k}") for k, x in enumerate(series)], op,
                                  _real(_need(doc, "threshold", ptr), f"{ptr}/threshold"))
    raise ConfigError(f"{ptr}/kind", f"unknown index set kind {kind!r}")


def block_mask(base: int, lo: int, hi: int, horizon: int) -> np.ndarray:
    """Indicator of the union over k >= 0 of [lo * base^k, hi * base^k), n = 1..horizon."""
    mask = np.zeros(horizon, dtype=bool)
    scale = 1
    while lo * scale <= horizon:
        a, b = lo * scale, min(hi * scale, horizon + 1)
        mask[a - 1: b - 1] = True
        scale *= base
    return mask


@dataclass(frozen=True)
class DensityEstimate:
    horizon: int
    lower_stat: float
    upper_stat: float
    exact: Optional[Tuple[Fraction, Fraction]] = None

    def to_json(self) -> dict:
        out = {"horizon": self.horizon, "lower_stat": self.lower_stat, "upper_stat": self.upper_stat}
        if self.exact is not None:
            out["exact"] = [str(self.exact[0]), str(self.exact[1])]
        return out


def counting_function(D: IndexSet, horizon: int) -> np.ndarray:
    """card(D intersect [1, n]) for n = 1..horizon."""
    return np.cumsum(D.indicator(horizon), dtype=np.int64)


def density_estimate(D: IndexSet, horizon: int) -> DensityEstimate:
    """Tail-half extremes of card(D intersect [1, n]) / n."""
    if horizon < 1:
        raise ValueError("horizon must be positive")
    counts = counting_function(D, horizon)
    start = max(1, horizon // 2)
    n = np.arange(start, horizon + 1)
    ratios = counts[start - 1:] / n
    return DensityEstimate(horizon, float(ratios.min()), float(ratios.max()), D.exact_density())


def upper_density_stat(mask: np.ndarray) -> float:
    """Tail-half max of the running proportion of a boolean sequence."""
    h = len(mask)
    if h == 0:
        return 0.0
    counts = np.cumsum(mask, dtype=np.int64)
    start = max(1, h // 2)
    return float((counts[start - 1:] / np.arange(start, h + 1)).max())


def lower_density_stat(mask: np.ndarray) -> float:
    h = len(mask)
    if h == 0:
        return 0.0
    counts = np.cumsum(mask, dtype=np.int64)
    start = max(1, h // 2)
    return float((counts[start - 1:] / np.arange(start, h + 1)).min())


def positive_upper_density(E: IndexSet, horizon: int = 1 << 14) -> Tuple[bool, bool, float]:
    """(positive, exact, statistic) for the upper density of E."""
    ex = E.exact_density()
    if ex is not None:
        return ex[1] > 0, True, float(ex[1])
    h = horizon if E.horizon is None else min(horizon, E.horizon)
    est = density_estimate(E, h)
    return est.upper_stat > 0, False, est.upper_stat
