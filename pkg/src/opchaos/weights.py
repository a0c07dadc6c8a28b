"""Weight sequences and their window products.

A ``WeightSpec`` couples a generator (an analytic family, a finite table or a
step function) with an index domain.  Every product of consecutive weights is
computed as a sum of log-magnitudes and only exponentiated on the way out, so
long windows of weights like 2 or 1/2 neither overflow nor underflow.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ConfigError,
    DomainMismatch,
    ExactUnavailable,
    IndexOutOfDomain,
    NonFiniteWeight,
    NonUnitGrid,
)
from .numerics import exp_log, exp_logs

SCAN_CHUNK = 1 << 18


class Domain(str, Enum):
    UNILATERAL = "N"
    BILATERAL = "Z"


class Frontier(str, Enum):
    ZERO = "zero"
    HOLD = "hold"
    ERROR = "error"


class Growth(str, Enum):
    BOUNDED = "bounded"
    DIVERGENT = "divergent"


class BackwardLimits(NamedTuple):
    """Exact asymptotics of the backward products |w_{i-n} ... w_{i-1}|."""

    liminf: float
    limsup: float
    cesaro: float  # limit of the Cesaro means of the products


def _as_int_array(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.int64))


def _log_abs(values: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Return log|v| with zeros replaced by 0, plus a zero indicator."""
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteWeight("weights must be finite")
    zero = arr == 0.0
    logs = np.zeros_like(arr)
    logs[~zero] = np.log(np.abs(arr[~zero]))
    return logs, zero.astype(np.int64)


def _prefix(a: np.ndarray) -> np.ndarray:
    out = np.zeros(len(a) + 1, dtype=a.dtype)
    np.cumsum(a, out=out[1:])
    return out


def _zero_aware(total: np.ndarray, zeros: np.ndarray) -> np.ndarray:
    return np.where(zeros > 0, -np.inf, total)


# --------------------------------------------------------------------------
# generators


class Generator:
    """Base class.  Subclasses implement ``log_windows``."""

    kind = "abstract"
    unilateral_only = False

    def log_windows(self, starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, i: int) -> float:
        raise NotImplementedError

    def sup_exact(self, n: int, domain: Domain) -> Tuple[float, int]:
        raise ExactUnavailable(f"no closed-form window supremum for {self.kind}")

    def growth(self, domain: Domain) -> Optional[Growth]:
        return None

    def backward_limits(self, i: int) -> Optional[BackwardLimits]:
        return None

    def has_zero(self) -> Optional[bool]:
        return None

    def to_json(self) -> dict:
        raise NotImplementedError


def _limits_from_rate(log_rate: float) -> Optional[BackwardLimits]:
    if log_rate < 0:
        return BackwardLimits(0.0, 0.0, 0.0)
    if log_rate > 0:
        return BackwardLimits(math.inf, math.inf, math.inf)
    return None


@dataclass(frozen=True)
class Constant(Generator):
    value_: float
    kind = "constant"

    def __post_init__(self):
        if not math.isfinite(self.value_):
            raise NonFiniteWeight("constant weight must be finite")

    def log_windows(self, starts, lengths):
        lengths = np.asarray(lengths)
        if self.value_ == 0.0:
            return np.where(lengths > 0, -np.inf, 0.0)
        return lengths * math.log(abs(self.value_))

    def value(self, i):
        return self.value_

    def sup_exact(self, n, domain):
        return float(self.log_windows(None, np.array([n]))[0]), _origin(domain)

    def growth(self, domain):
        return Growth.BOUNDED if abs(self.value_) <= 1.0 else Growth.DIVERGENT

    def backward_limits(self, i):
        a = abs(self.value_)
        if a == 1.0:
            return BackwardLimits(1.0, 1.0, 1.0)
        return _limits_from_rate(-1.0 if a < 1.0 else 1.0)

    def has_zero(self):
        return self.value_ == 0.0

    def to_json(self):
        return {"kind": self.kind, "value": self.value_}


@dataclass(frozen=True)
class Geometric(Constant):
    """Alias of ``Constant`` kept under its own name for round-tripping."""

    kind = "geometric"

    def __post_init__(self):
        super().__post_init__()
        if self.value_ <= 0:
            raise ValueError("geometric ratio must be positive")

    def to_json(self):
        return {"kind": self.kind, "r": self.value_}


@dataclass(frozen=True)
class RatioPower(Generator):
    """w_n = ((n+1)/n)^(1/q) for n >= 1."""

    q: float
    kind = "ratio_power"
    unilateral_only = True

    def __post_init__(self):
        if not (self.q > 0 and math.isfinite(self.q)):
            raise ValueError("ratio_power needs q > 0")

    def log_windows(self, starts, lengths):
        starts = np.asarray(starts, dtype=float)
        lengths = np.asarray(lengths, dtype=float)
        if np.any((starts < 1) & (lengths > 0)):
            raise IndexOutOfDomain("ratio_power weights start at index 1")
        safe = np.where(starts < 1, 1.0, starts)
        # telescoped: prod_{k=i}^{i+n-1} (k+1)/k = (i+n)/i
        return np.log1p(lengths / safe) / self.q

    def value(self, i):
        if i < 1:
            raise IndexOutOfDomain("ratio_power weights start at index 1")
        return ((i + 1) / i) ** (1.0 / self.q)

    def sup_exact(self, n, domain):
        # (i+n)/i decreases in i, so the first window wins
        return math.log1p(n) / self.q, 1

    def growth(self, domain):
        return Growth.DIVERGENT

    def has_zero(self):
        return False

    def to_json(self):
        return {"kind": self.kind, "q": self.q}


@dataclass(frozen=True)
class Periodic(Generator):
    """w_i = block[(i - 1) mod L] on the whole integer line."""

    block: Tuple[float, ...]
    kind = "periodic"
    _logs: np.ndarray = field(init=False, repr=False, compare=False)
    _zeros: np.ndarray = field(init=False, repr=False, compare=False)
    _P: np.ndarray = field(init=False, repr=False, compare=False)
    _Z: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.block) == 0:
            raise ValueError("periodic block must be nonempty")
        object.__setattr__(self, "block", tuple(float(b) for b in self.block))
        logs, zeros = _log_abs(self.block)
        object.__setattr__(self, "_logs", logs)
        object.__setattr__(self, "_zeros", zeros)
        object.__setattr__(self, "_P", _prefix(np.concatenate([logs, logs])))
        object.__setattr__(self, "_Z", _prefix(np.concatenate([zeros, zeros])))

    @property
    def period(self) -> int:
        return len(self.block)

    @property
    def log_period_product(self) -> float:
        if self._zeros.any():
            return -math.inf
        return float(self._logs.sum())

    def log_windows(self, starts, lengths):
        L = self.period
        starts = np.asarray(starts, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.int64)
        s = np.mod(starts - 1, L)
        full, rem = np.divmod(lengths, L)
        total = full * self._logs.sum() + (self._P[s + rem] - self._P[s])
        zc = full * self._zeros.sum() + (self._Z[s + rem] - self._Z[s])
        return _zero_aware(total, zc)

    def value(self, i):
        return self.block[(i - 1) % self.period]

    def _phase_windows(self, n: int, first: int) -> Tuple[np.ndarray, np.ndarray]:
        starts = np.arange(first, first + self.period, dtype=np.int64)
        return starts, self.log_windows(starts, np.full(self.period, n))

    def sup_exact(self, n, domain):
        starts, logs = self._phase_windows(n, 1)
        k = int(np.argmax(logs))
        return float(logs[k]), int(starts[k])

    def growth(self, domain):
        return Growth.BOUNDED if self.log_period_product <= 0 else Growth.DIVERGENT

    def backward_limits(self, i):
        rate = self.log_period_product
        if rate != 0:
            return _limits_from_rate(rate)
        L = self.period
        lengths = np.arange(1, L + 1)
        prods = exp_logs(self.log_windows(i - lengths, lengths))
        return BackwardLimits(float(prods.min()), float(prods.max()), float(np.mean(prods)))

    def has_zero(self):
        return bool(self._zeros.any())

    def to_json(self):
        return {"kind": self.kind, "block": list(self.block)}


@dataclass(frozen=True)
class Table(Generator):
    """Finite list of weights starting at ``origin``; ``frontier`` covers the rest."""

    values: Tuple[float, ...]
    origin: int = 1
    frontier: Frontier = Frontier.ERROR
    kind = "table"
    _logs: np.ndarray = field(init=False, repr=False, compare=False)
    _P: np.ndarray = field(init=False, repr=False, compare=False)
    _Z: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("table must hold at least one value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "frontier", Frontier(self.frontier))
        logs, zeros = _log_abs(self.values)
        object.__setattr__(self, "_logs", logs)
        object.__setattr__(self, "_P", _prefix(logs))
        object.__setattr__(self, "_Z", _prefix(zeros))

    @property
    def end(self) -> int:
        """Last index covered by the stored values."""
        return self.origin + len(self.values) - 1

    def log_windows(self, starts, lengths):
        o, m = self.origin, len(self.values)
        s = np.asarray(starts, dtype=np.int64)
        n = np.asarray(lengths, dtype=np.int64)
        e1 = s + n  # exclusive end
        lo = np.clip(s, o, o + m)
        hi = np.clip(e1, o, o + m)
        hi = np.maximum(hi, lo)
        inner = self._P[hi - o] - self._P[lo - o]
        zc = self._Z[hi - o] - self._Z[lo - o]
        left = np.clip(np.minimum(e1, o) - s, 0, None)
        right = np.clip(e1 - np.maximum(s, o + m), 0, None)
        outside = (left > 0) | (right > 0)
        if self.frontier is Frontier.ERROR:
            if np.any(outside):
                raise IndexOutOfDomain(
                    f"window leaves table range [{o}, {self.end}] (frontier=error)")
            return _zero_aware(inner, zc)
        if self.frontier is Frontier.ZERO:
            return np.where(outside | (zc > 0), -np.inf, inner)
        first, last = self._logs[0], self._logs[-1]
        zc = zc + np.where(self.values[0] == 0.0, left, 0) + np.where(self.values[-1] == 0.0, right, 0)
        total = inner + left * first + right * last
        return _zero_aware(total, zc)

    def value(self, i):
        if self.origin <= i <= self.end:
            return self.values[i - self.origin]
        if self.frontier is Frontier.ERROR:
            raise IndexOutOfDomain(f"index {i} outside table range")
        if self.frontier is Frontier.ZERO:
            return 0.0
        return self.values[0] if i < self.origin else self.values[-1]

    def growth(self, domain):
        if self.frontier is Frontier.ERROR:
            return None
        if self.frontier is Frontier.ZERO:
            return Growth.BOUNDED
        holds = [abs(self.values[-1])]
        if domain is Domain.BILATERAL:
            holds.append(abs(self.values[0]))
        return Growth.BOUNDED if max(holds) <= 1.0 else Growth.DIVERGENT

    def backward_limits(self, i):
        if self.frontier is Frontier.ERROR:
            return None
        if self.frontier is Frontier.ZERO:
            return BackwardLimits(0.0, 0.0, 0.0)
        h = abs(self.values[0])
        if h != 1.0:
            return _limits_from_rate(-1.0 if h < 1.0 else 1.0)
        # once the window covers [origin, i-1] only factors 1 are added
        if i - 1 >= self.origin:
            c = exp_log(float(self.log_windows(np.array([self.origin]),
                                               np.array([i - self.origin]))[0]))
        else:
            c = 1.0
        return BackwardLimits(c, c, c)

    def has_zero(self):
        if self.frontier is Frontier.ZERO:
            return True
        return any(v == 0.0 for v in self.values)

    def to_json(self):
        return {"kind": self.kind, "values": list(self.values), "origin": self.origin,
                "frontier": self.frontier.value}


@dataclass(frozen=True)
class StepFunction(Generator):
    """Weights constant on cells of width ``cell_width`` starting at ``origin``.

    With unit cells and an integer origin this is a table.  Finer grids are
    only meaningful for translation operators and are handled by
    ``system.reduce_translation``.
    """

    values: Tuple[float, ...]
    origin: float = 1.0
    cell_width: float = 1.0
    frontier: Frontier = Frontier.ERROR
    kind = "step"

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("step function must hold at least one value")
        if not (self.cell_width > 0 and math.isfinite(self.cell_width)):
            raise ValueError("cell width must be positive")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "frontier", Frontier(self.frontier))
        _log_abs(self.values)

    def refinement(self) -> int:
        """Number m with cell_width = 1/m; raises NonUnitGrid otherwise."""
        m = round(1.0 / self.cell_width)
        if m < 1 or abs(m * self.cell_width - 1.0) > 1e-12:
            raise NonUnitGrid(f"cell width {self.cell_width} is not 1/m for an integer m")
        shift = self.origin * m
        if abs(shift - round(shift)) > 1e-9:
            raise NonUnitGrid(f"origin {self.origin} is not on the 1/{m} grid")
        return m

    def as_table(self) -> Table:
        if self.refinement() != 1 or self.origin != int(self.origin):
            raise NonUnitGrid("only unit cells with integer origin behave as a table")
        return Table(self.values, int(self.origin), self.frontier)

    def log_windows(self, starts, lengths):
        return self.as_table().log_windows(starts, lengths)

    def value(self, i):
        return self.as_table().value(i)

    def growth(self, domain):
        return self.as_table().growth(domain)

    def backward_limits(self, i):
        return self.as_table().backward_limits(i)

    def has_zero(self):
        return self.as_table().has_zero()

    def to_json(self):
        return {"kind": self.kind, "values": list(self.values), "origin": self.origin,
                "cell_width": self.cell_width, "frontier": self.frontier.value}


@dataclass(frozen=True)
class BlockConcat(Generator):
    """Concatenated blocks z(m) = (e^(1/m) repeated m times, then e^(-1)), m >= first_block.

    Every block has product 1, so the log prefix sums stay in [0, 1] and have a
    closed form; this lets scans run over tens of millions of indices without
    materialising a table.
    """

    first_block: int = 2
    kind = "block_concat"
    unilateral_only = True

    def __post_init__(self):
        if self.first_block < 1:
            raise ValueError("first_block must be >= 1")

    def block_start(self, m):
        f = self.first_block
        m = np.asarray(m, dtype=np.int64)
        return 1 + m * (m + 1) // 2 - f * (f + 1) // 2

    def locate(self, i: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Block number and offset of each index (offset m marks the e^(-1) slot)."""
        i = np.asarray(i, dtype=np.int64)
        f = self.first_block
        K = i - 1 + f * (f + 1) // 2
        m = np.floor((np.sqrt(8.0 * K + 1.0) - 1.0) / 2.0).astype(np.int64)
        m = np.where((m + 1) * (m + 2) // 2 <= K, m + 1, m)
        m = np.where(m * (m + 1) // 2 > K, m - 1, m)
        return m, i - self.block_start(m)

    def log_prefix(self, i: np.ndarray) -> np.ndarray:
        """sum_{k=1}^{i} log w_k, with the empty sum at i = 0."""
        i = np.asarray(i, dtype=np.int64)
        safe = np.maximum(i, 1)
        m, t = self.locate(safe)
        val = np.where(t < m, (t + 1) / m, 0.0)
        return np.where(i <= 0, 0.0, val)

    def log_prefix_range(self, lo: int, hi: int) -> np.ndarray:
        """log_prefix(i) for the contiguous range lo <= i <= hi, built block by block."""
        if lo > hi:
            return np.zeros(0)
        head = np.zeros(1) if lo <= 0 else np.zeros(0)
        lo = max(lo, 1)
        (m0, m1), _ = self.locate(np.array([lo, hi]))
        ms = np.arange(m0, m1 + 1, dtype=np.int64)
        starts = self.block_start(ms)
        sizes = ms + 1
        t = np.arange(int(sizes.sum()), dtype=np.int64) - np.repeat(starts - starts[0], sizes)
        m = np.repeat(ms, sizes)
        val = np.where(t < m, (t + 1) / m, 0.0)
        off = lo - int(starts[0])
        return np.concatenate([head, val[off:off + hi - lo + 1]])

    def log_windows(self, starts, lengths):
        s = np.asarray(starts, dtype=np.int64)
        n = np.asarray(lengths, dtype=np.int64)
        if np.any((s < 1) & (n > 0)):
            raise IndexOutOfDomain("block weights start at index 1")
        return np.where(n > 0, self.log_prefix(s + n - 1) - self.log_prefix(s - 1), 0.0)

    def value(self, i):
        if i < 1:
            raise IndexOutOfDomain("block weights start at index 1")
        m, t = self.locate(np.array([i]))
        return math.exp(1.0 / m[0]) if t[0] < m[0] else math.exp(-1.0)

    def sup_exact(self, n, domain):
        f = self.first_block
        if n < f:
            # a run of n copies of e^(1/f) at the start of the first block
            return n / f, 1
        # the log prefix lives in [0, 1]; log-gain 1 needs a start right after a
        # block end and a stop at the end of a run
        ms = np.arange(f, n + 1, dtype=np.int64)
        starts = self.block_start(ms)
        ends = starts + n - 1
        m_end, t_end = self.locate(ends)
        hit = t_end == m_end - 1
        k = int(np.argmax(hit))
        return 1.0, int(starts[k])

    def growth(self, domain):
        return Growth.BOUNDED

    def has_zero(self):
        return False

    def table(self, n_blocks: int) -> Table:
        """The first ``n_blocks`` blocks as an explicit table."""
        vals = []
        for m in range(self.first_block, self.first_block + n_blocks):
            vals.extend([math.exp(1.0 / m)] * m)
            vals.append(math.exp(-1.0))
        return Table(tuple(vals), 1, Frontier.ERROR)

    def extent(self, n_blocks: int) -> int:
        """Index of the last slot of block first_block + n_blocks - 1."""
        return int(self.block_start(self.first_block + n_blocks)) - 1

    def to_json(self):
        return {"kind": self.kind, "first_block": self.first_block}


@dataclass(frozen=True)
class PiecewiseBilateral(Generator):
    """``neg`` supplies w_i for i <= 0 and ``pos`` for i >= 1."""

    neg: Generator
    pos: Generator
    kind = "piecewise"

    def __post_init__(self):
        if self.neg.unilateral_only:
            raise DomainMismatch(f"{self.neg.kind} cannot describe indices <= 0")
        if isinstance(self.neg, PiecewiseBilateral) or isinstance(self.pos, PiecewiseBilateral):
            raise ValueError("piecewise generators do not nest")

    def log_windows(self, starts, lengths):
        s = np.asarray(starts, dtype=np.int64)
        n = np.asarray(lengths, dtype=np.int64)
        e = s + n - 1
        nl = np.clip(np.minimum(e, 0) - s + 1, 0, n)
        pl = n - nl
        out = np.zeros(s.shape)
        a = nl > 0
        if np.any(a):
            out[a] += self.neg.log_windows(s[a], nl[a])
        b = pl > 0
        if np.any(b):
            out[b] += self.pos.log_windows(np.maximum(s[b], 1), pl[b])
        return out

    def value(self, i):
        return self.neg.value(i) if i <= 0 else self.pos.value(i)

    def _side_candidates(self, gen: Generator, n: int, negative: bool):
        """Representative starts covering every window inside one side."""
        if isinstance(gen, Constant):
            first = 1 - n if negative else 1
            return [first]
        if isinstance(gen, Periodic):
            if negative:
                return list(range(2 - n - gen.period, 2 - n))
            return list(range(1, 1 + gen.period))
        if isinstance(gen, RatioPower) and not negative:
            return [1]
        if isinstance(gen, BlockConcat) and not negative:
            return [gen.sup_exact(n, Domain.UNILATERAL)[1]]
        raise ExactUnavailable(f"no closed-form window supremum for {gen.kind} side")

    def sup_exact(self, n, domain):
        cands = set(self._side_candidates(self.neg, n, True))
        cands |= set(self._side_candidates(self.pos, n, False))
        cands |= set(range(2 - n, 1))  # windows straddling 0|1
        starts = np.array(sorted(cands), dtype=np.int64)
        logs = self.log_windows(starts, np.full(len(starts), n))
        k = int(np.argmax(logs))
        return float(logs[k]), int(starts[k])

    def growth(self, domain):
        gs = [self.neg.growth(Domain.BILATERAL), self.pos.growth(Domain.UNILATERAL)]
        if Growth.DIVERGENT in gs:
            return Growth.DIVERGENT
        if all(g is Growth.BOUNDED for g in gs):
            # straddling windows are products of one bounded factor per side
            return Growth.BOUNDED
        return None

    def backward_limits(self, i):
        base = self.neg.backward_limits(min(i, 1))
        if base is None or i <= 1:
            return base
        # the first i-1 factors come from the positive side and are fixed
        c = exp_log(float(self.pos.log_windows(np.array([1]), np.array([i - 1]))[0]))
        if c == 0.0:
            return BackwardLimits(0.0, 0.0, 0.0)
        return BackwardLimits(c * base.liminf, c * base.limsup, c * base.cesaro)

    def has_zero(self):
        a, b = self.neg.has_zero(), self.pos.has_zero()
        if a or b:
            return True
        if a is None or b is None:
            return None
        return False

    def to_json(self):
        return {"kind": self.kind, "neg": self.neg.to_json(), "pos": self.pos.to_json()}


def _origin(domain: Domain) -> int:
    return 1 if domain is Domain.UNILATERAL else 0


# --------------------------------------------------------------------------
# weight specs


@dataclass(frozen=True)
class WeightSpec:
    domain: Domain
    generator: Generator
    magnitude_only: bool = True

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        g = self.generator
        if g.unilateral_only and self.domain is Domain.BILATERAL:
            raise DomainMismatch(f"{g.kind} weights are defined on indices >= 1 only")
        if isinstance(g, PiecewiseBilateral) and self.domain is Domain.UNILATERAL:
            raise DomainMismatch("piecewise weights need the bilateral domain")
        if isinstance(g, (Table,)) and self.domain is Domain.UNILATERAL and g.origin < 1:
            raise IndexOutOfDomain("unilateral tables must start at index >= 1")

    @property
    def unilateral(self) -> bool:
        return self.domain is Domain.UNILATERAL

    def log_windows(self, starts, lengths) -> np.ndarray:
        """Vectorised log|w_i ... w_{i+n-1}| for arrays of starts and lengths."""
        s = _as_int_array(starts)
        n = _as_int_array(lengths)
        s, n = np.broadcast_arrays(s, n)
        if np.any(n < 0):
            raise ValueError("window lengths must be nonnegative")
        if self.unilateral and np.any((s < 1) & (n > 0)):
            raise IndexOutOfDomain("unilateral weights start at index 1")
        return np.asarray(self.generator.log_windows(s, n), dtype=float)

    def log_window(self, i: int, n: int) -> float:
        return float(self.log_windows(np.array([i]), np.array([n]))[0])

    def value(self, i: int) -> float:
        if self.unilateral and i < 1:
            raise IndexOutOfDomain("unilateral weights start at index 1")
        v = self.generator.value(i)
        return abs(v) if self.magnitude_only else v

    def valid_starts(self, n: int, lo: int, hi: int) -> Tuple[int, int]:
        """Clip [lo, hi] to starts whose length-n window is defined."""
        if self.unilateral:
            lo = max(lo, 1)
        g = self.generator
        if isinstance(g, StepFunction):
            g = g.as_table()
        if isinstance(g, Table) and g.frontier is Frontier.ERROR:
            lo = max(lo, g.origin)
            hi = min(hi, g.end - n + 1)
        return lo, hi

    def default_extent(self, n: int) -> Tuple[int, int]:
        """Start range that contains every distinct window shape of length n."""
        g = self.generator
        if isinstance(g, StepFunction):
            g = g.as_table()
        if isinstance(g, Table):
            if g.frontier is Frontier.HOLD:
                lo, hi = g.origin - n, g.end + 1
            else:
                lo, hi = g.origin, g.end
            if self.unilateral:
                lo = max(lo, 1)
            return lo, hi
        if isinstance(g, BlockConcat):
            return 1, g.extent(max(n, g.first_block) - g.first_block + 2)
        if self.unilateral:
            return 1, 100_000
        return -50_000, 50_000

    def to_json(self) -> dict:
        return {"domain": self.domain.value, "generator": self.generator.to_json(),
                "magnitude_only": self.magnitude_only}


class SupWindow(NamedTuple):
    value: float
    witness: Optional[int]
    exact: bool


class BackwardLiminf(NamedTuple):
    running_min_tail: float
    exact_limit: Optional[float]
    horizon: int


EXACT = "exact"
ScanRange = Union[str, Tuple[int, int]]


def window_product(spec: WeightSpec, i: int, n: int) -> float:
    """|w_i ... w_{i+n-1}|."""
    if n < 1:
        raise ValueError("n must be positive")
    return exp_log(spec.log_window(i, n))


def backward_window_product(spec: WeightSpec, i: int, n: int) -> float:
    """|w_{i-n} ... w_{i-1}|, or 0 when atom i has no n-fold preimage."""
    if n < 1:
        raise ValueError("n must be positive")
    if spec.unilateral and n >= i:
        return 0.0
    return exp_log(spec.log_window(i - n, n))


def scan_log_windows(spec: WeightSpec, n: int, lo: int, hi: int) -> Tuple[float, Optional[int]]:
    """Largest log window product over starts in [lo, hi]; smallest index on ties."""
    lo, hi = spec.valid_starts(n, lo, hi)
    best, arg = -math.inf, None
    for a in range(lo, hi + 1, SCAN_CHUNK):
        b = min(hi, a + SCAN_CHUNK - 1)
        starts = np.arange(a, b + 1, dtype=np.int64)
        logs = spec.log_windows(starts, np.full(len(starts), n))
        k = int(np.argmax(logs))
        if arg is None or logs[k] > best:
            best, arg = float(logs[k]), int(starts[k])
    return best, arg


def sup_log_window(spec: WeightSpec, n: int, scan: ScanRange = EXACT) -> Tuple[float, Optional[int], bool]:
    if n < 1:
        raise ValueError("n must be positive")
    if scan == EXACT:
        val, wit = spec.generator.sup_exact(n, spec.domain)
        return val, wit, True
    lo, hi = scan
    if lo > hi:
        raise ValueError("scan range is empty")
    val, wit = scan_log_windows(spec, n, lo, hi)
    return val, wit, False


def sup_window_product(spec: WeightSpec, n: int, scan: ScanRange = EXACT) -> SupWindow:
    """sup_i |w_i ... w_{i+n-1}|, closed form when ``scan`` is EXACT."""
    val, wit, exact = sup_log_window(spec, n, scan)
    return SupWindow(exp_log(val), wit, exact)


def backward_limits(spec: WeightSpec, i: int = 0) -> Optional[BackwardLimits]:
    if spec.unilateral:
        raise DomainMismatch("backward products along the negative ray need the bilateral domain")
    return spec.generator.backward_limits(i)


def liminf_backward_products(spec: WeightSpec, horizon: int) -> BackwardLiminf:
    """Tail-half minimum of |w_{-n} ... w_{-1}| plus the exact liminf when forced."""
    if spec.unilateral:
        raise DomainMismatch("liminf of backward products needs the bilateral domain")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    ns = np.arange(max(1, horizon // 2), horizon + 1, dtype=np.int64)
    logs = spec.log_windows(-ns, ns)
    lim = spec.generator.backward_limits(0)
    return BackwardLiminf(exp_log(float(logs.min())), None if lim is None else lim.liminf, horizon)


class WindowProductCache:
    """Thread-safe memo of log window products for one spec."""

    def __init__(self, spec: WeightSpec):
        self.spec = spec
        self.spec_id = id(spec)
        self._memo: dict = {}
        self._lock = threading.Lock()

    def log_window(self, i: int, n: int) -> float:
        key = (i, n)
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        val = self.spec.log_window(i, n)
        with self._lock:
            self._memo.setdefault(key, val)
            return self._memo[key]

    def window_product(self, i: int, n: int) -> float:
        return exp_log(self.log_window(i, n))

    def __len__(self) -> int:
        return len(self._memo)


# --------------------------------------------------------------------------
# JSON


def _need(doc: dict, key: str, ptr: str):
    if key not in doc:
        raise ConfigError(f"{ptr}/{key}", "required key missing")
    return doc[key]


def _check_keys(doc, allowed: Iterable[str], ptr: str):
    if not isinstance(doc, dict):
        raise ConfigError(ptr, "expected an object")
    for k in doc:
        if k not in allowed:
            raise ConfigError(f"{ptr}/{k}", "unknown key")


def _real(x, ptr: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(ptr, "expected a number")
    if not math.isfinite(float(x)):
        raise ConfigError(ptr, "expected a finite number")
    return float(x)


def _reals(xs, ptr: str) -> Tuple[float, ...]:
    if not isinstance(xs, list) or not xs:
        raise ConfigError(ptr, "expected a nonempty list of numbers")
    return tuple(_real(x, f"{ptr}/{k}") for k, x in enumerate(xs))


def _int(x, ptr: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(ptr, "expected an integer")
    return x


def _frontier(x, ptr: str) -> Frontier:
    try:
        return Frontier(x)
    except ValueError:
        raise ConfigError(ptr, f"frontier must be one of {[f.value for f in Frontier]}") from None


GENERATOR_KEYS = {
    "constant": {"kind", "value"},
    "geometric": {"kind", "r"},
    "ratio_power": {"kind", "q"},
    "periodic": {"kind", "block"},
    "table": {"kind", "values", "origin", "frontier"},
    "step": {"kind", "values", "origin", "cell_width", "frontier"},
    "block_concat": {"kind", "first_block"},
    "piecewise": {"kind", "neg", "pos"},
}


def generator_from_json(doc, ptr: str = "") -> Generator:
    if not isinstance(doc, dict):
        raise ConfigError(ptr, "expected an object")
    kind = _need(doc, "kind", ptr)
    if kind not in GENERATOR_KEYS:
        raise ConfigError(f"{ptr}/kind", f"unknown generator kind {kind!r}")
    _check_keys(doc, GENERATOR_KEYS[kind], ptr)
    try:
        if kind == "constant":
            return Constant(_real(_need(doc, "value", ptr), f"{ptr}/value"))
        if kind == "geometric":
            return Geometric(_real(_need(doc, "r", ptr), f"{ptr}/r"))
        if kind == "ratio_power":
            return RatioPower(_real(_need(doc, "q", ptr), f"{ptr}/q"))
        if kind == "periodic":
            return Periodic(_reals(_need(doc, "block", ptr), f"{ptr}/block"))
        if kind == "table":
            return Table(_reals(_need(doc, "values", ptr), f"{ptr}/values"),
                         _int(doc.get("origin", 1), f"{ptr}/origin"),
                         _frontier(doc.get("frontier", "error"), f"{ptr}/frontier"))
        if kind == "step":
            return StepFunction(_reals(_need(doc, "values", ptr), f"{ptr}/values"),
                                _real(doc.get("origin", 1.0), f"{ptr}/origin"),
                                _real(doc.get("cell_width", 1.0), f"{ptr}/cell_width"),
                                _frontier(doc.get("frontier", "error"), f"{ptr}/frontier"))
        if kind == "block_concat":
            return BlockConcat(_int(doc.get("first_block", 2), f"{ptr}/first_block"))
        return PiecewiseBilateral(generator_from_json(_need(doc, "neg", ptr), f"{ptr}/neg"),
                                  generator_from_json(_need(doc, "pos", ptr), f"{ptr}/pos"))
    except ConfigError:
        raise
    except (ValueError, IndexOutOfDomain, NonFiniteWeight) as exc:
        raise ConfigError(ptr, str(exc)) from None


def spec_from_json(doc, ptr: str = "") -> WeightSpec:
    _check_keys(doc, {"domain", "generator", "magnitude_only"}, ptr)
    dom = doc.get("domain", "N")
    if dom not in ("N", "Z"):
        raise ConfigError(f"{ptr}/domain", "domain must be 'N' or 'Z'")
    gen = generator_from_json(_need(doc, "generator", ptr), f"{ptr}/generator")
    mag = doc.get("magnitude_only", True)
    if not isinstance(mag, bool):
        raise ConfigError(f"{ptr}/magnitude_only", "expected a boolean")
    try:
        return WeightSpec(Domain(dom), gen, mag)
    except (DomainMismatch, IndexOutOfDomain) as exc:
        raise ConfigError(ptr, str(exc)) from None


def unilateral(gen: Generator) -> WeightSpec:
    return WeightSpec(Domain.UNILATERAL, gen)


def bilateral(gen: Generator) -> WeightSpec:
    return WeightSpec(Domain.BILATERAL, gen)
