"""Atomic measure systems carrying a weighted composition operator.

An atom is identified by an integer.  Three shapes are supported:

* ``ShiftSystem``: atoms indexed by N or Z with f(j) = j + m.  With m = 1 this
  is the weighted backward shift; m > 1 arises from refining a translation
  operator into cells of width 1/m, where each residue class mod m is its own
  chain with its own weight sequence.
* ``ExplicitSystem`` without tail: a finite list of atoms with an explicit map.
* ``ExplicitSystem`` with tail: a finite core plus atoms t >= tail.start that
  move by t -> t + 1 with weights from a unilateral ``WeightSpec``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DomainMismatch,
    IndexOutOfDomain,
    NonUnitGrid,
    SupNormMismatch,
    UndecidableTail,
)
from .numerics import exp_log, fsum
from .weights import (
    Constant,
    Domain,
    Frontier,
    StepFunction,
    Table,
    WeightSpec,
)


class Structure(str, Enum):
    SHIFT = "shift"
    EXPLICIT_FINITE = "explicit_finite"
    EXPLICIT_WITH_TAIL = "explicit_with_tail"


@dataclass(frozen=True)
class Space:
    """Lp(p) for l^p(mu)-type norms, or the sup norm for c0-type spaces."""

    kind: str = "lp"
    p: float = 1.0

    def __post_init__(self):
        if self.kind not in ("lp", "sup"):
            raise ValueError("space kind must be 'lp' or 'sup'")
        if self.kind == "lp" and not (self.p >= 1 and math.isfinite(self.p)):
            raise ValueError("Lp spaces need 1 <= p < inf")

    @property
    def is_sup(self) -> bool:
        return self.kind == "sup"

    def to_json(self) -> dict:
        return {"kind": "sup"} if self.is_sup else {"kind": "lp", "p": self.p}


def lp(p: float = 1.0) -> Space:
    return Space("lp", float(p))


SUP = Space("sup", 1.0)


@dataclass(frozen=True)
class MassSpec:
    """Cell masses scale * ratio**c."""

    scale: float = 1.0
    ratio: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0 and self.ratio > 0):
            raise ValueError("masses must be positive")

    @property
    def uniform(self) -> bool:
        return self.ratio == 1.0

    def log_mass(self, c) -> np.ndarray:
        return math.log(self.scale) + np.asarray(c, dtype=float) * math.log(self.ratio)

    def mass(self, c: int) -> float:
        return exp_log(float(self.log_mass(c)))


@dataclass(frozen=True)
class AtomSet:
    """A finite set of atoms, optionally together with every atom >= ``from_atom``
    or with every atom of the system."""

    members: FrozenSet[int] = frozenset()
    from_atom: Optional[int] = None
    everything: bool = False

    def __contains__(self, x) -> bool:
        if self.everything:
            return True
        if self.from_atom is not None and x >= self.from_atom:
            return True
        return x in self.members

    @property
    def finite(self) -> bool:
        return not self.everything and self.from_atom is None

    def is_empty(self) -> bool:
        return self.finite and not self.members

    def to_json(self):
        if self.everything:
            return "all"
        out = {"members": sorted(self.members)}
        if self.from_atom is not None:
            out["from_atom"] = self.from_atom
        return out


class AtomicSystem:
    space: Space
    structure: Structure

    # subclasses implement the following
    def image(self, x: int) -> int: ...
    def preimage(self, x: int) -> List[int]: ...
    def weight(self, x: int) -> float: ...
    def mass(self, x: int) -> float: ...
    def log_weight_product(self, x: int, n: int) -> float: ...
    def contains(self, x: int) -> bool: ...

    @property
    def p(self) -> float:
        return self.space.p

    @property
    def is_finite(self) -> bool:
        return False

    @property
    def injective(self) -> bool:
        return True

    def preimage_n(self, B: Iterable[int], n: int) -> List[int]:
        cur = sorted(set(B))
        for _ in range(n):
            nxt: List[int] = []
            for y in cur:
                nxt.extend(self.preimage(y))
            cur = sorted(set(nxt))
            if not cur:
                break
        return cur

    def forward(self, x: int, n: int) -> int:
        for _ in range(n):
            x = self.image(x)
        return x

    def weight_product(self, x: int, n: int) -> float:
        return exp_log(self.log_weight_product(x, n))


@dataclass(frozen=True)
class ShiftSystem(AtomicSystem):
    chains: Tuple[WeightSpec, ...]
    space: Space = field(default_factory=lp)
    masses: MassSpec = field(default_factory=MassSpec)
    structure = Structure.SHIFT

    def __post_init__(self):
        if not self.chains:
            raise ValueError("a shift system needs at least one chain")
        doms = {c.domain for c in self.chains}
        if len(doms) != 1:
            raise DomainMismatch("all chains must share one domain")

    @property
    def stride(self) -> int:
        return len(self.chains)

    @property
    def domain(self) -> Domain:
        return self.chains[0].domain

    @property
    def unilateral(self) -> bool:
        return self.domain is Domain.UNILATERAL

    @property
    def spec(self) -> WeightSpec:
        if self.stride != 1:
            raise ValueError("refined systems carry one spec per chain")
        return self.chains[0]

    @property
    def origin_cell(self) -> int:
        return 1 if self.unilateral else 0

    def split(self, x: int) -> Tuple[int, int]:
        """Atom -> (chain, cell)."""
        m = self.stride
        if self.unilateral:
            if x < 1:
                raise IndexOutOfDomain(f"atom {x} outside N")
            return (x - 1) % m, (x - 1) // m + 1
        return x % m, x // m

    def atom(self, r: int, c: int) -> int:
        m = self.stride
        return (c - 1) * m + r + 1 if self.unilateral else c * m + r

    def cell_atoms(self, c: int) -> List[int]:
        return [self.atom(r, c) for r in range(self.stride)]

    def interval_atoms(self, a: int, b: int) -> List[int]:
        """Atoms making up the unit-grid set [a, b)."""
        return [x for c in range(a, b) for x in self.cell_atoms(c)]

    def contains(self, x):
        return not (self.unilateral and x < 1)

    def image(self, x):
        return x + self.stride

    def preimage(self, x):
        r, c = self.split(x)
        if self.unilateral and c <= 1:
            return []
        return [x - self.stride]

    def weight(self, x):
        r, c = self.split(x)
        return abs(self.chains[r].value(c))

    def mass(self, x):
        r, c = self.split(x)
        return self.masses.mass(c) / self.stride

    def log_weight_product(self, x, n):
        r, c = self.split(x)
        return self.chains[r].log_window(c, n)

    def preimage_n(self, B, n):
        out = []
        for x in sorted(set(B)):
            r, c = self.split(x)
            if not (self.unilateral and c - n < 1):
                out.append(x - n * self.stride)
        return out


@dataclass(frozen=True)
class Tail:
    """Atoms t >= start with t -> t + 1, weight spec.value(t - start + 1)."""

    start: int
    spec: WeightSpec
    masses: MassSpec = field(default_factory=MassSpec)

    def __post_init__(self):
        if not self.spec.unilateral:
            raise DomainMismatch("tail weights are indexed from 1")

    def index(self, t: int) -> int:
        return t - self.start + 1


@dataclass(frozen=True)
class ExplicitSystem(AtomicSystem):
    atoms: Tuple[int, ...]
    fmap: Mapping[int, int]
    weights: Mapping[int, float]
    space: Space = field(default_factory=lp)
    masses: Mapping[int, float] = field(default_factory=dict)
    tail: Optional[Tail] = None
    _inverse: Dict[int, List[int]] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        atoms = tuple(sorted(set(int(a) for a in self.atoms)))
        if not atoms:
            raise ValueError("an explicit system needs at least one atom")
        object.__setattr__(self, "atoms", atoms)
        aset = set(atoms)
        if self.tail is not None and atoms[-1] >= self.tail.start:
            raise ValueError("core atoms must lie below the tail start")
        inv: Dict[int, List[int]] = {}
        for x in atoms:
            if x not in self.fmap:
                raise ValueError(f"map undefined at atom {x}")
            y = int(self.fmap[x])
            described = y in aset or (self.tail is not None and y >= self.tail.start)
            if not described:
                raise UndecidableTail(f"atom {x} maps to undescribed atom {y}")
            inv.setdefault(y, []).append(x)
            w = float(self.weights.get(x, 1.0))
            if not math.isfinite(w):
                raise ValueError(f"weight at atom {x} is not finite")
            m = float(self.masses.get(x, 1.0))
            if not (m > 0 and math.isfinite(m)):
                raise ValueError(f"mass at atom {x} must be positive")
        for k in (*self.weights, *self.masses):
            if k not in aset:
                raise ValueError(f"weight or mass given for unknown atom {k}")
        object.__setattr__(self, "_inverse", inv)

    @property
    def structure(self) -> Structure:
        return Structure.EXPLICIT_FINITE if self.tail is None else Structure.EXPLICIT_WITH_TAIL

    @property
    def is_finite(self) -> bool:
        return self.tail is None

    @property
    def injective(self) -> bool:
        return all(len(v) == 1 for v in self._inverse.values())

    def _in_tail(self, x: int) -> bool:
        return self.tail is not None and x >= self.tail.start

    def contains(self, x):
        return x in self.fmap or self._in_tail(x)

    def _check(self, x):
        if not self.contains(x):
            raise IndexOutOfDomain(f"atom {x} is not described")

    def image(self, x):
        self._check(x)
        return x + 1 if self._in_tail(x) else int(self.fmap[x])

    def preimage(self, x):
        self._check(x)
        out = list(self._inverse.get(x, []))
        if self._in_tail(x) and x - 1 >= self.tail.start:
            out.append(x - 1)
        return sorted(out)

    def weight(self, x):
        self._check(x)
        if self._in_tail(x):
            return self.tail.spec.value(self.tail.index(x))
        return abs(float(self.weights.get(x, 1.0)))

    def mass(self, x):
        self._check(x)
        if self._in_tail(x):
            return self.tail.masses.mass(self.tail.index(x) - 1)
        return float(self.masses.get(x, 1.0))

    def log_weight_product(self, x, n):
        total = 0.0
        for k in range(n):
            if self._in_tail(x):
                return total + self.tail.spec.log_window(self.tail.index(x), n - k)
            w = self.weight(x)
            if w == 0.0:
                return -math.inf
            total += math.log(w)
            x = self.image(x)
        return total

    def scan_atoms(self, count: int) -> List[int]:
        """Core atoms, then the first ``count`` tail atoms."""
        out = list(self.atoms)
        if self.tail is not None:
            out.extend(range(self.tail.start, self.tail.start + count))
        return out


# --------------------------------------------------------------------------
# builders


def build_shift_system(spec: WeightSpec, space: Space = None, masses: MassSpec = None) -> ShiftSystem:
    """The weighted backward shift: e_i goes to w_{i-1} e_{i-1}."""
    return ShiftSystem((spec,), space or lp(1.0), masses or MassSpec())


def _refine_step(step: StepFunction, domain: Domain, refine: int) -> Tuple[WeightSpec, ...]:
    m0 = step.refinement()
    m = m0 * refine
    k0 = round(step.origin * m0) * refine  # first subcell measured in units of 1/m
    cells: Dict[int, Dict[int, float]] = {r: {} for r in range(m)}
    for k, v in enumerate(step.values):
        for u in range(refine):
            pos = k0 + k * refine + u  # left end is pos / m
            if domain is Domain.UNILATERAL:
                if pos < m:
                    raise NonUnitGrid("unilateral step functions must start at x >= 1")
                j = pos - m + 1
                r, c = (j - 1) % m, (j - 1) // m + 1
            else:
                r, c = pos % m, pos // m
            cells[r][c] = v
    if any(not d for d in cells.values()):
        raise NonUnitGrid("step function shorter than one unit cell")
    lo = min(min(d) for d in cells.values())
    hi = max(max(d) for d in cells.values())
    chains = []
    for r in range(m):
        d = cells[r]
        if step.frontier is not Frontier.ERROR:
            left = step.values[0] if step.frontier is Frontier.HOLD else 0.0
            right = step.values[-1] if step.frontier is Frontier.HOLD else 0.0
            for c in range(lo, hi + 1):
                if c not in d:
                    d[c] = left if c < min(d) else right
        cs = sorted(d)
        if cs != list(range(cs[0], cs[-1] + 1)):
            raise NonUnitGrid("refined cells are not contiguous")
        chains.append(WeightSpec(domain, Table(tuple(d[c] for c in cs), cs[0], step.frontier)))
    return tuple(chains)


def reduce_translation(weights: WeightSpec, space: Space = None, refine: int = 1) -> ShiftSystem:
    """Atomic form of the weighted translation operator on unit-grid sets.

    ``weights`` holds a StepFunction (any 1/m grid) or any generator read as
    unit-cell values.  ``refine`` splits every cell further; masses become the
    cell lengths.
    """
    if refine < 1:
        raise ValueError("refine must be >= 1")
    space = space or lp(1.0)
    g = weights.generator
    if isinstance(g, StepFunction):
        chains = _refine_step(g, weights.domain, refine)
    else:
        chains = (weights,) * refine
    return ShiftSystem(chains, space, MassSpec())


# --------------------------------------------------------------------------
# measures


def _log_terms_on_preimage(system: AtomicSystem, B: Iterable[int], n: int) -> List[Tuple[int, float]]:
    if n < 1:
        raise ValueError("n must be positive")
    pre = system.preimage_n(B, n)
    return [(x, system.log_weight_product(x, n)) for x in pre]


def mu_n_preimage(system: AtomicSystem, B: Iterable[int], n: int) -> float:
    """mu_n(f^{-n}(B)) = sum over x with f^n(x) in B of mass(x) |w^(n)(x)|^p."""
    if system.space.is_sup:
        raise SupNormMismatch("mu_n is an Lp quantity; use sup_weight_on_preimage")
    p = system.p
    terms = [system.mass(x) * exp_log(p * lw) for x, lw in _log_terms_on_preimage(system, B, n)]
    return fsum(terms)


def sup_weight_on_preimage(system: AtomicSystem, B: Iterable[int], n: int) -> float:
    """max |w^(n)| over f^{-n}(B); 0 for an empty preimage."""
    terms = _log_terms_on_preimage(system, B, n)
    if not terms:
        return 0.0
    return exp_log(max(lw for _, lw in terms))


# --------------------------------------------------------------------------
# boundedness


@dataclass
class BoundednessReport:
    horizon: int
    c_min: float
    witness: Optional[int]
    violations: List[dict]
    checked_pairs: int


def _scan_range_atoms(system: AtomicSystem, horizon: int) -> List[int]:
    if isinstance(system, ShiftSystem):
        m = system.stride
        if system.unilateral:
            cells = range(1, horizon + 1)
        else:
            cells = range(-(horizon // 2), horizon - horizon // 2)
        atoms = [system.atom(r, c) for c in cells for r in range(m)]
        return [x for x in atoms if _weight_defined(system, x, 1)]
    if isinstance(system, ExplicitSystem):
        return system.scan_atoms(horizon)
    raise TypeError("unknown system type")


def _weight_defined(system: AtomicSystem, x: int, n: int) -> bool:
    try:
        system.log_weight_product(x, n)
        return True
    except IndexOutOfDomain:
        return False


def validate_boundedness(system: AtomicSystem, horizon: int = 100) -> BoundednessReport:
    """Smallest c with int_B |w|^p <= c mu(f(B)) over scanned fibers, plus the
    iterated inequality mu_n(B) <= c^n mu(f^n(B)) on sampled singletons."""
    if system.space.is_sup:
        raise SupNormMismatch("the integral boundedness condition is an Lp notion")
    p = system.p
    atoms = _scan_range_atoms(system, horizon)
    # c must dominate whole fibers f^{-1}(y), which covers every singleton
    fibers: Dict[int, List[int]] = {}
    for x in atoms:
        fibers.setdefault(system.image(x), []).append(x)
    c_min, wit = 0.0, None
    for y in sorted(fibers):
        num = fsum(system.mass(x) * system.weight(x) ** p for x in fibers[y])
        ratio = num / system.mass(y)
        if ratio > c_min:
            c_min, wit = ratio, y
    violations = []
    pairs = 0
    step = max(1, len(atoms) // 64)
    sample = atoms[::step]
    for x in sample:
        for n in range(1, horizon + 1):
            if not _weight_defined(system, x, n):
                break
            lhs = system.mass(x) * exp_log(p * system.log_weight_product(x, n))
            rhs = c_min ** n * system.mass(system.forward(x, n))
            pairs += 1
            if lhs > rhs * (1 + 1e-12) and not (math.isinf(lhs) and math.isinf(rhs)):
                violations.append({"atom": x, "n": n, "lhs": lhs, "rhs": rhs})
    return BoundednessReport(horizon, c_min, wit, violations, pairs)


# --------------------------------------------------------------------------
# Hopf decomposition


@dataclass
class HopfPartition:
    conservative: AtomSet
    dissipative: AtomSet
    wandering_generator: Optional[AtomSet]
    periods: Dict[int, int]
    verified_horizon: int

    def to_json(self):
        return {
            "conservative": self.conservative.to_json(),
            "dissipative": self.dissipative.to_json(),
            "wandering_generator": None if self.wandering_generator is None
            else self.wandering_generator.to_json(),
            "periods": {str(k): v for k, v in sorted(self.periods.items())},
            "verified_horizon": self.verified_horizon,
        }


def verify_wandering(system: AtomicSystem, W: Sequence[int], dissipative: AtomSet,
                     horizon: int, backward: bool) -> bool:
    """Check f^j(W) (restricted to the dissipative part) are pairwise disjoint
    for |j| <= horizon."""
    seen: Dict[int, int] = {}
    cur = set(W)
    for j in range(horizon + 1):
        for x in cur:
            if x in seen and seen[x] != j:
                return False
            seen[x] = j
        cur = {system.image(x) for x in cur}
        cur = {x for x in cur if x in dissipative}
        if not cur:
            break
    if backward:
        cur = set(W)
        for j in range(1, horizon + 1):
            cur = {y for x in cur for y in system.preimage(x) if y in dissipative}
            for x in cur:
                if x in seen and seen[x] != -j:
                    return False
                seen[x] = -j
            if not cur:
                break
    return True


def hopf_decompose(system: AtomicSystem, horizon: int = 1000) -> HopfPartition:
    """Split atoms into periodic (conservative) and wandering (dissipative) parts."""
    if isinstance(system, ShiftSystem):
        dis = AtomSet(everything=True)
        W = system.cell_atoms(system.origin_cell)
        ok = verify_wandering(system, W, dis, horizon, backward=not system.unilateral)
        return HopfPartition(AtomSet(), dis, AtomSet(frozenset(W)) if ok else None, {}, horizon)
    if not isinstance(system, ExplicitSystem):
        raise UndecidableTail("unknown system structure")
    periods: Dict[int, int] = {}
    core = set(system.atoms)
    for x in system.atoms:
        y = x
        for k in range(1, len(core) + 1):
            y = system.image(y)
            if y == x:
                periods[x] = k
                break
            if y not in core:
                break
    cons = frozenset(periods)
    dis_core = frozenset(core - cons)
    from_atom = system.tail.start if system.tail is not None else None
    dis = AtomSet(dis_core, from_atom)
    sources = sorted(x for x in dis_core if not any(y in dis for y in system.preimage(x)))
    if from_atom is not None and not any(y in dis for y in system.preimage(from_atom)):
        sources.append(from_atom)
    gen = None
    if sources and verify_wandering(system, sources, dis, horizon, backward=False):
        gen = AtomSet(frozenset(sources))
    return HopfPartition(AtomSet(cons), dis, gen, periods, horizon)


# --------------------------------------------------------------------------
# JSON


def space_from_json(doc, ptr: str = "") -> Space:
    from .errors import ConfigError
    from .weights import _check_keys, _real

    _check_keys(doc, {"kind", "p"}, ptr)
    kind = doc.get("kind", "lp")
    if kind == "sup":
        if "p" in doc:
            raise ConfigError(f"{ptr}/p", "sup-norm spaces take no exponent")
        return SUP
    if kind != "lp":
        raise ConfigError(f"{ptr}/kind", "space kind must be 'lp' or 'sup'")
    p = _real(doc.get("p", 1.0), f"{ptr}/p")
    if p < 1:
        raise ConfigError(f"{ptr}/p", "p must be >= 1")
    return lp(p)


def masses_from_json(doc, ptr: str = "") -> MassSpec:
    from .errors import ConfigError
    from .weights import _check_keys, _real

    _check_keys(doc, {"scale", "ratio"}, ptr)
    scale = _real(doc.get("scale", 1.0), f"{ptr}/scale")
    ratio = _real(doc.get("ratio", 1.0), f"{ptr}/ratio")
    if scale <= 0 or ratio <= 0:
        raise ConfigError(ptr, "mass scale and ratio must be positive")
    return MassSpec(scale, ratio)


def system_from_json(doc, ptr: str = "") -> AtomicSystem:
    from .errors import ConfigError
    from .weights import _check_keys, _int, _need, _real, spec_from_json

    if not isinstance(doc, dict):
        raise ConfigError(ptr, "expected an object")
    kind = doc.get("kind", "shift")
    keys = {
        "shift": {"kind", "weights", "space", "masses"},
        "translation": {"kind", "weights", "space", "refine"},
        "explicit": {"kind", "atoms", "map", "weights", "masses", "space", "tail"},
    }
    if kind not in keys:
        raise ConfigError(f"{ptr}/kind", "system kind must be shift, translation or explicit")
    _check_keys(doc, keys[kind], ptr)
    space = space_from_json(doc.get("space", {"kind": "lp", "p": 1.0}), f"{ptr}/space")
    if kind == "shift":
        spec = spec_from_json(_need(doc, "weights", ptr), f"{ptr}/weights")
        masses = masses_from_json(doc.get("masses", {}), f"{ptr}/masses")
        return build_shift_system(spec, space, masses)
    if kind == "translation":
        spec = spec_from_json(_need(doc, "weights", ptr), f"{ptr}/weights")
        refine = _int(doc.get("refine", 1), f"{ptr}/refine")
        try:
            return reduce_translation(spec, space, refine)
        except (NonUnitGrid, ValueError) as exc:
            raise ConfigError(ptr, str(exc)) from None
    atoms = _need(doc, "atoms", ptr)
    if not isinstance(atoms, list) or not atoms:
        raise ConfigError(f"{ptr}/atoms", "expected a nonempty list of integers")
    atoms = [_int(a, f"{ptr}/atoms/{k}") for k, a in enumerate(atoms)]

    def int_map(name, conv):
        raw = doc.get(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"{ptr}/{name}", "expected an object keyed by atom")
        out = {}
        for k, v in raw.items():
            try:
                key = int(k)
            except ValueError:
                raise ConfigError(f"{ptr}/{name}/{k}", "keys must be integer atoms") from None
            out[key] = conv(v, f"{ptr}/{name}/{k}")
        return out

    fmap = int_map("map", _int)
    weights = int_map("weights", _real)
    masses = int_map("masses", _real)
    tail = None
    if "tail" in doc:
        tdoc = doc["tail"]
        _check_keys(tdoc, {"start", "weights", "masses"}, f"{ptr}/tail")
        tail = Tail(_int(_need(tdoc, "start", f"{ptr}/tail"), f"{ptr}/tail/start"),
                    spec_from_json(_need(tdoc, "weights", f"{ptr}/tail"), f"{ptr}/tail/weights"),
                    masses_from_json(tdoc.get("masses", {}), f"{ptr}/tail/masses"))
    try:
        return ExplicitSystem(tuple(atoms), fmap, weights, space, masses, tail)
    except (ValueError, UndecidableTail) as exc:
        raise ConfigError(ptr, str(exc)) from None


def system_to_json(system: AtomicSystem) -> dict:
    if isinstance(system, ShiftSystem):
        if system.stride != 1:
            return {"kind": "shift_refined", "chains": [c.to_json() for c in system.chains],
                    "space": system.space.to_json()}
        return {"kind": "shift", "weights": system.spec.to_json(), "space": system.space.to_json(),
                "masses": {"scale": system.masses.scale, "ratio": system.masses.ratio}}
    assert isinstance(system, ExplicitSystem)
    out = {
        "kind": "explicit",
        "atoms": list(system.atoms),
        "map": {str(k): int(system.fmap[k]) for k in system.atoms},
        "weights": {str(k): float(system.weights.get(k, 1.0)) for k in system.atoms},
        "masses": {str(k): float(system.masses.get(k, 1.0)) for k in system.atoms},
        "space": system.space.to_json(),
    }
    if system.tail is not None:
        out["tail"] = {"start": system.tail.start, "weights": system.tail.spec.to_json(),
                       "masses": {"scale": system.tail.masses.scale,
                                  "ratio": system.tail.masses.ratio}}
    return out
