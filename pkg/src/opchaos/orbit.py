"""Sparse vectors, orbits and the explicit irregular-vector constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .density import IndexSet, lower_density_stat, upper_density_stat
from .errors import (
    DivergentASeries,
    DivergentSum,
    NonInjectiveMap,
    NonpositiveWeight,
    SupNormMismatch,
    SupportExplosion,
)
from .numerics import exp_log, fsum
from .system import AtomicSystem, ShiftSystem, mu_n_preimage, sup_weight_on_preimage
from .weights import Constant, Periodic

DEFAULT_SUPPORT_CAP = 1_000_000
TRUNCATION_RTOL = 1e-12


@dataclass(frozen=True)
class SparseVector:
    entries: Mapping[int, float] = field(default_factory=dict)

    @classmethod
    def basis(cls, x: int, value: float = 1.0) -> "SparseVector":
        return cls({x: float(value)})

    @classmethod
    def indicator(cls, atoms: Iterable[int], value: float = 1.0) -> "SparseVector":
        return cls({int(x): float(value) for x in atoms})

    @property
    def support(self) -> List[int]:
        return sorted(x for x, v in self.entries.items() if v != 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, other: "SparseVector") -> "SparseVector":
        out = dict(self.entries)
        for x, v in other.entries.items():
            out[x] = out.get(x, 0.0) + v
        return SparseVector({x: v for x, v in out.items() if v != 0.0})

    def scale(self, c: float) -> "SparseVector":
        return SparseVector({x: c * v for x, v in self.entries.items() if c * v != 0.0})

    def sub(self, other: "SparseVector") -> "SparseVector":
        return self.add(other.scale(-1.0))

    def to_json(self) -> dict:
        return {str(x): self.entries[x] for x in sorted(self.entries)}


def norm(system: AtomicSystem, v: SparseVector) -> float:
    """Norm in the system's space; the sup norm ignores masses."""
    if not v.entries:
        return 0.0
    if system.space.is_sup:
        return max(abs(c) for c in v.entries.values())
    p = system.p
    return fsum(system.mass(x) * abs(c) ** p for x, c in v.entries.items()) ** (1.0 / p)


def apply_operator(system: AtomicSystem, v: SparseVector) -> SparseVector:
    """out(x) = w(x) v(f(x)), pulled back through preimages of the support."""
    out: Dict[int, float] = {}
    for y in sorted(v.entries):
        c = v.entries[y]
        if c == 0.0:
            continue
        for x in system.preimage(y):
            val = system.weight(x) * c
            if val != 0.0:
                out[x] = out.get(x, 0.0) + val
    return SparseVector(out)


@dataclass
class OrbitSeries:
    n_max: int
    norms: List[float]  # ||T^n y|| for n = 1..n_max
    cesaro: List[float]  # (1/N) sum_{n<=N} norms, N = 1..n_max
    support_drift: List[Tuple[int, Optional[int], Optional[int]]]  # (size, min atom, max atom)
    initial_norm: float = 0.0

    def to_rows(self) -> List[Tuple[int, float, float]]:
        return [(n + 1, self.norms[n], self.cesaro[n]) for n in range(self.n_max)]


def orbit_norm_series(system: AtomicSystem, v: SparseVector, n_max: int,
                      support_cap: int = DEFAULT_SUPPORT_CAP) -> OrbitSeries:
    norms, drift = [], []
    cur = v
    for n in range(1, n_max + 1):
        cur = apply_operator(system, cur)
        if len(cur) > support_cap:
            raise SupportExplosion(f"support {len(cur)} exceeds cap {support_cap} at n={n}")
        norms.append(norm(system, cur))
        sup = cur.support
        drift.append((len(sup), sup[0] if sup else None, sup[-1] if sup else None))
    # compensated running means
    cesaro = [fsum(norms[:N]) / N for N in range(1, n_max + 1)] if n_max <= 4096 else _running_means(norms)
    return OrbitSeries(n_max, norms, cesaro, drift, norm(system, v))


def _running_means(xs: Sequence[float]) -> List[float]:
    out, partial = [], []
    for N, x in enumerate(xs, start=1):
        partial.append(x)
        if len(partial) > 64:
            partial = [fsum(partial)]
        out.append(fsum(partial) / N)
    return out


# --------------------------------------------------------------------------
# set families and declared tail bounds


@dataclass(frozen=True)
class SetFamily:
    """A_n = base translated by n * step, or one fixed set for every n."""

    base: Tuple[int, ...]
    step: int = 1

    @classmethod
    def translated(cls, base: Iterable[int], step: int = 1) -> "SetFamily":
        return cls(tuple(sorted(set(int(x) for x in base))), int(step))

    @classmethod
    def fixed(cls, base: Iterable[int]) -> "SetFamily":
        return cls(tuple(sorted(set(int(x) for x in base))), 0)

    def sets(self, n: int) -> List[int]:
        return [x + n * self.step for x in self.base]

    def to_json(self) -> dict:
        return {"base": list(self.base), "step": self.step}


@dataclass(frozen=True)
class TailBound:
    """term_n <= C * rate^n (geometric) or C * n^(-rate) (p_series) for n >= n0."""

    kind: str
    C: float
    rate: float
    n0: int = 1

    def __post_init__(self):
        if self.kind not in ("geometric", "p_series"):
            raise ValueError("tail bounds are geometric or p_series")
        if self.kind == "geometric" and not (0.0 < self.rate < 1.0):
            raise ValueError("geometric tail needs 0 < rate < 1")
        if self.kind == "p_series" and not self.rate > 1.0:
            raise ValueError("p-series tail needs exponent > 1")
        if not self.C > 0.0:
            raise ValueError("tail constant must be positive")

    def term(self, n: int) -> float:
        if self.kind == "geometric":
            return self.C * self.rate ** n
        return self.C * float(n) ** (-self.rate)

    def tail_sum(self, H: int) -> float:
        """Upper bound for sum_{n > H} term_n (H >= n0 - 1)."""
        if self.kind == "geometric":
            return self.C * self.rate ** (H + 1) / (1.0 - self.rate)
        s = self.rate
        if H < 1:
            return self.C * (1.0 + 1.0 / (s - 1.0))
        return self.C * float(H) ** (1.0 - s) / (s - 1.0)

    def violations(self, terms: Mapping[int, float], rtol: float = 1e-12) -> List[int]:
        return [n for n, t in sorted(terms.items()) if n >= self.n0 and t > self.term(n) * (1.0 + rtol)]

    def to_json(self) -> dict:
        return {"kind": self.kind, "C": self.C, "rate": self.rate, "n0": self.n0}


def builtin_tail_bound(system: AtomicSystem, family: SetFamily, terms: Mapping[int, float],
                       power: float) -> Optional[TailBound]:
    """Exact geometric envelope when the terms repeat with a fixed ratio per period.

    Applies to single-chain shifts with geometric masses, Constant or Periodic
    weights and translated singletons with unit step.  There every term is
    K (rho^n / |w_c ... w_{c+n-1}|^p)^power, so t_{n+L} = t_n R exactly with
    R = (rho^L / |P|^p)^power for the period product P.  Returns None otherwise.
    """
    if not isinstance(system, ShiftSystem) or system.stride != 1:
        return None
    if len(family.base) != 1 or family.step != 1 or not terms:
        return None
    g = system.spec.generator
    if not isinstance(g, (Constant, Periodic)) or g.has_zero():
        return None
    L = g.period if isinstance(g, Periodic) else 1
    c = family.base[0]
    n0 = min(terms)
    if any(n not in terms for n in range(n0, n0 + L)):
        return None
    logP = system.spec.log_window(c + n0, L)
    if system.space.is_sup:
        log_R = -power * logP
    else:
        log_R = power * (L * math.log(system.masses.ratio) - system.p * logP)
    if not log_R < 0.0:
        return None
    rate = exp_log(log_R / L)
    C = max(terms[n] / rate ** n for n in range(n0, n0 + L))
    return TailBound("geometric", C * (1.0 + 1e-12), rate, n0)


def fitted_tail_bound(terms: Mapping[int, float]) -> Optional[TailBound]:
    """Geometric envelope fitted on the tail half of the scanned terms (not a proof)."""
    ns = sorted(n for n, t in terms.items() if t > 0.0)
    if len(ns) < 4:
        return None
    half = ns[len(ns) // 2:]
    ratios = []
    for a, b in zip(half, half[1:]):
        ratios.append((terms[b] / terms[a]) ** (1.0 / (b - a)))
    rate = max(ratios)
    if not rate < 1.0:
        return None
    C = max(terms[n] / rate ** n for n in half)
    return TailBound("geometric", C, rate, half[0])


# --------------------------------------------------------------------------
# the summable-coefficient construction


@dataclass
class DCVectorPlan:
    vector: SparseVector
    indices: List[int]  # n in E used, in order
    a: List[float]
    r: List[float]
    c: List[float]
    lower_bounds: List[float]  # 1/sqrt(r_n), a lower bound for ||T^n y||
    partial_sums: List[float]  # running sum of a_n / sqrt(r_n)
    bound: float  # 2 sqrt(r_1)
    bound_holds: bool
    truncation: int
    tail: Optional[TailBound]
    tail_source: str  # declared, builtin, fitted

    def to_json(self) -> dict:
        return {
            "vector": self.vector.to_json(),
            "indices": self.indices,
            "a": self.a,
            "r": self.r,
            "c": self.c,
            "lower_bounds": self.lower_bounds,
            "partial_sums": self.partial_sums,
            "bound": self.bound,
            "bound_holds": self.bound_holds,
            "truncation": self.truncation,
            "tail": None if self.tail is None else self.tail.to_json(),
            "tail_source": self.tail_source,
        }


def _check_positive_weights(system: AtomicSystem, atoms: Iterable[int]):
    for x in atoms:
        if system.weight(x) == 0.0:
            raise NonpositiveWeight(f"weight vanishes at atom {x}")


def dc_terms(system: AtomicSystem, family: SetFamily, E: IndexSet, horizon: int) -> Dict[int, float]:
    """a_n = (mu(A_n) / mu_n(f^{-n}(A_n)))^{1/p}, or 1/||w^(n)|| on f^{-n}(A_n) for sup norms."""
    out = {}
    for n in E.members(horizon):
        n = int(n)
        A = family.sets(n)
        if system.space.is_sup:
            s = sup_weight_on_preimage(system, A, n)
            out[n] = math.inf if s == 0.0 else 1.0 / s
        else:
            mu = fsum(system.mass(x) for x in A)
            mun = mu_n_preimage(system, A, n)
            out[n] = math.inf if mun == 0.0 else (mu / mun) ** (1.0 / system.p)
    return out


def resolve_tail(system: AtomicSystem, family: SetFamily, terms: Mapping[int, float],
                 declared: Optional[TailBound], power: float = 1.0) -> Tuple[Optional[TailBound], str]:
    """Pick a tail bound: declared and verified, else built-in closed form, else fitted."""
    if declared is not None:
        if declared.violations(terms):
            return None, "declared-rejected"
        return declared, "declared"
    if terms:
        bt = builtin_tail_bound(system, family, terms, power)
        if bt is not None and not bt.violations(terms):
            return bt, "builtin"
    ft = fitted_tail_bound(terms)
    return ft, "fitted" if ft is not None else "none"


def construct_dc_vector(system: AtomicSystem, family: SetFamily, E: IndexSet, horizon: int = 200,
                        tail_bound: Optional[TailBound] = None) -> DCVectorPlan:
    """y = sum_{n in E} c_n chi_{A_n} with c_n = 1/(sqrt(r_n) mu_n(f^{-n}(A_n))^{1/p})."""
    if system.space.is_sup:
        raise SupNormMismatch("the coefficient construction is stated for L^p spaces")
    ns = [int(n) for n in E.members(horizon)]
    _check_positive_weights(system, {x for n in ns for A in [family.sets(n)] for x in system.preimage_n(A, n)})
    terms = dc_terms(system, family, E, horizon)
    if any(not math.isfinite(t) for t in terms.values()):
        raise DivergentASeries("some A_n has an empty weighted preimage")
    power = 1.0 if system.space.is_sup else 1.0 / system.p
    tail, source = resolve_tail(system, family, terms, tail_bound, power)
    if tail is None:
        raise DivergentASeries("no summable envelope for a_n over the scanned range")
    # r_n = sum_{i >= n, i in E} a_i, the part past the horizon bounded by the tail
    tail_rest = tail.tail_sum(horizon)
    a = [terms[n] for n in ns]
    r = [0.0] * len(ns)
    acc = [tail_rest]
    for k in range(len(ns) - 1, -1, -1):
        acc.append(a[k])
        r[k] = fsum(acc)
        if len(acc) > 64:
            acc = [fsum(acc)]
    lower = [1.0 / math.sqrt(x) for x in r]
    ratio = [a[k] / math.sqrt(r[k]) for k in range(len(ns))]
    partial, run = [], []
    for t in ratio:
        run.append(t)
        partial.append(fsum(run))
    bound = 2.0 * math.sqrt(r[0]) if r else 0.0
    holds = all(s <= bound * (1.0 + 1e-15) for s in partial)
    # truncate where the remaining norm, at most 2 sqrt(r_{K+1}), is negligible
    K = len(ns)
    for k in range(len(ns) - 1):
        if 2.0 * math.sqrt(r[k + 1]) < TRUNCATION_RTOL * partial[k]:
            K = k + 1
            break
    c, y = [], {}
    p = system.p
    for k in range(len(ns)):
        n = ns[k]
        A = family.sets(n)
        mun = mu_n_preimage(system, A, n)
        ck = 1.0 / (math.sqrt(r[k]) * mun ** (1.0 / p))
        c.append(ck)
        if k < K:
            for x in A:
                y[x] = y.get(x, 0.0) + ck
    return DCVectorPlan(SparseVector(y), ns, a, r, c, lower, partial, bound, holds, ns[K - 1] if ns else 0,
                        tail, source)


# --------------------------------------------------------------------------
# the injective dissipative construction


@dataclass
class DDCVectorPlan:
    vector: SparseVector
    k: int
    norm: float
    terms: Dict[int, float]  # n -> mass-weighted contribution of block n
    tail: Optional[TailBound]
    tail_source: str
    truncation: int
    lower_bound: float  # mu(B')^{1/p}
    checked: Dict[int, float]  # n -> ||T^n phi_k|| on scanned n
    lower_bound_holds: bool

    def to_json(self) -> dict:
        return {
            "vector": self.vector.to_json(),
            "k": self.k,
            "norm": self.norm,
            "terms": {str(n): t for n, t in sorted(self.terms.items())},
            "tail": None if self.tail is None else self.tail.to_json(),
            "tail_source": self.tail_source,
            "truncation": self.truncation,
            "lower_bound": self.lower_bound,
            "checked": {str(n): v for n, v in sorted(self.checked.items())},
            "lower_bound_holds": self.lower_bound_holds,
        }


def ddc_terms(system: AtomicSystem, B: Sequence[int], D: IndexSet, k: int, horizon: int) -> Dict[int, float]:
    """n -> sum_{b in B} mass(f^n b) / |w^(n)(b)|^p for n in D, k <= n <= horizon."""
    p = system.p
    out = {}
    for n in D.members(horizon):
        n = int(n)
        if n < k:
            continue
        vals = []
        for b in B:
            lw = system.log_weight_product(b, n)
            vals.append(system.mass(system.forward(b, n)) * exp_log(-p * lw))
        out[n] = fsum(vals)
    return out


def construct_ddc_vector(system: AtomicSystem, B: Sequence[int], D: IndexSet, k: int, horizon: int = 200,
                         tail_bound: Optional[TailBound] = None, check_max: int = 64) -> DDCVectorPlan:
    """phi_k = sum_{n in D, n >= k} (1/v_n) chi_{f^n(B)} with v_n the weight product along f."""
    if system.space.is_sup:
        raise SupNormMismatch("the construction is stated for L^p spaces")
    if not system.injective:
        raise NonInjectiveMap("phi_k needs an injective map")
    B = sorted(set(int(b) for b in B))
    terms = ddc_terms(system, B, D, k, horizon)
    family = SetFamily.translated(B, 1)
    tail, source = resolve_tail(system, family, terms, tail_bound, 1.0)
    if tail is None or source == "declared-rejected":
        raise DivergentSum("the orbit sum of B' does not converge on the scanned range")
    p = system.p
    ns = sorted(terms)
    total = fsum(list(terms.values()) + [tail.tail_sum(horizon)])
    # truncate once the remaining norm is negligible
    K = ns[-1] if ns else k
    run = []
    for idx, n in enumerate(ns):
        run.append(terms[n])
        rest = fsum([terms[m] for m in ns[idx + 1:]] + [tail.tail_sum(horizon)])
        if rest ** (1.0 / p) < TRUNCATION_RTOL * fsum(run) ** (1.0 / p):
            K = n
            break
    y: Dict[int, float] = {}
    for n in ns:
        if n > K:
            break
        for b in B:
            x = system.forward(b, n)
            y[x] = y.get(x, 0.0) + exp_log(-system.log_weight_product(b, n))
    phi = SparseVector(y)
    lb = fsum(system.mass(b) for b in B) ** (1.0 / p)
    checked = {}
    cur = phi
    top = min(K, check_max)
    for n in range(1, top + 1):
        cur = apply_operator(system, cur)
        if n >= k and D.contains(n):
            checked[n] = norm(system, cur)
    holds = all(v >= lb * (1.0 - 1e-12) for v in checked.values())
    return DDCVectorPlan(phi, k, total ** (1.0 / p), terms, tail, source, K, lb, checked, holds)


# --------------------------------------------------------------------------
# finite-horizon irregularity diagnostics


@dataclass
class IrregularityReport:
    horizon: int
    eps: float
    M: float
    norm_liminf: float
    norm_limsup: float
    cesaro_liminf: float
    cesaro_limsup: float
    small_upper_density: float
    large_upper_density: float
    small_lower_density: float
    large_lower_density: float
    consistent_with: List[str]

    def to_json(self) -> dict:
        return dict(self.__dict__)


def irregularity_report(series: OrbitSeries, eps: float = 1e-6, M: float = 1e6,
                        density_level: float = 0.5) -> IrregularityReport:
    """Tail-half statistics; labels say only what the finite data is consistent with."""
    h = series.n_max
    start = h // 2
    tail = np.asarray(series.norms[start:]) if h else np.zeros(0)
    ctail = np.asarray(series.cesaro[start:]) if h else np.zeros(0)
    norms = np.asarray(series.norms)
    small = norms < eps
    large = norms > M
    lo, hi = (float(tail.min()), float(tail.max())) if len(tail) else (0.0, 0.0)
    clo, chi = (float(ctail.min()), float(ctail.max())) if len(ctail) else (0.0, 0.0)
    su, lu = upper_density_stat(small), upper_density_stat(large)
    labels = []
    if lo < eps and hi > eps:
        labels.append("semi-irregular")
    if lo < eps and hi > M:
        labels.append("irregular")
    if su >= density_level and lu >= density_level:
        labels.append("distributionally-irregular")
    if clo < eps and chi > M:
        labels.append("absolutely-mean-irregular")
    if chi > M:
        labels.append("cesaro-unbounded")
    return IrregularityReport(h, eps, M, lo, hi, clo, chi, su, lu, lower_density_stat(small),
                              lower_density_stat(large), labels)
