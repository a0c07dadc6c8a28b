"""Verdicts for boundedness and chaos properties, with replayable certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .density import IndexSet, index_set_from_json, positive_upper_density
from .errors import (
    DomainMismatch,
    EmptyFamily,
    MalformedCertificate,
    NoDissipativePart,
    NonInjectiveMap,
    NonpositiveWeight,
    ZeroWeightBilateral,
)
from .norms import (
    _plain,
    cesaro_closed_form,
    iterate_norm,
    np_cesaro,
    per_index_cesaro,
    power_bound_closed_form,
)
from .numerics import exp_log, exp_logs, fsum
from .orbit import (
    SetFamily,
    TailBound,
    construct_ddc_vector,
    dc_terms,
    ddc_terms,
    resolve_tail,
)
from .system import (
    AtomicSystem,
    ExplicitSystem,
    ShiftSystem,
    SUP,
    Space,
    build_shift_system,
    hopf_decompose,
    mu_n_preimage,
    sup_weight_on_preimage,
)
from .weights import (
    Domain,
    Growth,
    RatioPower,
    WeightSpec,
    backward_limits,
    liminf_backward_products,
)

VANISH_TOL = 1e-12
WITNESS_CELLS = 1000


class Property(str, Enum):
    POWER_BOUNDED = "PowerBounded"
    LI_YORKE = "LiYorke"
    DISTRIBUTIONAL_CHAOS = "DistributionalChaos"
    DENSE_DISTRIBUTIONAL_CHAOS = "DenselyDistributionalChaos"
    ABSOLUTELY_CESARO_BOUNDED = "AbsolutelyCesaroBounded"
    MEAN_LI_YORKE = "MeanLiYorke"


class Status(str, Enum):
    EXACT = "ExactByClosedForm"
    CERTIFIED = "CertifiedByTheorem"
    SUPPORTED = "SupportedAtHorizon"
    REFUTED = "RefutedAtHorizon"
    INCONCLUSIVE = "Inconclusive"


# statuses ordered from strongest to weakest evidence
_STRENGTH = [Status.EXACT, Status.CERTIFIED, Status.SUPPORTED, Status.REFUTED, Status.INCONCLUSIVE]


def weakest(*statuses: Status) -> Status:
    return max(statuses, key=_STRENGTH.index)


@dataclass
class Verdict:
    property: Property
    status: Status
    holds: Optional[bool]
    horizon: int
    witnesses: List[Any] = field(default_factory=list)
    certificate: Dict[str, Any] = field(default_factory=dict)
    theorem_tag: str = ""
    parameter: Optional[float] = None

    @property
    def outcome(self) -> str:
        if self.holds is None:
            return "undecided"
        return "holds" if self.holds else "refuted"

    def matches(self, expect: str) -> bool:
        e = expect.strip()
        return e == self.status.value or e.lower() == self.outcome

    def to_json(self) -> dict:
        return {
            "property": self.property.value,
            "parameter": self.parameter,
            "status": self.status.value,
            "holds": self.holds,
            "outcome": self.outcome,
            "horizon": self.horizon,
            "witnesses": self.witnesses,
            "certificate": self.certificate,
            "theorem_tag": self.theorem_tag,
        }


def _as_system(obj: Union[AtomicSystem, WeightSpec], space: Optional[Space] = None) -> AtomicSystem:
    if isinstance(obj, WeightSpec):
        return build_shift_system(obj, space)
    return obj


def _single_spec(system: AtomicSystem) -> Optional[WeightSpec]:
    if isinstance(system, ShiftSystem) and system.stride == 1:
        return system.spec
    return None


def _has_zero_weight(system: AtomicSystem) -> Optional[bool]:
    if isinstance(system, ShiftSystem):
        flags = [c.generator.has_zero() for c in system.chains]
        if any(f is True for f in flags):
            return True
        return None if any(f is None for f in flags) else False
    if isinstance(system, ExplicitSystem):
        if any(system.weight(x) == 0.0 for x in system.atoms):
            return True
        if system.tail is not None:
            return system.tail.spec.generator.has_zero()
        return False
    return None


# --------------------------------------------------------------------------
# power-boundedness and Li-Yorke


def classify_power_bounded(system: AtomicSystem, horizon: int = 1000, bound: Optional[float] = None,
                           index_range: Optional[Tuple[int, int]] = None) -> Verdict:
    """sup_n ||T^n|| < inf, decided in closed form when possible."""
    args = {"horizon": horizon, "bound": bound, "index_range": index_range}
    cert = {"check": "power_bounded", "args": args}
    tag = "iterate-norm characterization of power-boundedness"
    if bound is not None:
        for n in range(1, horizon + 1):
            info = iterate_norm(system, n, index_range)
            if info.value > bound:
                wit = {"n": n, "norm": info.value, "atom": info.witness, "bound": bound}
                return Verdict(Property.POWER_BOUNDED, Status.REFUTED, False, horizon, [wit], cert, tag)
    cf = power_bound_closed_form(system)
    if cf is not None:
        cert.update({"closed_form": cf.source, "bound_value": cf.bound})
        wits = [] if cf.holds else _growth_witness(system, index_range)
        return Verdict(Property.POWER_BOUNDED, Status.EXACT, cf.holds, horizon, wits, cert, tag)
    norms = [iterate_norm(system, n, index_range).value for n in range(1, horizon + 1)]
    half = max(1, horizon // 2)
    first, overall = max(norms[:half]), max(norms)
    cert.update({"observed_sup": overall, "first_half_sup": first})
    k = int(np.argmax(norms))
    wit = {"n": k + 1, "norm": norms[k]}
    if not math.isfinite(overall):
        return Verdict(Property.POWER_BOUNDED, Status.SUPPORTED, False, horizon, [wit], cert, tag)
    if overall <= first * (1.0 + 1e-9):
        return Verdict(Property.POWER_BOUNDED, Status.SUPPORTED, True, horizon, [wit], cert, tag)
    return Verdict(Property.POWER_BOUNDED, Status.INCONCLUSIVE, None, horizon, [wit], cert, tag)


def _growth_witness(system: AtomicSystem, index_range) -> List[dict]:
    out = []
    for n in (1, 2, 4, 8, 16, 32):
        info = iterate_norm(system, n, index_range)
        out.append({"n": n, "norm": info.value, "atom": info.witness})
    return out


def classify_li_yorke(target: Union[AtomicSystem, WeightSpec], space: Optional[Space] = None,
                      horizon: int = 1000) -> Verdict:
    """Shift Li-Yorke dichotomy: failure of power-boundedness plus, on Z, vanishing backward products."""
    system = _as_system(target, space)
    spec = _single_spec(system)
    if spec is None:
        raise DomainMismatch("the Li-Yorke dichotomy is evaluated on single-chain shifts")
    cert = {"check": "li_yorke", "args": {"horizon": horizon}}
    pb = classify_power_bounded(system, horizon)
    cert["power_bounded"] = {"status": pb.status.value, "holds": pb.holds}
    if spec.unilateral:
        tag = "unilateral shift Li-Yorke iff not power-bounded"
        holds = None if pb.holds is None else not pb.holds
        return Verdict(Property.LI_YORKE, pb.status, holds, horizon, pb.witnesses, cert, tag)
    tag = "bilateral shift Li-Yorke iff not power-bounded and backward products have liminf 0"
    if spec.generator.has_zero() is not False:
        raise ZeroWeightBilateral("bilateral Li-Yorke criterion needs nonzero weights")
    if pb.holds is True:
        return Verdict(Property.LI_YORKE, pb.status, False, horizon, pb.witnesses, cert, tag)
    bl = liminf_backward_products(spec, horizon)
    cert["backward"] = {"exact_limit": bl.exact_limit, "running_min_tail": bl.running_min_tail}
    wits = list(pb.witnesses) + [{"backward_liminf": bl.exact_limit, "running_min_tail": bl.running_min_tail}]
    if bl.exact_limit is not None:
        vanish = bl.exact_limit == 0.0
        if pb.holds is None:
            if not vanish:
                return Verdict(Property.LI_YORKE, Status.EXACT, False, horizon, wits, cert, tag)
            return Verdict(Property.LI_YORKE, pb.status, None, horizon, wits, cert, tag)
        st = pb.status if pb.status in (Status.EXACT, Status.CERTIFIED) else pb.status
        return Verdict(Property.LI_YORKE, st, vanish, horizon, wits, cert, tag)
    vanish = bl.running_min_tail < VANISH_TOL
    holds = vanish and pb.holds is False
    return Verdict(Property.LI_YORKE, Status.SUPPORTED, holds, horizon, wits, cert, tag)


@dataclass
class SubspaceReport:
    mode: str
    horizon: int
    members: List[dict]
    restricted_sup: float
    qualifying_sup: Optional[float]
    bound: Optional[float]
    exceeds_bound: Optional[bool]
    witness: Optional[dict]

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _set_measures(system: AtomicSystem, B: Sequence[int], horizon: int) -> List[float]:
    """mu_n(f^{-n}(B)) (or the sup of |w^(n)| on f^{-n}(B)) for n = 1..horizon."""
    if system.space.is_sup:
        return [sup_weight_on_preimage(system, B, n) for n in range(1, horizon + 1)]
    return [mu_n_preimage(system, B, n) for n in range(1, horizon + 1)]


def subspace_boundedness_check(system: AtomicSystem, family: Sequence[Sequence[int]], mode: str = "power",
                               exponent: Optional[float] = None, horizon: int = 1000,
                               bound: Optional[float] = None) -> SubspaceReport:
    """Membership gate and restricted orbit sups on a finite family of indicator sets.

    Only a finite sub-family is ever examined, so this never decides the
    property on the full subspace the sets generate.
    """
    if not family or any(len(B) == 0 for B in family):
        raise EmptyFamily("the family and each of its sets must be nonempty")
    if mode not in ("power", "cesaro"):
        raise ValueError("mode is 'power' or 'cesaro'")
    sup_space = system.space.is_sup
    p = 1.0 if sup_space else system.p
    e = p if exponent is None else float(exponent)
    members, best, qbest, wit = [], 0.0, None, None
    for idx, B in enumerate(family):
        B = sorted(set(int(x) for x in B))
        meas = _set_measures(system, B, horizon)
        tail = meas[horizon // 2:] or meas
        stat = min(tail)
        qualifies = stat <= VANISH_TOL
        muB = 1.0 if sup_space else fsum(system.mass(x) for x in B)
        norms = [m if sup_space else (m / muB) ** (1.0 / p) for m in meas]
        if mode == "power":
            k = int(np.argmax(norms))
            val, at = norms[k], k + 1
        else:
            run, val, at = [], 0.0, 1
            for N, v in enumerate(norms, start=1):
                run.append(v ** e)
                m = fsum(run) / N
                if m > val:
                    val, at = m, N
        members.append({"set": B, "liminf_stat": stat, "qualifies": qualifies, "sup": val, "at": at})
        if val > best or wit is None:
            best, wit = val, {"set_index": idx, "n": at, "value": val}
        if qualifies:
            qbest = val if qbest is None else max(qbest, val)
    exceeds = None if bound is None else best > bound
    label = mode if mode == "power" else f"cesaro({e:g})"
    return SubspaceReport(label, horizon, members, best, qbest, bound, exceeds, wit)


# --------------------------------------------------------------------------
# distributional chaos certificates


@dataclass
class DCCertificate:
    """Inputs for the finite checks of the weighted-ratio counting criterion.

    ``combos[t]`` lists (family index, coefficient b) pairs for level ``ks[t]``
    and window length ``N[t]``.
    """

    family: List[Tuple[int, ...]]
    D: IndexSet
    epsilon: Fraction
    ks: List[int]
    N: List[int]
    combos: List[List[Tuple[int, float]]]
    schedule: Optional[List[int]] = None  # n_k for generated certificates

    def validate(self):
        if not self.family or any(len(B) == 0 for B in self.family):
            raise MalformedCertificate("family sets must be nonempty")
        if not (0 < self.epsilon <= 1):
            raise MalformedCertificate("epsilon must lie in (0, 1]")
        if not (len(self.ks) == len(self.N) == len(self.combos)) or not self.ks:
            raise MalformedCertificate("ks, N and combos must have one entry per level")
        if any(b <= a for a, b in zip(self.N, self.N[1:])) or self.N[0] < 1:
            raise MalformedCertificate("N_k must be positive and strictly increasing")
        if any(k < 1 for k in self.ks):
            raise MalformedCertificate("levels k must be positive")
        for t, combo in enumerate(self.combos):
            if not combo:
                raise MalformedCertificate(f"level {self.ks[t]} has no coefficients")
            for i, b in combo:
                if not (0 <= i < len(self.family)):
                    raise MalformedCertificate(f"family index {i} out of range")
                if not (b > 0 and math.isfinite(b)):
                    raise MalformedCertificate("coefficients b_j must be positive")

    @classmethod
    def bayart(cls, ks: Sequence[int] = (3, 4, 5), epsilon: Fraction = Fraction(1, 3)) -> "DCCertificate":
        """Singletons {i}, n_k = k^k + 1, N_k = k n_k, b_j = 1/i_j with i_j = n_k + j."""
        family, where, combos, Ns, sched = [], {}, [], [], []
        for k in ks:
            nk = k ** k + 1
            sched.append(nk)
            Ns.append(k * nk)
            combo = []
            for j in range(1, (k - 1) * nk + 1):
                i = nk + j
                if i not in where:
                    where[i] = len(family)
                    family.append((i,))
                combo.append((where[i], 1.0 / i))
            combos.append(combo)
        return cls(family, IndexSet.naturals(), Fraction(epsilon), list(ks), Ns, combos, sched)

    def to_json(self) -> dict:
        return {
            "family": [list(B) for B in self.family],
            "D": self.D.to_json(),
            "epsilon": str(self.epsilon),
            "ks": list(self.ks),
            "N": list(self.N),
            "combos": [[[i, b] for i, b in combo] for combo in self.combos],
            "schedule": self.schedule,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DCCertificate":
        try:
            eps = Fraction(str(doc["epsilon"]))
            cert = cls(
                [tuple(int(x) for x in B) for B in doc["family"]],
                index_set_from_json(doc.get("D", {"kind": "naturals"}), "/D"),
                eps,
                [int(k) for k in doc["ks"]],
                [int(n) for n in doc["N"]],
                [[(int(i), float(b)) for i, b in combo] for combo in doc["combos"]],
                doc.get("schedule"),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise MalformedCertificate(f"unreadable certificate: {exc}") from exc
        cert.validate()
        return cert


def _singleton_cells(system: AtomicSystem, family) -> Optional[np.ndarray]:
    spec = _single_spec(system)
    if spec is None or not spec.unilateral or any(len(B) != 1 for B in family):
        return None
    return np.array([B[0] for B in family], dtype=np.int64)


def weighted_ratio_counts(system: AtomicSystem, cert: DCCertificate) -> List[dict]:
    """Per level: exact count of n <= N_k with weighted ratio > k, plus margins."""
    p = 1.0 if system.space.is_sup else system.p
    cells = _singleton_cells(system, cert.family)
    out = []
    for k, Nk, combo in zip(cert.ks, cert.N, cert.combos):
        idx = np.array([i for i, _ in combo], dtype=np.int64)
        b = np.array([bb for _, bb in combo])
        if cells is not None:
            ratios = _singleton_ratios(system, cells[idx], b, Nk, p, k)
        else:
            den = fsum(bb * fsum(system.mass(x) for x in cert.family[i]) for i, bb in combo)
            ratios = np.array([fsum(bb * mu_n_preimage(system, cert.family[i], n) for i, bb in combo) / den
                               for n in range(1, Nk + 1)])
        hit = ratios > k
        count = int(hit.sum())
        need = cert.epsilon * Nk
        out.append({
            "k": k,
            "N": Nk,
            "count": count,
            "required": str(need),
            "passes": Fraction(count) >= need,
            "margin": count - float(need),
            "min_ratio_on_hits": float(ratios[hit].min()) if count else None,
            "max_ratio": float(ratios.max()),
        })
    return out


def _singleton_ratios(system: ShiftSystem, cells: np.ndarray, b: np.ndarray, Nk: int, p: float,
                      k: float) -> np.ndarray:
    """sum_j b_j mu_n({i_j}) / sum_j b_j mu({i_j}) for n = 1..Nk via log prefix sums.

    Uses numpy's pairwise sum and re-sums with fsum whenever the ratio lands
    within 1e-9 of the threshold k, so the comparison with k is decided on a
    correctly rounded numerator.
    """
    spec = system.spec
    top = int(cells.max())
    ks = np.arange(1, top + 1, dtype=np.int64)
    L = np.zeros(top + 1)
    L[1:] = spec.log_windows(np.ones(top, dtype=np.int64), ks)
    logm = system.masses.log_mass(np.arange(0, top + 1))
    den = fsum(b * exp_logs(logm[cells]))
    order = np.argsort(cells)
    cells, b = cells[order], b[order]
    out = np.empty(Nk)
    for n in range(1, Nk + 1):
        j0 = int(np.searchsorted(cells, n, side="right"))
        c = cells[j0:]
        if not c.size:
            out[n - 1] = 0.0
            continue
        # mu_n({i}) = mass(i - n) |w_{i-n} ... w_{i-1}|^p
        terms = b[j0:] * exp_logs(logm[c - n] + p * (L[c - 1] - L[c - n - 1]))
        r = float(terms.sum()) / den
        if abs(r - k) <= 1e-9 * k:
            r = fsum(terms) / den
        out[n - 1] = r
    return out


def _vanishing_check(system: AtomicSystem, sets: Sequence[Sequence[int]], horizon: int) -> Tuple[Optional[bool], float]:
    """(exact verdict or None, tail-half max over n of the set measures)."""
    spec = _single_spec(system)
    worst = 0.0
    exact: Optional[bool] = None
    if isinstance(system, ShiftSystem) and system.unilateral:
        # finite sets on N have empty n-step preimages once n exceeds their cells
        exact = True
    elif spec is not None and not spec.unilateral:
        lim = backward_limits(spec, 0)
        if lim is not None:
            exact = lim.limsup == 0.0
    elif isinstance(system, ExplicitSystem) and system.is_finite:
        exact = all(len(system.preimage_n(B, len(system.atoms) + 1)) == 0 for B in sets)
    if exact is None:
        for B in sets[:64]:
            meas = _set_measures(system, B, horizon)
            worst = max(worst, max(meas[horizon // 2:] or [0.0]))
    return exact, worst


def dc_certificate_check(system: AtomicSystem, cert: DCCertificate, horizon: Optional[int] = None) -> Verdict:
    cert.validate()
    horizon = max(cert.N) if horizon is None else horizon
    tag = "countable-family counting criterion for distributional chaos"
    dens_pos, dens_exact, dens = positive_upper_density(cert.D)
    a_exact, a_tail = _vanishing_check(system, cert.family, min(horizon, 4096))
    counts = weighted_ratio_counts(system, cert)
    all_b = all(c["passes"] for c in counts)
    payload = {
        "check": "dc_certificate",
        "args": {"horizon": horizon},
        "inputs": cert.to_json(),
        "condition_a": {"exact": a_exact, "tail_max": a_tail, "D_upper_density": dens, "D_exact": dens_exact},
        "condition_b": counts,
    }
    wits = [{"k": c["k"], "count": c["count"], "N": c["N"]} for c in counts]
    d_full = dens_exact and dens >= 1.0
    if all_b and a_exact is True and d_full:
        return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.CERTIFIED, True, horizon, wits, payload, tag)
    if all_b and (a_exact is None and a_tail <= VANISH_TOL) and dens >= 1.0:
        return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.SUPPORTED, True, horizon, wits, payload, tag)
    return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.INCONCLUSIVE, None, horizon, wits, payload, tag)


def dc_density_criterion(target: Union[AtomicSystem, WeightSpec], space: Optional[Space] = None,
                         k_max: int = 16, N_max: int = 1000) -> Verdict:
    """inf_k sup_N (1/N) card{n <= N : sup_i |w_i ... w_{i+n-1}| > k} on c0 shifts."""
    system = _as_system(target, space if space is not None else SUP if isinstance(target, WeightSpec) else None)
    spec = _single_spec(system)
    if spec is None:
        raise DomainMismatch("the density criterion is stated for single-chain shifts")
    if not system.space.is_sup:
        raise DomainMismatch("the density criterion is stated for the sup norm")
    tag = "c0 shift density criterion for distributional chaos"
    cert: Dict[str, Any] = {"check": "dc_density", "args": {"k_max": k_max, "N_max": N_max}}
    if not spec.unilateral:
        lim = backward_limits(spec, 0)
        cert["backward_limsup"] = None if lim is None else lim.limsup
        if lim is None:
            bl = liminf_backward_products(spec, N_max)
            cert["backward_tail_min"] = bl.running_min_tail
            return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.INCONCLUSIVE, None, N_max, [], cert, tag)
        if lim.limsup != 0.0:
            cert["precondition"] = "backward products do not vanish"
            return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.INCONCLUSIVE, None, N_max, [], cert, tag)
    sups = np.array([iterate_norm(system, n).value for n in range(1, N_max + 1)])
    ns = np.arange(1, N_max + 1)
    per_k = []
    for k in range(1, k_max + 1):
        counts = np.cumsum(sups > k)
        per_k.append(float((counts / ns).max()))
    stat = min(per_k)
    cert.update({"per_k": per_k, "statistic": stat})
    growth = _plain(spec.generator).growth(spec.domain)
    wits = [{"k": k + 1, "sup_density": v} for k, v in enumerate(per_k)]
    if growth is Growth.DIVERGENT:
        # window sups tend to infinity, so every level set is cofinite
        cert["closed_form"] = "window sups diverge: statistic 1"
        return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.EXACT, True, N_max, wits, cert, tag)
    if growth is Growth.BOUNDED:
        cf = power_bound_closed_form(system)
        cert["closed_form"] = "window sups bounded: statistic 0"
        if cf is not None and cf.bound is not None:
            cert["sup_bound"] = cf.bound
        return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.EXACT, False, N_max, wits, cert, tag)
    return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.SUPPORTED, stat > 0.0, N_max, wits, cert, tag)


def _family_from(arg) -> SetFamily:
    if isinstance(arg, SetFamily):
        return arg
    return SetFamily.fixed(arg)


def dcsum_test(system: AtomicSystem, family, D: IndexSet, E: IndexSet, tail_bound: Optional[TailBound] = None,
               horizon: int = 200) -> Verdict:
    """Vanishing along D plus summability of the normalised coefficients along E."""
    if _has_zero_weight(system):
        raise NonpositiveWeight("the summability criterion needs positive weights")
    fam = _family_from(family)
    tag = ("c0 summable-coefficient criterion" if system.space.is_sup
           else "summable-coefficient criterion for distributional chaos")
    e_pos, e_exact, e_stat = positive_upper_density(E)
    d_pos, d_exact, d_stat = positive_upper_density(D)
    sample = [fam.sets(n) for n in E.members(min(horizon, 64))]
    a_exact, a_tail = _vanishing_check(system, sample, horizon)
    terms = dc_terms(system, fam, E, horizon)
    power = 1.0 if system.space.is_sup else 1.0 / system.p
    finite = all(math.isfinite(t) for t in terms.values())
    tail, source = resolve_tail(system, fam, terms, tail_bound, power) if finite else (None, "none")
    partial = fsum(terms.values()) if finite else math.inf
    payload = {
        "check": "dcsum",
        "args": {"horizon": horizon, "family": fam.to_json(), "D": D.to_json(), "E": E.to_json(),
                 "tail_bound": None if tail_bound is None else tail_bound.to_json()},
        "condition_a": {"exact": a_exact, "tail_max": a_tail, "D_upper_density": d_stat},
        "E_upper_density": e_stat,
        "partial_sum": partial,
        "tail": None if tail is None else tail.to_json(),
        "tail_source": source,
        "bound": None if tail is None else partial + tail.tail_sum(horizon),
    }
    wits = [{"partial_sum": partial, "terms": len(terms)}]
    d_full = d_stat >= 1.0
    if not finite or tail is None or not e_pos:
        return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.INCONCLUSIVE, None, horizon, wits, payload, tag)
    certified = source in ("declared", "builtin") and a_exact is True and e_exact and d_exact and d_full
    if certified:
        return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.CERTIFIED, True, horizon, wits, payload, tag)
    if a_exact is False:
        return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.INCONCLUSIVE, None, horizon, wits, payload, tag)
    return Verdict(Property.DISTRIBUTIONAL_CHAOS, Status.SUPPORTED, True, horizon, wits, payload, tag)


def _condition_a_ddc(system: AtomicSystem, horizon: int) -> Tuple[Optional[bool], str]:
    """Every finite-measure set is approximated by sets whose n-step measures vanish."""
    spec = _single_spec(system)
    if isinstance(system, ShiftSystem) and system.unilateral:
        return True, "finite sets on N have empty preimages eventually"
    if spec is not None:
        lim = backward_limits(spec, 0)
        if lim is None:
            return None, "backward limits unavailable"
        return lim.limsup == 0.0, "backward products at 0 tend to 0" if lim.limsup == 0.0 else "backward products do not vanish"
    if isinstance(system, ExplicitSystem) and system.is_finite:
        p = system.p
        for x in system.atoms:
            meas = mu_n_preimage(system, [x], len(system.atoms) * 4 + horizon)
            if meas > VANISH_TOL:
                return False, f"atom {x} keeps n-step mass {meas:.3g}"
        return True, "n-step measures of atoms vanish"
    return None, "not decidable for this system"


def dissipative_ddc_test(system: AtomicSystem, horizon: int = 1000, B: Optional[Sequence[int]] = None,
                         D: Optional[IndexSet] = None, tail_bound: Optional[TailBound] = None,
                         scan: int = 200) -> Verdict:
    """Dense distributional chaos from a wandering set of the dissipative part."""
    if not system.injective:
        raise NonInjectiveMap("the wandering-set construction needs an injective map")
    part = hopf_decompose(system, horizon)
    if part.dissipative.is_empty():
        raise NoDissipativePart("the map is conservative")
    D = IndexSet.naturals() if D is None else D
    Bp = sorted(part.wandering_generator.members) if B is None else sorted(set(int(b) for b in B))
    tag = "dissipative wandering-set criterion for dense distributional chaos"
    a_ok, a_note = _condition_a_ddc(system, horizon)
    d_pos, d_exact, d_stat = positive_upper_density(D)
    terms = ddc_terms(system, Bp, D, 1, scan)
    tail, source = resolve_tail(system, SetFamily.translated(Bp, 1), terms, tail_bound, 1.0)
    partial = fsum(terms.values())
    payload = {
        "check": "dissipative_ddc",
        "args": {"horizon": horizon, "B": Bp, "D": D.to_json(), "scan": scan,
                 "tail_bound": None if tail_bound is None else tail_bound.to_json()},
        "partition": part.to_json(),
        "condition_a": {"holds": a_ok, "note": a_note},
        "D_upper_density": d_stat,
        "partial_sum": partial,
        "tail": None if tail is None else tail.to_json(),
        "tail_source": source,
        "bound": None if tail is None else partial + tail.tail_sum(scan),
    }
    wits: List[Any] = [{"B": Bp, "partial_sum": partial}]
    if tail is None or not d_pos or a_ok is False:
        return Verdict(Property.DENSE_DISTRIBUTIONAL_CHAOS, Status.INCONCLUSIVE, None, horizon, wits, payload, tag)
    plan = construct_ddc_vector(system, Bp, D, 1, scan, tail if source == "declared" else None)
    payload["lower_bound_holds"] = plan.lower_bound_holds
    if source in ("declared", "builtin") and a_ok is True and d_exact and plan.lower_bound_holds:
        return Verdict(Property.DENSE_DISTRIBUTIONAL_CHAOS, Status.CERTIFIED, True, horizon, wits, payload, tag)
    return Verdict(Property.DENSE_DISTRIBUTIONAL_CHAOS, Status.SUPPORTED, True, horizon, wits, payload, tag)


# --------------------------------------------------------------------------
# absolute Cesaro boundedness and mean Li-Yorke


def _default_range(system: AtomicSystem, index_count: int) -> Optional[Tuple[int, int]]:
    spec = _single_spec(system)
    if spec is None or not isinstance(_plain(spec.generator), RatioPower):
        return None
    return 1, index_count


def classify_acb(system: AtomicSystem, exponent: Optional[float] = None, horizon: int = 1000,
                 index_range: Optional[Tuple[int, int]] = None, bound: Optional[float] = None,
                 harmonic_index: int = 10_000, index_count: int = 10_000) -> Verdict:
    """exponent-absolute Cesaro boundedness: sup_N (1/N) sum ||T^n y||^e <= C ||y||^e."""
    e = (1.0 if system.space.is_sup else system.p) if exponent is None else float(exponent)
    tag = "absolute Cesaro boundedness via normalised-atom Cesaro means"
    rng = index_range if index_range is not None else _default_range(system, index_count)
    cert: Dict[str, Any] = {"check": "acb", "args": {"exponent": e, "horizon": horizon,
                                                     "index_range": rng, "bound": bound}}
    cf = cesaro_closed_form(system, e)
    if cf is not None and rng is None and isinstance(system, ShiftSystem):
        # the closed form decides; the scan only supplies a witness
        rng = (1, WITNESS_CELLS) if system.unilateral else (-WITNESS_CELLS // 2, WITNESS_CELLS // 2)
        cert["args"]["index_range"] = rng
    rep = np_cesaro(system, horizon, rng, e)
    wit = {"atom": rep.witness[0], "N": rep.witness[1], "value": rep.value}
    cert["observed"] = rep.value
    if bound is not None and rep.value > bound:
        cert["bound_violation"] = wit
        return Verdict(Property.ABSOLUTELY_CESARO_BOUNDED, Status.REFUTED, False, horizon, [wit], cert, tag, e)
    if cf is not None:
        cert.update({"closed_form": cf.source, "bound_value": cf.bound})
        if cf.holds:
            if cf.bound is not None and rep.value > cf.bound * (1.0 + 1e-12):
                raise AssertionError(f"scanned mean {rep.value} exceeds proven bound {cf.bound}")
            st = Status.EXACT if cf.source == "power-bounded" else Status.CERTIFIED
            return Verdict(Property.ABSOLUTELY_CESARO_BOUNDED, st, True, horizon, [wit], cert, tag, e)
        if cf.source == "harmonic-divergence":
            i = harmonic_index
            val = per_index_cesaro(system, i, i - 1, e)
            hw = {"atom": i, "N": i - 1, "value": val}
            cert["harmonic_witness"] = hw
            return Verdict(Property.ABSOLUTELY_CESARO_BOUNDED, Status.CERTIFIED, False, horizon, [hw, wit], cert,
                           tag, e)
        return Verdict(Property.ABSOLUTELY_CESARO_BOUNDED, Status.EXACT, False, horizon, [wit], cert, tag, e)
    if rep.witness[1] <= max(1, horizon // 2):
        return Verdict(Property.ABSOLUTELY_CESARO_BOUNDED, Status.SUPPORTED, True, horizon, [wit], cert, tag, e)
    return Verdict(Property.ABSOLUTELY_CESARO_BOUNDED, Status.INCONCLUSIVE, None, horizon, [wit], cert, tag, e)


def _backward_cesaro(spec: WeightSpec, horizon: int) -> Tuple[Optional[float], float]:
    """(exact liminf of (1/N) sum_{n<=N} |w_{-n} ... w_{-1}|, or None; tail-half min of the means)."""
    lim = backward_limits(spec, 0)
    exact = None
    if lim is not None and lim.cesaro is not None:
        exact = lim.cesaro
    ns = np.arange(1, horizon + 1, dtype=np.int64)
    logs = spec.log_windows(-ns, ns)
    vals = exp_logs(logs)
    means = np.cumsum(vals) / ns
    return exact, float(means[horizon // 2:].min())


@dataclass
class MeanLiYorkeFamilyReport:
    p: float
    eq1_stats: List[float]  # tail-half min of (1/N) sum mu_n^{1/p}
    nec_sup: float  # sup (1/N) sum mu_n / mu(B)
    suf_sup: float  # sup (1/N) sum mu_n^{1/p} / mu(B)
    gap: bool  # the necessary and sufficient statistics differ

    def to_json(self) -> dict:
        return dict(self.__dict__)


def mean_li_yorke_family_report(system: AtomicSystem, family: Sequence[Sequence[int]],
                                horizon: int = 1000) -> MeanLiYorkeFamilyReport:
    if not family or any(len(B) == 0 for B in family):
        raise EmptyFamily("the family and each of its sets must be nonempty")
    p = system.p
    eq1, nec, suf = [], 0.0, 0.0
    for B in family:
        meas = [mu_n_preimage(system, B, n) for n in range(1, horizon + 1)]
        muB = fsum(system.mass(x) for x in B)
        rp = np.cumsum([m ** (1.0 / p) for m in meas]) / np.arange(1, horizon + 1)
        r1 = np.cumsum(meas) / np.arange(1, horizon + 1)
        eq1.append(float(rp[horizon // 2:].min()))
        nec = max(nec, float(r1.max()) / muB)
        suf = max(suf, float(rp.max()) / muB)
    return MeanLiYorkeFamilyReport(p, eq1, nec, suf, p != 1.0 and nec != suf)


def classify_mean_li_yorke(target: Union[AtomicSystem, WeightSpec], space: Optional[Space] = None,
                           horizon: int = 1000, family: Optional[Sequence[Sequence[int]]] = None,
                           divergence_level: float = 1e6) -> Verdict:
    system = _as_system(target, space)
    spec = _single_spec(system)
    cert: Dict[str, Any] = {"check": "mean_li_yorke", "args": {"horizon": horizon, "family": family}}
    if spec is not None:
        if not spec.unilateral and spec.generator.has_zero() is not False:
            raise ZeroWeightBilateral("bilateral mean Li-Yorke criterion needs nonzero weights")
        acb = classify_acb(system, 1.0, horizon)
        cert["acb"] = {"status": acb.status.value, "holds": acb.holds, "observed": acb.certificate.get("observed")}
        if spec.unilateral:
            tag = "unilateral shift mean Li-Yorke iff not absolutely Cesaro bounded"
            holds = None if acb.holds is None else not acb.holds
            st = Status.CERTIFIED if acb.status in (Status.EXACT, Status.CERTIFIED) else acb.status
            return Verdict(Property.MEAN_LI_YORKE, st, holds, horizon, acb.witnesses, cert, tag)
        tag = "bilateral shift mean Li-Yorke iff not absolutely Cesaro bounded and backward Cesaro liminf 0"
        exact, tail_min = _backward_cesaro(spec, horizon)
        cert["backward_cesaro"] = {"exact": exact, "tail_min": tail_min}
        wits = list(acb.witnesses) + [{"backward_cesaro_limit": exact, "tail_min": tail_min}]
        if acb.holds is True:
            st = Status.CERTIFIED if acb.status in (Status.EXACT, Status.CERTIFIED) else acb.status
            return Verdict(Property.MEAN_LI_YORKE, st, False, horizon, wits, cert, tag)
        if exact is not None and acb.status in (Status.EXACT, Status.CERTIFIED):
            return Verdict(Property.MEAN_LI_YORKE, Status.CERTIFIED, exact == 0.0, horizon, wits, cert, tag)
        if exact is not None and exact != 0.0:
            return Verdict(Property.MEAN_LI_YORKE, Status.CERTIFIED, False, horizon, wits, cert, tag)
        holds = (tail_min < VANISH_TOL) if acb.holds is False else None
        return Verdict(Property.MEAN_LI_YORKE, Status.SUPPORTED if holds is not None else Status.INCONCLUSIVE,
                       holds, horizon, wits, cert, tag)
    tag = "family conditions for mean Li-Yorke chaos (necessary and sufficient forms)"
    if not family:
        return Verdict(Property.MEAN_LI_YORKE, Status.INCONCLUSIVE, None, horizon, [], cert, tag)
    rep = mean_li_yorke_family_report(system, family, horizon)
    cert["family_report"] = rep.to_json()
    eq1 = all(s < VANISH_TOL for s in rep.eq1_stats)
    if eq1 and rep.suf_sup > divergence_level:
        return Verdict(Property.MEAN_LI_YORKE, Status.SUPPORTED, True, horizon, [rep.to_json()], cert, tag)
    if not eq1 or rep.nec_sup <= divergence_level:
        # the necessary condition is not visible in this family
        return Verdict(Property.MEAN_LI_YORKE, Status.INCONCLUSIVE, None, horizon, [rep.to_json()], cert, tag)
    return Verdict(Property.MEAN_LI_YORKE, Status.INCONCLUSIVE, None, horizon, [rep.to_json()], cert, tag)


# --------------------------------------------------------------------------
# replay


def replay(system: AtomicSystem, verdict: Verdict) -> Verdict:
    """Re-run the check recorded in a verdict's certificate."""
    c = verdict.certificate
    kind, args = c.get("check"), c.get("args", {})
    if kind == "power_bounded":
        rng = args.get("index_range")
        return classify_power_bounded(system, args["horizon"], args.get("bound"), tuple(rng) if rng else None)
    if kind == "li_yorke":
        return classify_li_yorke(system, None, args["horizon"])
    if kind == "dc_certificate":
        return dc_certificate_check(system, DCCertificate.from_json(c["inputs"]), args["horizon"])
    if kind == "dc_density":
        return dc_density_criterion(system, None, args["k_max"], args["N_max"])
    if kind == "dcsum":
        fam = SetFamily(tuple(args["family"]["base"]), args["family"]["step"])
        tb = args.get("tail_bound")
        return dcsum_test(system, fam, index_set_from_json(args["D"]), index_set_from_json(args["E"]),
                          None if tb is None else TailBound(**tb), args["horizon"])
    if kind == "dissipative_ddc":
        tb = args.get("tail_bound")
        return dissipative_ddc_test(system, args["horizon"], args["B"], index_set_from_json(args["D"]),
                                    None if tb is None else TailBound(**tb), args["scan"])
    if kind == "acb":
        rng = args.get("index_range")
        return classify_acb(system, args["exponent"], args["horizon"], tuple(rng) if rng else None, args.get("bound"))
    if kind == "mean_li_yorke":
        return classify_mean_li_yorke(system, None, args["horizon"], args.get("family"))
    raise MalformedCertificate(f"unknown check {kind!r}")
