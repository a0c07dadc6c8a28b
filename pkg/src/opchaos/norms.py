"""Iterate norms, absolute Cesaro bounds and Cesaro-mean diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainMismatch, ExactUnavailable, IndexOutOfDomain
from .numerics import KahanVector, exp_log, exp_logs, fsum
from .system import AtomicSystem, ExplicitSystem, ShiftSystem
from .weights import (
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
    WeightSpec,
    sup_log_window,
)

DEFAULT_INDEX_COUNT = 100_000
DEFAULT_CESARO_N = 10_000
PREFIX_SPREAD_MAX = 4.0


@dataclass(frozen=True)
class NormInfo:
    """One iterate norm.  ``divergent`` marks an overflowed scan maximum."""

    value: float
    witness: Optional[int]
    exact: bool
    divergent: bool = False

    def __float__(self) -> float:
        return self.value


@dataclass
class NormSeries:
    n_max: int
    values: List[float]
    exact: bool
    witnesses: List[Optional[int]] = field(default_factory=list)
    divergent: bool = False


# --------------------------------------------------------------------------
# helpers for shift chains


def _plain(g):
    return g.as_table() if isinstance(g, StepFunction) else g


def _chain_sup_log(spec: WeightSpec, n: int, cells: Optional[Tuple[int, int]]) -> Tuple[float, Optional[int], bool]:
    """Largest log window of length n in one chain, closed form when possible."""
    if cells is None:
        try:
            return sup_log_window(spec, n, EXACT)
        except ExactUnavailable:
            cells = spec.default_extent(n)
    lo, hi = spec.valid_starts(n, *cells)
    if lo > hi:
        return -math.inf, None, False
    val, wit, _ = sup_log_window(spec, n, (lo, hi))
    return val, wit, False


def safe_log_windows(spec: WeightSpec, starts: np.ndarray, n: int) -> np.ndarray:
    """Log window products with -inf where the window is undefined."""
    starts = np.asarray(starts, dtype=np.int64)
    if len(starts) == 0:
        return np.zeros(0)
    lo, hi = spec.valid_starts(n, int(starts.min()), int(starts.max()))
    ok = (starts >= lo) & (starts <= hi)
    out = np.full(starts.shape, -np.inf)
    if np.any(ok):
        out[ok] = spec.log_windows(starts[ok], np.full(int(ok.sum()), n))
    return out


def _log_mass_step(system: ShiftSystem, n: int) -> float:
    """log of mass(cell c - n) / mass(cell c)."""
    return -n * math.log(system.masses.ratio)


# --------------------------------------------------------------------------
# iterate norms


def iterate_norm(system: AtomicSystem, n: int, index_range: Optional[Tuple[int, int]] = None) -> NormInfo:
    """||T^n||: per-atom sup of (mu_n(f^-n{x}) / mu{x})^(1/p) on Lp spaces,
    sup |w^(n)| on sup-norm spaces.

    ``index_range`` restricts the scan (cells for shifts, a count of tail atoms
    for explicit systems); by default closed forms are used when available.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(system, ShiftSystem):
        best, wit, exact = -math.inf, None, True
        for r, spec in enumerate(system.chains):
            val, w, ex = _chain_sup_log(spec, n, index_range)
            exact = exact and ex
            if w is not None and (wit is None or val > best or (val == best and system.atom(r, w) < wit)):
                best, wit = val, system.atom(r, w)
        if not system.space.is_sup:
            best = best + _log_mass_step(system, n) / system.p
        value = exp_log(best)
        return NormInfo(value, wit, exact, divergent=math.isinf(value) and not exact)
    if isinstance(system, ExplicitSystem):
        count = 0 if index_range is None else int(index_range[1])
        if system.tail is not None and index_range is None:
            count = 1000
        atoms = system.scan_atoms(count)
        if system.space.is_sup:
            best, wit = -math.inf, None
            for x in atoms:
                lw = system.log_weight_product(x, n)
                if wit is None or lw > best:
                    best, wit = lw, x
            value = exp_log(best)
        else:
            value, wit = 0.0, None
            for y in atoms:
                ratio = _mu_n_atom(system, y, n) / system.mass(y)
                if wit is None or ratio > value:
                    value, wit = ratio, y
            value = value ** (1.0 / system.p)
        exact = system.tail is None
        return NormInfo(value, wit, exact, divergent=math.isinf(value) and not exact)
    raise TypeError("unknown system type")


def _mu_n_atom(system: AtomicSystem, y: int, n: int) -> float:
    from .system import mu_n_preimage

    return mu_n_preimage(system, [y], n)


def norm_series(system: AtomicSystem, n_max: int, index_range: Optional[Tuple[int, int]] = None) -> NormSeries:
    infos = [iterate_norm(system, n, index_range) for n in range(1, n_max + 1)]
    return NormSeries(
        n_max,
        [i.value for i in infos],
        all(i.exact for i in infos),
        [i.witness for i in infos],
        any(i.divergent for i in infos),
    )


# --------------------------------------------------------------------------
# closed-form boundedness


@dataclass(frozen=True)
class ClosedForm:
    """Outcome of an analytic argument: ``holds`` plus an optional constant."""

    holds: bool
    bound: Optional[float]
    source: str


def _periodic_sup_products(g: Periodic) -> float:
    """sup_{n>=1} of the largest length-n window when the period product is <= 1."""
    L = g.period
    starts = np.arange(1, L + 1, dtype=np.int64)
    best = -math.inf
    for n in range(1, L + 1):
        best = max(best, float(g.log_windows(starts, np.full(L, n)).max()))
    return exp_log(best)


def _generator_power_bound(g, domain) -> Optional[ClosedForm]:
    g = _plain(g)
    growth = g.growth(domain)
    if growth is None:
        return None
    if growth is Growth.DIVERGENT:
        return ClosedForm(False, None, "window-products-unbounded")
    if isinstance(g, Constant):
        return ClosedForm(True, abs(g.value_), "constant-weights")
    if isinstance(g, Periodic):
        return ClosedForm(True, _periodic_sup_products(g), "periodic-weights")
    if isinstance(g, BlockConcat):
        return ClosedForm(True, math.e, "block-weights-log-prefix-in-[0,1]")
    return ClosedForm(True, None, "window-products-bounded")


def power_bound_closed_form(system: AtomicSystem) -> Optional[ClosedForm]:
    """Decide sup_n ||T^n|| < inf analytically, or return None."""
    if not isinstance(system, ShiftSystem):
        return None
    if not system.space.is_sup and not system.masses.uniform:
        return None
    parts = [_generator_power_bound(c.generator, c.domain) for c in system.chains]
    if any(p is not None and not p.holds for p in parts):
        return ClosedForm(False, None, "window-products-unbounded")
    if any(p is None for p in parts):
        return None
    bounds = [p.bound for p in parts]
    bound = None if any(b is None for b in bounds) else max(bounds)
    return ClosedForm(True, bound, parts[0].source)


def _ray_family(g) -> bool:
    """Families whose window products are periodic in the start index along each ray."""
    g = _plain(g)
    if isinstance(g, (Constant, Periodic)):
        return True
    if isinstance(g, Table):
        return g.frontier is not Frontier.ERROR
    if isinstance(g, PiecewiseBilateral):
        return _ray_family(g.neg) and _ray_family(g.pos)
    return False


def cesaro_closed_form(system: AtomicSystem, exponent: float) -> Optional[ClosedForm]:
    """Decide exponent-absolute Cesaro boundedness analytically, or return None."""
    if not isinstance(system, ShiftSystem):
        return None
    if not system.space.is_sup and not system.masses.uniform:
        return None
    pb = power_bound_closed_form(system)
    if pb is not None and pb.holds:
        # ||T^n y|| <= C ||y|| forces every Cesaro mean below C^exponent
        bound = None if pb.bound is None else max(pb.bound, 0.0) ** exponent
        return ClosedForm(True, bound, "power-bounded")
    gens = [_plain(c.generator) for c in system.chains]
    if all(isinstance(g, RatioPower) for g in gens):
        q = min(g.q for g in gens)
        if system.space.is_sup:
            return ClosedForm(False, None, "sup-products-(n+1)^(1/q)")
        if exponent >= q:
            return ClosedForm(False, None, "harmonic-divergence")
        ps = system.p
        if ps < q and exponent <= ps:
            base = 2.0 / (1.0 - ps / q)
            return ClosedForm(True, base ** (exponent / ps), "ratio-power-bound")
        return None
    if pb is not None and not pb.holds and all(_ray_family(g) for g in gens):
        # along a ray the products grow geometrically, so some index sees the
        # growth for every n <= N
        return ClosedForm(False, None, "geometric-growth-along-a-ray")
    return None


# --------------------------------------------------------------------------
# Cesaro bounds


@dataclass
class CesaroBoundReport:
    p: float
    horizon_N: int
    index_range: Optional[Tuple[int, int]]
    value: float
    witness: Tuple[Optional[int], int]
    exact_bound: Optional[float] = None
    bound_source: Optional[str] = None
    formula_exact: bool = True
    per_index_curve: Optional[List[float]] = None

    @property
    def exact(self) -> bool:
        return self.exact_bound is not None


def _term_logs_shift(system: ShiftSystem, spec: WeightSpec, cells: np.ndarray, n: int, exponent: float) -> np.ndarray:
    """log ||T^n phi_x||^exponent for the normalised atoms at ``cells``."""
    starts = cells - n
    logs = np.full(cells.shape, -np.inf)
    ok = starts >= 1 if spec.unilateral else np.ones(cells.shape, dtype=bool)
    if np.any(ok):
        logs[ok] = safe_log_windows(spec, starts[ok], n)
    if system.space.is_sup:
        return exponent * logs
    return exponent * (logs + _log_mass_step(system, n) / system.p)


def _default_cells(system: ShiftSystem, spec: WeightSpec, N: int) -> Tuple[int, int]:
    g = _plain(spec.generator)
    if isinstance(g, (Table, BlockConcat)):
        lo, hi = spec.default_extent(N)
        return (max(lo, 1) if spec.unilateral else lo), hi + N + 1
    if spec.unilateral:
        return 1, DEFAULT_INDEX_COUNT
    return -DEFAULT_INDEX_COUNT // 2, DEFAULT_INDEX_COUNT // 2


def per_index_cesaro_matrix(system: ShiftSystem, N: int, cells: Sequence[int], exponent: Optional[float] = None,
                            chain: int = 0) -> np.ndarray:
    """means[k, N'-1] = (1/N') sum_{n<=N'} ||T^n phi_{x_k}||^exponent for each scanned cell."""
    e = system.p if exponent is None else exponent
    spec = system.chains[chain]
    cells = np.asarray(cells, dtype=np.int64)
    acc = KahanVector(len(cells))
    out = np.empty((len(cells), N))
    for n in range(1, N + 1):
        total = acc.add(exp_logs(_term_logs_shift(system, spec, cells, n, e)))
        out[:, n - 1] = total / n
    return out


def jensen_excess(system: ShiftSystem, N: int, cells: Sequence[int], q: float, p: float) -> float:
    """max over scanned (cell, N') of mean_q - mean_p^(q/p); nonpositive for q <= p."""
    if q > p:
        raise ValueError("the comparison needs q <= p")
    mq = per_index_cesaro_matrix(system, N, cells, q)
    mp = per_index_cesaro_matrix(system, N, cells, p)
    return float((mq - mp ** (q / p)).max())


def per_index_cesaro(system: AtomicSystem, atom: int, N: int, exponent: Optional[float] = None) -> float:
    """(1/N) sum_{n=1}^{N} ||T^n phi_atom||^exponent with phi_atom the normalised indicator."""
    e = system.p if exponent is None else exponent
    return fsum(_atom_terms(system, atom, N, e)) / N


def _atom_terms(system: AtomicSystem, atom: int, N: int, e: float) -> List[float]:
    if isinstance(system, ShiftSystem):
        r, c = system.split(atom)
        cells = np.array([c])
        return [float(exp_logs(_term_logs_shift(system, system.chains[r], cells, n, e))[0]) for n in range(1, N + 1)]
    if system.space.is_sup:
        # ||T^n chi_x|| = max |w^(n)| over f^{-n}{x}
        from .system import sup_weight_on_preimage

        return [sup_weight_on_preimage(system, [atom], n) ** e for n in range(1, N + 1)]
    p = system.p
    m0 = system.mass(atom)
    level = {atom: 1.0}  # preimage atom -> |w^(n)|^p
    out = []
    for _ in range(N):
        nxt = {}
        for x, v in level.items():
            for u in system.preimage(x):
                nxt[u] = system.weight(u) ** p * v
        level = nxt
        mu = fsum(system.mass(u) * v for u, v in level.items())
        out.append((mu / m0) ** (e / p))
    return out


def np_cesaro(system: AtomicSystem, horizon_N: int = DEFAULT_CESARO_N, index_range: Optional[Tuple[int, int]] = None,
              exponent: Optional[float] = None, curve: bool = False) -> CesaroBoundReport:
    """Scanned sup over (atom, N) of the normalised-atom Cesaro means.

    With ``exponent`` equal to the space exponent on Lp systems this is the
    exact value of N_p; other exponents give a lower bound.  Sup-norm systems
    use (1/N) sum_n ||w^(n)||^exponent.
    """
    e = system.p if exponent is None else float(exponent)
    if horizon_N < 1:
        raise ValueError("horizon_N must be positive")
    cf = cesaro_closed_form(system, e)
    bound = cf.bound if (cf is not None and cf.holds) else None
    source = cf.source if cf is not None else None
    if system.space.is_sup:
        terms = []
        for n in range(1, horizon_N + 1):
            info = iterate_norm(system, n, index_range)
            terms.append(info.value ** e)
        best, arg = -math.inf, 1
        partial = []
        for N in range(1, horizon_N + 1):
            partial.append(terms[N - 1])
            mean = fsum(partial) / N
            if mean > best:
                best, arg = mean, N
        return CesaroBoundReport(e, horizon_N, index_range, best, (None, arg), bound, source, True,
                                 None)
    formula_exact = e == system.p
    if isinstance(system, ShiftSystem):
        best, wit = -math.inf, (None, 1)
        used_range = index_range
        for r, spec in enumerate(system.chains):
            lo, hi = index_range if index_range is not None else _default_cells(system, spec, horizon_N)
            used_range = (lo, hi)
            if spec.unilateral:
                lo = max(lo, 1)
            for a in range(lo, hi + 1, 1 << 16):
                cells = np.arange(a, min(hi, a + (1 << 16) - 1) + 1, dtype=np.int64)
                acc = KahanVector(len(cells))
                for n in range(1, horizon_N + 1):
                    means = acc.add(exp_logs(_term_logs_shift(system, spec, cells, n, e))) / n
                    k = int(np.argmax(means))
                    if means[k] > best:
                        best, wit = float(means[k]), (system.atom(r, int(cells[k])), n)
        rep = CesaroBoundReport(e, horizon_N, used_range, best, wit, bound, source, formula_exact)
    else:
        count = 0 if index_range is None else int(index_range[1])
        if system.tail is not None and index_range is None:
            count = 200
        best, wit = -math.inf, (None, 1)
        for y in system.scan_atoms(count):
            terms = _atom_terms(system, y, horizon_N, e)
            run = []
            for N in range(1, horizon_N + 1):
                run.append(terms[N - 1])
                mean = fsum(run) / N
                if mean > best:
                    best, wit = mean, (y, N)
        rep = CesaroBoundReport(e, horizon_N, index_range, best, wit, bound, source, formula_exact)
    if curve and rep.witness[0] is not None:
        terms = _atom_terms(system, rep.witness[0], horizon_N, e)
        run, cur = [], []
        for t in terms:
            run.append(t)
            cur.append(fsum(run) / len(run))
        rep.per_index_curve = cur
    return rep


# --------------------------------------------------------------------------
# Cesaro means of one vector


@dataclass
class CesaroMeanSeries:
    N: int
    means: list  # SparseVector per n = 0..N
    norms: List[float]
    deltas: List[float]  # ||M_{n+1} - M_n|| for n = 0..N-1


def cesaro_mean_series(system: AtomicSystem, vector, N: int) -> CesaroMeanSeries:
    """M_n y = (1/(n+1)) sum_{k=0}^{n} T^k y for n = 0..N, with Cauchy deltas."""
    from .orbit import SparseVector, apply_operator, norm

    y = vector if isinstance(vector, SparseVector) else SparseVector(dict(vector))
    sums: Dict[int, List[float]] = {}
    cur = y
    means, norms_ = [], []
    for n in range(N + 1):
        for x, v in cur.entries.items():
            sums.setdefault(x, []).append(v)
        m = SparseVector({x: fsum(vs) / (n + 1) for x, vs in sums.items()})
        m = SparseVector({x: v for x, v in m.entries.items() if v != 0.0})
        means.append(m)
        norms_.append(norm(system, m))
        cur = apply_operator(system, cur)
    deltas = [norm(system, means[k + 1].sub(means[k])) for k in range(N)]
    return CesaroMeanSeries(N, means, norms_, deltas)


# --------------------------------------------------------------------------
# the per-index versus global formula gap


@dataclass
class FormulaGapReport:
    p: float
    n_max: int
    c0_means: List[float]  # (1/N) sum_{n<=N} sup_i |w_i...w_{i+n-1}|^p
    lp_means: List[float]  # V_N: sup_i (1/N) sum_{n<=min(N,i-1)} |w_{i-n}...w_{i-1}|^p
    c0_value: float
    lp_value: float
    gap: float
    c0_exact: bool
    checkpoints: Dict[int, float] = field(default_factory=dict)
    lp_witnesses: List[int] = field(default_factory=list)
    # per-index mean at the index right after block N (block weights only)
    aligned_checkpoints: Dict[int, float] = field(default_factory=dict)


def _log_prefix(spec: WeightSpec, ks: np.ndarray) -> np.ndarray:
    """sum_{t=1}^{k} log|w_t|, with 0 at k = 0."""
    ks = np.asarray(ks, dtype=np.int64)
    g = _plain(spec.generator)
    if isinstance(g, BlockConcat):
        return g.log_prefix(ks)
    out = np.zeros(ks.shape)
    pos = ks > 0
    if np.any(pos):
        out[pos] = spec.log_windows(np.ones(int(pos.sum()), dtype=np.int64), ks[pos])
    return out


def _log_prefix_range(spec: WeightSpec, lo: int, hi: int) -> np.ndarray:
    g = _plain(spec.generator)
    if isinstance(g, BlockConcat):
        return g.log_prefix_range(lo, hi)
    return _log_prefix(spec, np.arange(lo, hi + 1, dtype=np.int64))


def lp_side_fixed_N(spec: WeightSpec, p: float, N: int, hi: int, chunk: int = 1 << 20) -> Tuple[float, int]:
    """V_N = max_{1<=i<=hi} (1/N) sum_{n=1}^{min(N,i-1)} |w_{i-n}...w_{i-1}|^p in O(hi).

    The inner sum equals exp(p L(i-1)) * sum_{j=i-1-N}^{i-2} exp(-p L(j)) with L
    the log prefix sum, so each chunk needs one cumulative sum.  Falls back to
    direct summation when the log prefix spreads by more than PREFIX_SPREAD_MAX
    inside a chunk.
    """
    if not spec.unilateral:
        raise DomainMismatch("the truncated per-index formula is unilateral")
    best, arg = 0.0, 1
    for a in range(2, hi + 1, chunk):
        b = min(hi, a + chunk - 1)
        j0 = max(0, a - 1 - N)
        P = p * _log_prefix_range(spec, j0, b - 1)
        L = P[:-1]  # j in [j0, b-2]
        shift = float(L.min())
        # differences of the cumulative sum lose about exp(spread) in relative accuracy
        if float(L.max()) - shift > PREFIX_SPREAD_MAX:
            v, i = _lp_side_direct(spec, p, N, a, b)
        else:
            E = np.exp(-(L - shift))
            C = np.zeros(len(E) + 1)
            np.cumsum(E, out=C[1:])
            i = np.arange(a, b + 1, dtype=np.int64)
            top = (i - 1) - j0  # C index one past j = i-2
            bot = np.maximum(i - 1 - N, 0) - j0
            window = C[top] - C[bot]
            Li = P[a - 1 - j0:]  # j = i - 1 for i in [a, b]
            vals = np.exp(Li - shift) * window / N
            k = int(np.argmax(vals))
            v, i = float(vals[k]), int(i[k])
        if v > best:
            best, arg = v, i
    return best, arg


def lp_value_at(spec: WeightSpec, p: float, N: int, i: int) -> float:
    """(1/N) sum_{n=1}^{min(N,i-1)} |w_{i-n}...w_{i-1}|^p at a single index."""
    m = min(N, i - 1)
    if m < 1:
        return 0.0
    js = np.arange(i - 1 - m, i - 1, dtype=np.int64)
    Li = float(_log_prefix(spec, np.array([i - 1]))[0])
    return fsum(exp_logs(p * (Li - _log_prefix(spec, js)))) / N


def _lp_side_direct(spec, p, N, a, b):
    cells = np.arange(a, b + 1, dtype=np.int64)
    acc = KahanVector(len(cells))
    for n in range(1, N + 1):
        starts = cells - n
        logs = np.full(cells.shape, -np.inf)
        ok = starts >= 1
        if np.any(ok):
            logs[ok] = safe_log_windows(spec, starts[ok], n)
        acc.add(exp_logs(p * logs))
    vals = acc.total / N
    k = int(np.argmax(vals))
    return float(vals[k]), int(cells[k])


def formula_gap_report(spec: WeightSpec, p: float, n_max: int, N_max: Optional[int] = None,
                       index_hi: Optional[int] = None) -> FormulaGapReport:
    """Compare the truncated per-index l^p formula with the global c0 formula.

    Both are evaluated for every N <= n_max.  The per-index side is also
    evaluated at checkpoints N = 10^k <= N_max and at N_max.
    """
    if not spec.unilateral:
        raise DomainMismatch("the formula gap is stated for unilateral weights")
    N_max = n_max if N_max is None else N_max
    # global side
    sups, exact = [], True
    for n in range(1, n_max + 1):
        val, _, ex = _chain_sup_log(spec, n, None)
        exact = exact and ex
        sups.append(exp_log(p * val))
    c0_means, run = [], []
    for N in range(1, n_max + 1):
        run.append(sups[N - 1])
        c0_means.append(fsum(run) / N)
    # per-index side, one prefix-sum pass per N
    hi = _lp_hi(spec, n_max) if index_hi is None else index_hi
    lp_means, wits = [], []
    for N in range(1, n_max + 1):
        v, i = lp_side_fixed_N(spec, p, N, hi)
        lp_means.append(v)
        wits.append(i)
    checkpoints = {}
    marks = [10 ** k for k in range(1, 12) if 10 ** k <= N_max]
    if N_max not in marks:
        marks.append(N_max)
    for N in marks:
        if N <= n_max:
            checkpoints[N] = lp_means[N - 1]
        else:
            checkpoints[N] = lp_side_fixed_N(spec, p, N, _lp_hi(spec, N) if index_hi is None else index_hi)[0]
    aligned = {}
    g = _plain(spec.generator)
    if isinstance(g, BlockConcat):
        for N in marks:
            if N >= g.first_block:
                aligned[N] = lp_value_at(spec, p, N, g.block_start(N) + N)
    c0v, lpv = max(c0_means), max(lp_means)
    return FormulaGapReport(p, n_max, c0_means, lp_means, c0v, lpv, c0v - lpv, exact, checkpoints, wits, aligned)


def _lp_hi(spec: WeightSpec, N: int) -> int:
    g = _plain(spec.generator)
    if isinstance(g, BlockConcat):
        return g.extent(max(N, g.first_block) - g.first_block + 2)
    if isinstance(g, Table):
        return spec.default_extent(N)[1] + N + 1
    L = g.period if isinstance(g, Periodic) else 1
    return min(DEFAULT_INDEX_COUNT, 10 * N + L + 1)
