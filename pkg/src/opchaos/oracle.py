"""Brute-force checks: dense truncations, matrix powers and exhaustive counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BoundaryContamination, WindowTooLarge
from .system import AtomicSystem

DEFAULT_WINDOW_CAP = 4096
DEFAULT_SEED = 20240611


@dataclass
class DenseTruncation:
    dim: int
    matrix: np.ndarray  # matrix[r, c] = w(x_r) if f(x_r) = x_c
    atoms: List[int]  # row/column k <-> atoms[k]
    masses: np.ndarray
    system: AtomicSystem
    _pre: Optional[list] = field(default=None, repr=False)

    def index(self, x: int) -> int:
        return self.atoms.index(x)

    def power(self, n: int) -> np.ndarray:
        return np.linalg.matrix_power(self.matrix, n)


def dense_truncation(system: AtomicSystem, window: Tuple[int, int], cap: int = DEFAULT_WINDOW_CAP) -> DenseTruncation:
    """One-step matrix of the operator on the atoms lo..hi (inclusive)."""
    lo, hi = window
    atoms = [x for x in range(lo, hi + 1) if system.contains(x)]
    if len(atoms) > cap:
        raise WindowTooLarge(f"window of {len(atoms)} atoms exceeds cap {cap}")
    pos = {x: k for k, x in enumerate(atoms)}
    M = np.zeros((len(atoms), len(atoms)))
    for r, x in enumerate(atoms):
        y = system.image(x)
        if y in pos:
            M[r, pos[y]] = system.weight(x)
    masses = np.array([system.mass(x) for x in atoms])
    return DenseTruncation(len(atoms), M, atoms, masses, system)


@dataclass
class BruteNorm:
    value: float
    witness: Optional[int]
    compared: int  # number of interior columns (or rows) used
    svd_value: Optional[float] = None


def _interior_columns(trunc: DenseTruncation, n: int) -> List[int]:
    """Columns whose full n-step preimage lies inside the window."""
    if trunc._pre is None:
        pos = {x: k for k, x in enumerate(trunc.atoms)}
        pre = []
        for y in trunc.atoms:
            us = trunc.system.preimage(y)
            pre.append(None if any(u not in pos for u in us) else [pos[u] for u in us])
        trunc._pre = pre
    # ok[k]: the k-step preimage of the column stays inside, built up one step at a time
    ok = [True] * trunc.dim
    for _ in range(n):
        ok = [pre is not None and all(ok[u] for u in pre) for pre in trunc._pre]
    return [k for k in range(trunc.dim) if ok[k]]


def _interior_rows(trunc: DenseTruncation, n: int) -> List[int]:
    """Rows whose forward path of length n stays inside the window."""
    inside = set(trunc.atoms)
    out = []
    for k, x in enumerate(trunc.atoms):
        cur, ok = x, True
        for _ in range(n):
            cur = trunc.system.image(cur)
            if cur not in inside:
                ok = False
                break
        if ok:
            out.append(k)
    return out


def brute_norm(trunc: DenseTruncation, n: int, p="sup", svd_rtol: float = 1e-9) -> BruteNorm:
    """||T^n|| from the n-th matrix power, restricted to uncontaminated atoms.

    For L^p the columns of the power have disjoint supports (injective maps),
    so the norm is the largest normalised column p-mass.  For p = 2 the value
    is also checked against the largest singular value of the scaled block.
    The sup-norm value is the largest absolute row sum.
    """
    P = trunc.power(n)
    if p == "sup":
        rows = _interior_rows(trunc, n)
        if not rows:
            raise BoundaryContamination("no row of the window has an interior n-step path")
        sums = np.abs(P[rows, :]).sum(axis=1)
        k = int(np.argmax(sums))
        return BruteNorm(float(sums[k]), trunc.atoms[rows[k]], len(rows))
    p = float(p)
    cols = _interior_columns(trunc, n)
    if not cols:
        raise BoundaryContamination("no column of the window has an interior n-step preimage")
    m = trunc.masses
    vals = (m[:, None] * np.abs(P[:, cols]) ** p).sum(axis=0) / m[cols]
    k = int(np.argmax(vals))
    value = float(vals[k]) ** (1.0 / p)
    svd = None
    if p == 2.0:
        # the isometry phi -> m^{1/2} phi turns the weighted norm into the Euclidean one
        S = np.sqrt(m)[:, None] * P[:, cols] / np.sqrt(m[cols])[None, :]
        svd = float(np.linalg.norm(S, 2))
        if abs(svd - value) > svd_rtol * max(value, 1e-300):
            raise AssertionError(f"singular value {svd} disagrees with column formula {value}")
    return BruteNorm(value, trunc.atoms[cols[k]], len(cols), svd)


def brute_count(predicate: Callable[[int], bool], N: int) -> int:
    """card{1 <= n <= N : predicate(n)} by exhaustive scan."""
    return sum(1 for n in range(1, N + 1) if predicate(n))


def brute_singleton_ratios(system: AtomicSystem, cells: Sequence[int], b: Sequence[float], N: int,
                           p: float = 1.0) -> List[float]:
    """Weighted ratio for singleton families from a running product of raw weights."""
    top = max(cells)
    w = np.array([system.weight(x) for x in range(1, top + 1)])
    prod = np.concatenate([[1.0], np.cumprod(w)])  # prod[k] = w_1 ... w_k
    mass = np.array([system.mass(x) if x >= 1 else 0.0 for x in range(0, top + 1)])
    cells_a = np.asarray(cells, dtype=np.int64)
    b_a = np.asarray(b, dtype=float)
    den = math.fsum(b_a * mass[cells_a])
    out = []
    for n in range(1, N + 1):
        keep = cells_a > n
        i = cells_a[keep]
        num = b_a[keep] * mass[i - n] * (prod[i - 1] / prod[i - n - 1]) ** p
        out.append(float(num.sum()) / den)
    return out


def brute_density_counts(member: Callable[[int], bool], checkpoints: Sequence[int]) -> Dict[int, int]:
    """Exhaustive card(D intersect [1, n]) at each checkpoint."""
    out, count, last = {}, 0, 0
    for n in sorted(checkpoints):
        for m in range(last + 1, n + 1):
            if member(m):
                count += 1
        last = n
        out[n] = count
    return out


@dataclass
class OracleCase:
    seed: int
    case: int
    n: int
    p: str
    formula: float
    brute: float
    rel_delta: float


def random_table_specs(count: int, length: int = 64, lo: float = 0.1, hi: float = 3.0,
                       seed: int = DEFAULT_SEED) -> List[Tuple[float, ...]]:
    rng = np.random.default_rng(seed)
    return [tuple(rng.uniform(lo, hi, size=length).tolist()) for _ in range(count)]


def norm_oracle_sweep(count: int = 100, n_max: int = 16, ps=(1.0, 2.0, "sup"), length: int = 64,
                      seed: int = DEFAULT_SEED) -> List[OracleCase]:
    """iterate_norm against brute_norm on seeded random unilateral tables."""
    from .norms import iterate_norm
    from .system import SUP, build_shift_system, lp
    from .weights import Frontier, Table, unilateral

    out = []
    for c, vals in enumerate(random_table_specs(count, length, seed=seed)):
        spec = unilateral(Table(vals, 1, Frontier.ZERO))
        for p in ps:
            system = build_shift_system(spec, SUP if p == "sup" else lp(float(p)))
            trunc = dense_truncation(system, (1, length + 1))
            for n in range(1, n_max + 1):
                formula = iterate_norm(system, n).value
                brute = brute_norm(trunc, n, p).value
                rel = abs(formula - brute) / brute if brute else abs(formula)
                out.append(OracleCase(seed, c, n, str(p), formula, brute, rel))
    return out
