"""Small numeric helpers shared by the engines."""

from __future__ import annotations

import math
import sys

import numpy as np

LOG_MAX = math.log(sys.float_info.max)


def exp_log(x: float) -> float:
    """Exponentiate a log-magnitude, mapping overflow to inf and -inf to 0."""
    if x > LOG_MAX:
        return math.inf
    if x == -math.inf:
        return 0.0
    return math.exp(x)


def exp_logs(a: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp(a)


def rel_close(a: float, b: float, rtol: float) -> bool:
    if a == b:
        return True
    if math.isinf(a) or math.isinf(b):
        return False
    return abs(a - b) <= rtol * max(abs(a), abs(b))


class KahanVector:
    """Column-wise compensated running sum over a fixed-length vector.

    Each call to ``add`` folds one new term per column, so the summation order
    is fixed by the call order and results are reproducible.
    """

    def __init__(self, size: int):
        self.total = np.zeros(size)
        self._comp = np.zeros(size)

    def add(self, terms: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore", over="ignore"):
            y = terms - self._comp
            t = self.total + y
            comp = (t - self.total) - y
        # once a column overflows the compensation is meaningless
        self._comp = np.where(np.isfinite(comp), comp, 0.0)
        self.total = t
        return self.total


def fsum(values) -> float:
    """Correctly rounded sum; inf-aware."""
    if isinstance(values, np.ndarray):
        if np.isinf(values).any():
            return float(values.sum())
        return math.fsum(values.tolist())
    vals = list(values)
    if any(math.isinf(v) for v in vals):
        return sum(vals)
    return math.fsum(vals)
