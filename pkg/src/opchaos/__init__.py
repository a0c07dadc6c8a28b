"""Dynamics of weighted composition operators, weighted shifts and translations."""

from .classify import Property, Status, Verdict
from .system import SUP, build_shift_system, lp, system_from_json
from .weights import WeightSpec, bilateral, unilateral

__version__ = "0.1.0"

__all__ = [
    "Property",
    "Status",
    "Verdict",
    "SUP",
    "WeightSpec",
    "bilateral",
    "build_shift_system",
    "lp",
    "system_from_json",
    "unilateral",
]
