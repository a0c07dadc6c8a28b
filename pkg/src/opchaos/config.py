"""Job configuration: schema validation and round-tripping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Dict, List, Optional

import jsonschema

from .density import IndexSet, index_set_from_json
from .errors import ConfigError
from .orbit import SetFamily, SparseVector, TailBound
from .system import AtomicSystem, system_from_json

HORIZON_DEFAULTS = {"index": 100_000, "N": 10_000, "n_max": 1_000}
PROPERTIES = (
    "power-bounded",
    "li-yorke",
    "distributional-chaos",
    "dc-density",
    "dcsum",
    "dense-distributional-chaos",
    "acb",
    "mean-li-yorke",
)


def job_schema() -> dict:
    return json.loads(resources.files("opchaos").joinpath("job.schema.json").read_text())


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def normalize_system(doc: dict) -> dict:
    """A bare weight spec (with an optional space) stands for the shift it defines."""
    if isinstance(doc, dict) and "generator" in doc and "kind" not in doc:
        doc = dict(doc)
        out = {"kind": "shift"}
        if "space" in doc:
            out["space"] = doc.pop("space")
        out["weights"] = doc
        return out
    return doc


def validate_job(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(job_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(_pointer(err.absolute_path), err.message)


@dataclass
class JobConfig:
    system: Optional[dict] = None
    properties: List[str] = field(default_factory=list)
    horizons: Dict[str, int] = field(default_factory=dict)
    certificates: List[str] = field(default_factory=list)
    bound: Optional[float] = None
    exponent: Optional[float] = None
    family: Optional[List[List[int]]] = None
    sets: Optional[dict] = None
    D: Optional[dict] = None
    E: Optional[dict] = None
    tail_bound: Optional[dict] = None
    vector: Optional[Dict[str, float]] = None
    outputs: Dict[str, str] = field(default_factory=dict)
    expect: Dict[str, str] = field(default_factory=dict)
    seed: Optional[int] = None

    @classmethod
    def from_json(cls, doc: Any) -> "JobConfig":
        validate_job(doc)
        cfg = cls(**{k: v for k, v in doc.items()})
        if cfg.system is not None:
            cfg.system = normalize_system(cfg.system)
        # parse the nested documents once so errors surface with their pointers
        if cfg.system is not None:
            system_from_json(cfg.system, "/system")
        for name in ("D", "E"):
            if getattr(cfg, name) is not None:
                index_set_from_json(getattr(cfg, name), f"/{name}")
        if cfg.tail_bound is not None:
            try:
                TailBound(**cfg.tail_bound)
            except ValueError as exc:
                raise ConfigError("/tail_bound", str(exc)) from None
        for key in cfg.expect:
            if key not in PROPERTIES and key != "*":
                raise ConfigError(f"/expect/{key}", "unknown property")
        return cfg

    @classmethod
    def load(cls, path: str) -> "JobConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON in {path}: {exc}") from None
        except OSError as exc:
            raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
        return cls.from_json(doc)

    def to_json(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            if v is None or v == [] or v == {}:
                continue
            out[k] = v
        return out

    def horizon(self, name: str) -> int:
        return int(self.horizons.get(name, HORIZON_DEFAULTS[name]))

    def build_system(self) -> AtomicSystem:
        if self.system is None:
            raise ConfigError("/system", "this command needs a system")
        return system_from_json(self.system, "/system")

    def index_set(self, name: str) -> IndexSet:
        doc = getattr(self, name)
        return IndexSet.naturals() if doc is None else index_set_from_json(doc, f"/{name}")

    def set_family(self) -> SetFamily:
        if self.sets is None:
            raise ConfigError("/sets", "dcsum needs a set family")
        return SetFamily.translated(self.sets["base"], self.sets.get("step", 1))

    def tail(self) -> Optional[TailBound]:
        return None if self.tail_bound is None else TailBound(**self.tail_bound)

    def sparse_vector(self) -> Optional[SparseVector]:
        if self.vector is None:
            return None
        return SparseVector({int(k): float(v) for k, v in self.vector.items()})
