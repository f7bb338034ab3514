"""Value types shared by the runners, the evaluator and the CLI."""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from ..catalog import Solver

INSTANCE_SUFFIXES = (".mps", ".mps.gz", ".lp", ".lp.gz")


class SolveStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    GAP_LIMIT = "gap_limit"
    TIME_LIMIT = "time_limit"
    ERROR = "error"


@dataclass(frozen=True)
class SolveOutcome:
    instance: str
    config_hash: str
    seed: int
    status: SolveStatus
    time: float  # seconds (SCIP, stub) or work units (Gurobi)
    gap: float  # fraction, may be inf when no incumbent was found
    log_path: str | None = None
    time_limit: float | None = None
    cut_stats: Mapping[str, int] = field(default_factory=dict)  # solver stats name -> cuts applied
    message: str = ""

    def __post_init__(self):
        if self.status is not SolveStatus.ERROR and self.time < 0:
            raise ValueError("solve time must be >= 0")

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.instance, self.config_hash, self.seed)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "status": self.status.value,
            "time": self.time,
            "gap": self.gap,
            "log_path": self.log_path,
            "time_limit": self.time_limit,
            "cut_stats": dict(sorted(self.cut_stats.items())),
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SolveOutcome":
        return cls(
            doc["instance"],
            doc["config_hash"],
            int(doc["seed"]),
            SolveStatus(doc["status"]),
            float(doc["time"]),
            float(doc["gap"]),
            doc.get("log_path"),
            doc.get("time_limit"),
            dict(doc.get("cut_stats") or {}),
            doc.get("message", ""),
        )

    @classmethod
    def error(cls, instance: str, config_hash: str, seed: int, message: str,
              log_path: str | None = None, time_limit: float | None = None) -> "SolveOutcome":
        return cls(instance, config_hash, seed, SolveStatus.ERROR, math.nan, math.nan,
                   log_path, time_limit, {}, message)


@dataclass(frozen=True)
class EvalRecord:
    instance: str
    t_default: float
    t_config: float
    improvement: float
    censored: bool
    solved: bool = True  # no configured run stopped at the time limit
    gap_config: float = 0.0
    gap_default: float = 0.0
    n_runs: int = 0
    n_errors: int = 0
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.n_errors == 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "EvalRecord":
        return cls(**{k: doc[k] for k in cls.__dataclass_fields__ if k in doc})


@dataclass(frozen=True)
class Instance:
    """A benchmark instance. ``path`` may be absent for stub-only instances."""

    id: str
    path: Path | None = None

    @property
    def content_hash(self) -> str:
        if self.path is None:
            return hashlib.sha256(f"stub:{self.id}".encode()).hexdigest()
        h = hashlib.sha256()
        with open(self.path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
        return h.hexdigest()


def instance_id(path: Path) -> str:
    name = path.name
    for suffix in INSTANCE_SUFFIXES:
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


@dataclass(frozen=True)
class InstanceSet:
    name: str
    instances: tuple[Instance, ...]

    def __post_init__(self):
        ids = [i.id for i in self.instances]
        if len(set(ids)) != len(ids):
            raise ValueError(f"instance set {self.name!r} has duplicate ids")

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(i.id for i in self.instances)

    @classmethod
    def of_ids(cls, name: str, ids: Sequence[str]) -> "InstanceSet":
        return cls(name, tuple(Instance(i) for i in ids))

    @classmethod
    def from_dir(cls, directory: str | Path, name: str | None = None) -> "InstanceSet":
        """All instance files in ``directory`` (not recursive), sorted by id."""
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"instance directory not found: {directory}")
        found = [
            Instance(instance_id(p), p)
            for p in directory.iterdir()
            if p.is_file() and p.name.endswith(INSTANCE_SUFFIXES)
        ]
        return cls(name or directory.name, tuple(sorted(found, key=lambda i: i.id)))


@dataclass(frozen=True)
class RunPlan:
    solver: Solver
    catalog_hash: str
    val_set: tuple[str, ...] = ()
    eval_set: tuple[str, ...] = ()
    seeds: int = 10
    limit_multiplier: float = 2.5
    gap_target: float = 0.0
    threads: int = 4
    workers: int = 1
    thread_budget: int | None = None  # machine-wide cap on workers * threads

    def __post_init__(self):
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if not self.limit_multiplier > 1:
            raise ValueError("limit multiplier must be > 1")
        if self.gap_target < 0:
            raise ValueError("gap target must be >= 0")
        if self.threads < 1 or self.workers < 1:
            raise ValueError("threads and workers must be >= 1")

    @property
    def seed_list(self) -> tuple[int, ...]:
        return tuple(range(self.seeds))

    @property
    def effective_workers(self) -> int:
        if self.thread_budget is None:
            return self.workers
        return max(1, min(self.workers, self.thread_budget // self.threads))

    def with_(self, **changes) -> "RunPlan":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        doc = dict(self.__dict__)
        doc["solver"] = self.solver.value
        doc["val_set"] = list(self.val_set)
        doc["eval_set"] = list(self.eval_set)
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RunPlan":
        doc = dict(doc)
        doc["solver"] = Solver(doc["solver"])
        doc["val_set"] = tuple(doc.get("val_set", ()))
        doc["eval_set"] = tuple(doc.get("eval_set", ()))
        return cls(**{k: v for k, v in doc.items() if k in cls.__dataclass_fields__})
