"""Batch evaluation of configurations against solver defaults."""

from __future__ import annotations

import json
import logging
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..catalog import Configuration, SeparatorCatalog, Solver, default_configuration
from ..errors import EmptyList, LaunchError, LogParseError
from .metrics import improvement, mean_time
from .runners import Runner, SubprocessRunner
from .stub import StubSolver
from .types import EvalRecord, Instance, InstanceSet, RunPlan, SolveOutcome, SolveStatus, instance_id

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Job:
    instance: Instance
    config: Configuration
    seed: int
    time_limit: float | None
    gap_target: float
    tag: int = 0  # caller's grouping key, e.g. candidate position


def _run_one(runner: Runner, job: Job) -> SolveOutcome:
    try:
        return runner.solve(job.instance, job.config, job.seed, job.time_limit, job.gap_target)
    except (LaunchError, LogParseError) as exc:
        return SolveOutcome.error(job.instance.id, job.config.digest, job.seed, str(exc),
                                  time_limit=job.time_limit)


def run_batch(runner: Runner, jobs: Sequence[Job], workers: int = 1) -> list[SolveOutcome]:
    """Run jobs on a bounded pool; ``result[i]`` is the outcome of ``jobs[i]``."""
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(runner, j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda j: _run_one(runner, j), jobs))


@dataclass(frozen=True)
class DefaultEntry:
    t_default: float
    gap: float
    n_runs: int
    n_errors: int
    solved: bool
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.n_errors == 0 and self.t_default > 0


class DefaultsCache:
    """Default-configuration means keyed by instance content, solver build and seeds.

    With a ``path`` the cache is persisted as JSON after every update.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._data: dict[str, dict] = {}
        if self.path is not None and self.path.exists():
            self._data = json.loads(self.path.read_text())

    @staticmethod
    def key(instance: Instance, catalog_version: str, solver: Solver, seeds: Iterable[int],
            gap_target: float) -> str:
        return "|".join([instance.content_hash, solver.value, catalog_version,
                         ",".join(map(str, seeds)), repr(float(gap_target))])

    def get(self, key: str) -> DefaultEntry | None:
        doc = self._data.get(key)
        return DefaultEntry(**doc) if doc is not None else None

    def put(self, key: str, entry: DefaultEntry) -> None:
        with self._lock:
            self._data[key] = dict(entry.__dict__)
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                tmp = self.path.with_suffix(".tmp")
                tmp.write_text(json.dumps(self._data, indent=1, sort_keys=True))
                os.replace(tmp, self.path)

    def __len__(self) -> int:
        return len(self._data)


def _fmean(values: list[float]) -> float:
    return math.fsum(values) / len(values) if values else math.nan


class Evaluator:
    """Evaluate configurations under a :class:`RunPlan`.

    ``config_solves`` and ``default_solves`` count the solves issued, which
    is the cost reported for search and validation.
    """

    def __init__(self, runner: Runner, catalog: SeparatorCatalog, plan: RunPlan,
                 cache: DefaultsCache | None = None):
        if plan.catalog_hash != catalog.content_hash:
            raise ValueError("run plan targets a different catalog")
        self.runner = runner
        self.catalog = catalog
        self.plan = plan
        self.cache = cache if cache is not None else DefaultsCache()
        self.config_solves = 0
        self.default_solves = 0
        self.default_outcomes: list[SolveOutcome] = []

    def _key(self, inst: Instance) -> str:
        return DefaultsCache.key(inst, self.catalog.version_tag, self.catalog.solver,
                                 self.plan.seed_list, self.plan.gap_target)

    def defaults(self, instances: Iterable[Instance]) -> dict[str, DefaultEntry]:
        """Default-configuration means, solving (without a time limit) only cache misses."""
        instances = list(instances)
        default = default_configuration(self.catalog)
        missing = [i for i in instances if self.cache.get(self._key(i)) is None]
        jobs = [Job(i, default, s, None, self.plan.gap_target)
                for i in missing for s in self.plan.seed_list]
        outcomes = run_batch(self.runner, jobs, self.plan.effective_workers)
        self.default_solves += len(jobs)
        outcomes = sorted(outcomes, key=lambda o: o.key)
        self.default_outcomes.extend(outcomes)
        by_inst: dict[str, list[SolveOutcome]] = {}
        for o in outcomes:
            by_inst.setdefault(o.instance, []).append(o)
        for inst in missing:
            runs = by_inst.get(inst.id, [])
            errors = [o for o in runs if o.status is SolveStatus.ERROR]
            try:
                t = mean_time(runs)
            except EmptyList:
                t = math.nan
            entry = DefaultEntry(
                t_default=t,
                gap=_fmean([o.gap for o in runs if o.status is not SolveStatus.ERROR]),
                n_runs=len(runs),
                n_errors=len(errors),
                solved=not any(o.status is SolveStatus.TIME_LIMIT for o in runs),
                message="; ".join(sorted({o.message for o in errors})),
            )
            self.cache.put(self._key(inst), entry)
        return {i.id: self.cache.get(self._key(i)) for i in instances}

    def evaluate_many(self, configs: Sequence[Configuration], instances: InstanceSet | Sequence[Instance]
                      ) -> list[list[EvalRecord]]:
        """One record list per configuration; all solves share one worker pool."""
        instances = list(instances)
        defaults = self.defaults(instances)
        jobs = []
        for pos, cfg in enumerate(configs):
            for inst in instances:
                entry = defaults[inst.id]
                if not entry.ok:
                    continue
                limit = self.plan.limit_multiplier * entry.t_default
                jobs.extend(Job(inst, cfg, s, limit, self.plan.gap_target, pos)
                            for s in self.plan.seed_list)
        outcomes = run_batch(self.runner, jobs, self.plan.effective_workers)
        self.config_solves += len(jobs)
        grouped: dict[tuple[int, str], list[SolveOutcome]] = {}
        for job, o in sorted(zip(jobs, outcomes), key=lambda jo: (jo[0].tag, jo[1].key)):
            grouped.setdefault((job.tag, o.instance), []).append(o)
        return [
            [self._record(inst, defaults[inst.id], grouped.get((pos, inst.id), []))
             for inst in instances]
            for pos in range(len(configs))
        ]

    def evaluate(self, config: Configuration, instances: InstanceSet | Sequence[Instance]) -> list[EvalRecord]:
        return self.evaluate_many([config], instances)[0]

    def _record(self, inst: Instance, entry: DefaultEntry, runs: list[SolveOutcome]) -> EvalRecord:
        nan = math.nan
        if not entry.ok:
            return EvalRecord(inst.id, entry.t_default, nan, nan, False, False, nan, entry.gap,
                              len(runs), max(entry.n_errors, 1),
                              "default runs failed: " + (entry.message or "non-positive time"))
        errors = [o for o in runs if o.status is SolveStatus.ERROR]
        good = [o for o in runs if o.status is not SolveStatus.ERROR]
        if errors or not good:
            t = mean_time(runs) if good else nan
            msg = "; ".join(sorted({o.message for o in errors})) or "no runs"
            return EvalRecord(inst.id, entry.t_default, t, nan, False, False,
                              _fmean([o.gap for o in good]), entry.gap, len(runs),
                              max(len(errors), 1), msg)
        t_config = mean_time(good)
        all_censored = all(o.status is SolveStatus.TIME_LIMIT for o in good)
        value, censored = improvement(entry.t_default, t_config, self.plan.limit_multiplier,
                                      censored=all_censored)
        return EvalRecord(
            instance=inst.id,
            t_default=entry.t_default,
            t_config=t_config,
            improvement=value,
            censored=censored,
            solved=not any(o.status is SolveStatus.TIME_LIMIT for o in good),
            gap_config=_fmean([o.gap for o in good]),
            gap_default=entry.gap,
            n_runs=len(runs),
        )


def evaluate(config: Configuration, instances: InstanceSet | Sequence[Instance], plan: RunPlan,
             cache: DefaultsCache | None = None, *, runner: Runner,
             catalog: SeparatorCatalog) -> list[EvalRecord]:
    return Evaluator(runner, catalog, plan, cache).evaluate(config, instances)


def make_runner(catalog: SeparatorCatalog, *, stub: StubSolver | None = None, **kwargs) -> Runner:
    if catalog.solver is Solver.STUB:
        return stub if stub is not None else StubSolver(catalog, log_dir=kwargs.get("log_dir"))
    return SubprocessRunner(catalog, **kwargs)


def run_solve(instance_path: str | Path | Instance, config: Configuration, catalog: SeparatorCatalog,
              seed: int, time_limit: float | None = None, gap_target: float = 0.0,
              runner: Runner | None = None) -> SolveOutcome:
    """Solve one instance once. Builds a runner for the catalog's solver if none is given."""
    if isinstance(instance_path, Instance):
        inst = instance_path
    else:
        p = Path(instance_path)
        inst = Instance(instance_id(p), p)
    runner = runner or make_runner(catalog)
    return runner.solve(inst, config, seed, time_limit, gap_target)
