"""Comparison methods: Pruning and random Search(d)."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .catalog import (
    Configuration,
    Provenance,
    SeparatorCatalog,
    SettingLevel,
    default_configuration,
    make_configuration,
)
from .ensemble import SelectionOutcome, Strategy
from .errors import EmptyList, EmptyValidationSet, UnknownSeparatorInStats
from .harness.evaluate import Evaluator, Job, run_batch
from .harness.metrics import summarize
from .harness.runners import Runner
from .harness.types import EvalRecord, Instance, RunPlan, SolveOutcome, SolveStatus

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeparatorUsage:
    """Cuts applied per solver statistics row, for one instance."""

    instance: str
    counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        bad = [k for k, v in self.counts.items() if v < 0]
        if bad:
            raise ValueError(f"negative cut counts for {bad}")

    @classmethod
    def from_outcomes(cls, instance: str, outcomes: Sequence[SolveOutcome]) -> "SeparatorUsage":
        total: dict[str, int] = {}
        for o in outcomes:
            if o.status is SolveStatus.ERROR:
                continue
            for name, n in o.cut_stats.items():
                total[name] = total.get(name, 0) + int(n)
        return cls(instance, total)

    def to_dict(self) -> dict:
        return {"instance": self.instance, "counts": dict(sorted(self.counts.items()))}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SeparatorUsage":
        return cls(doc["instance"], {str(k): int(v) for k, v in doc["counts"].items()})


def unobservable(catalog: SeparatorCatalog) -> list[str]:
    """Separators with no statistics name; pruning never switches these off."""
    return [s.id for s in catalog.separators if not s.stats_names]


def pruning(usage: Sequence[SeparatorUsage], catalog: SeparatorCatalog, *,
            ignore_unknown: bool = False) -> Configuration:
    """Switch off every separator that applied no cut on any validation instance.

    Statistics rows the catalog cannot map raise :class:`UnknownSeparatorInStats`
    unless ``ignore_unknown`` is set (real solvers report plugins a catalog
    may not cover, such as nonlinear separators).
    """
    if not usage:
        raise EmptyValidationSet("pruning needs usage from at least one validation instance")
    names = catalog.stats_name_map()
    applied = {sep_id: 0 for sep_id in catalog.ids}
    unknown = set()
    for u in usage:
        for name, n in u.counts.items():
            sep_id = names.get(name.strip().lower())
            if sep_id is None:
                unknown.add(name)
                continue
            applied[sep_id] += n
    if unknown and not ignore_unknown:
        raise UnknownSeparatorInStats(f"statistics rows not in the catalog: {', '.join(sorted(unknown))}")
    keep = set(unobservable(catalog))
    if keep:
        log.warning("no statistics mapping for %s; left at default", ", ".join(sorted(keep)))
    levels = {
        sep_id: SettingLevel.DEFAULT if (applied[sep_id] > 0 or sep_id in keep) else SettingLevel.OFF
        for sep_id in catalog.ids
    }
    return make_configuration(catalog, levels, Provenance.baseline("pruning"))


def gather_usage(runner: Runner, catalog: SeparatorCatalog, instances: Sequence[Instance],
                 plan: RunPlan) -> tuple[list[SeparatorUsage], int]:
    """Solve the validation set with the default configuration and collect cut usage.

    Returns the usage per instance and the number of solves issued.
    """
    if not instances:
        raise EmptyValidationSet("empty validation set")
    default = default_configuration(catalog)
    jobs = [Job(i, default, s, None, plan.gap_target) for i in instances for s in plan.seed_list]
    outcomes = run_batch(runner, jobs, plan.effective_workers)
    by_inst: dict[str, list[SolveOutcome]] = {}
    for o in sorted(outcomes, key=lambda o: o.key):
        by_inst.setdefault(o.instance, []).append(o)
    usage = []
    for inst in instances:
        runs = by_inst.get(inst.id, [])
        if all(o.status is SolveStatus.ERROR for o in runs):
            log.warning("no usable default solve for %s; skipped", inst.id)
            continue
        usage.append(SeparatorUsage.from_outcomes(inst.id, runs))
    return usage, len(jobs)


def random_configuration(catalog: SeparatorCatalog, rng: random.Random) -> Configuration:
    """Each separator's level drawn independently and uniformly from the allowed levels."""
    allowed = sorted(catalog.allowed_levels)
    levels = {sep_id: rng.choice(allowed) for sep_id in catalog.ids}
    return make_configuration(catalog, levels, Provenance.baseline("random"))


def _median_or_floor(records: Sequence[EvalRecord]) -> float:
    try:
        return summarize(records).median
    except EmptyList:
        return -math.inf


def search(d: int, catalog: SeparatorCatalog, val_instances: Sequence[Instance], plan: RunPlan,
           rng: random.Random | int, *, evaluator: Evaluator) -> SelectionOutcome:
    """Evaluate ``d`` random configurations and keep the best validation median.

    All candidates are drawn before any evaluation, so the candidate list
    depends only on the rng. Ties go to the earlier candidate, which makes a
    longer draw from the same stream never worse on validation.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not val_instances:
        raise EmptyValidationSet("search needs a validation set")
    stream = rng if isinstance(rng, random.Random) else random.Random(rng)
    candidates = [random_configuration(catalog, stream) for _ in range(d)]
    before = evaluator.config_solves
    results = evaluator.evaluate_many(candidates, val_instances)
    medians = [_median_or_floor(r) for r in results]
    best = max(range(d), key=lambda i: (medians[i], -i))
    final = candidates[best].with_provenance(Provenance.baseline("search"))
    return SelectionOutcome(
        final,
        Strategy.SEARCH,
        candidates_tested=tuple(zip(candidates, medians)),
        pool_index=best,
        solve_count=evaluator.config_solves - before,
    )


def pruning_outcome(usage: Sequence[SeparatorUsage], catalog: SeparatorCatalog, solve_count: int = 0,
                    *, ignore_unknown: bool = False) -> SelectionOutcome:
    cfg = pruning(usage, catalog, ignore_unknown=ignore_unknown)
    return SelectionOutcome(cfg, Strategy.PRUNING, solve_count=solve_count)
