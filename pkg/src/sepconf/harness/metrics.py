"""Solve-time aggregation and the relative improvement metric.

Improvement is ``100 * (t_default - t_config) / t_default`` so higher is
better. Configured runs are limited to ``multiplier * t_default``, which
floors the metric at ``100 * (1 - multiplier)`` (-150 for 2.5x).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EmptyList, NoCommonUnsolved, NonPositiveDefaultTime
from .types import EvalRecord, SolveOutcome, SolveStatus

# relative slack when deciding whether a mean sits at the limit
_LIMIT_RTOL = 1e-9


def mean_time(outcomes: Sequence[SolveOutcome]) -> float:
    """Mean solve time; limit-censored runs count at the limit, errors are skipped."""
    if not outcomes:
        raise EmptyList("no solve outcomes")
    keys = {(o.instance, o.config_hash) for o in outcomes}
    if len(keys) > 1:
        raise ValueError("mean_time needs outcomes of a single (instance, config)")
    times = [o.time for o in outcomes if o.status is not SolveStatus.ERROR]
    if not times:
        raise EmptyList("every run errored")
    if all(o.status is SolveStatus.TIME_LIMIT for o in outcomes):
        # all runs stopped at the same limit: return it exactly, not a rounded mean
        limits = {o.time_limit for o in outcomes}
        if len(limits) == 1 and None not in limits:
            return float(limits.pop())
    return math.fsum(times) / len(times)


def improvement(t_default: float, t_config: float, limit_multiplier: float = 2.5,
                censored: bool | None = None) -> tuple[float, bool]:
    """Relative improvement (percent) and whether the configured mean is censored.

    When ``censored`` is not given it is inferred from ``t_config`` reaching
    the limit. A censored result is pinned to the floor value exactly.
    """
    if not t_default > 0:
        raise NonPositiveDefaultTime(f"default time must be > 0, got {t_default}")
    limit = limit_multiplier * t_default
    if t_config > limit * (1 + _LIMIT_RTOL):
        raise ValueError(f"t_config {t_config} exceeds the limit {limit}")
    if censored is None:
        censored = t_config >= limit * (1 - _LIMIT_RTOL)
    if censored:
        return 100.0 * (1.0 - limit_multiplier), True
    return 100.0 * (t_default - t_config) / t_default, False


def quantile(values: Sequence[float], q: float) -> float:
    """Linear interpolation between order statistics (numpy's default rule)."""
    return float(np.quantile(np.asarray(values, dtype=float), q, method="linear"))


@dataclass(frozen=True)
class Summary:
    median: float
    iqr: float
    n: int
    n_solved: int
    n_censored: int
    n_errors: int = 0

    def cell(self, digits: int = 2) -> str:
        return f"{self.median:.{digits}f} ({self.iqr:.{digits}f})"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def summarize(records: Sequence[EvalRecord]) -> Summary:
    """Median and IQR of improvements over the records without errors."""
    if not records:
        raise EmptyList("no evaluation records")
    good = [r for r in records if r.ok]
    if not good:
        raise EmptyList("every record has errors")
    values = [r.improvement for r in good]
    return Summary(
        median=float(statistics.median(values)),
        iqr=quantile(values, 0.75) - quantile(values, 0.25),
        n=len(good),
        n_solved=sum(r.solved for r in good),
        n_censored=sum(r.censored for r in good),
        n_errors=len(records) - len(good),
    )


def gap_comparison(reference: Sequence[EvalRecord], configured: Sequence[EvalRecord]) -> float:
    """Median gap reduction, in percentage points, on instances neither side solved.

    Positive values mean the configured runs finished with smaller gaps.
    """
    ref = {r.instance: r for r in reference if r.ok}
    diffs = []
    for rec in configured:
        other = ref.get(rec.instance)
        if other is None or not rec.ok or rec.solved or other.solved:
            continue
        diffs.append(100.0 * (other.gap_config - rec.gap_config))
    if not diffs:
        raise NoCommonUnsolved("no instance is unsolved under both runs")
    return float(statistics.median(diffs))
