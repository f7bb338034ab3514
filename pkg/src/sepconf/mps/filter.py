"""Benchmark-set filter applied to per-instance default-solve summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from ..errors import MissingField

REQUIRED = ("feasible", "solved_in_presolve", "gap_300s", "default_work_units")
MAX_GAP = 0.10
MIN_WORK_UNITS = 1.0


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str


def miplib_filter(stats: Mapping[str, Any]) -> FilterDecision:
    """Decide whether an instance belongs in the benchmark set.

    ``gap_300s`` is a fraction (0.15 means 15%). Rules are checked in a fixed
    order and the first one that fires names the reason.
    """
    missing = [k for k in REQUIRED if k not in stats or stats[k] is None]
    if missing:
        raise MissingField(f"solve summary lacks {', '.join(missing)}")
    if not stats["feasible"]:
        return FilterDecision(False, "infeasible")
    if stats["solved_in_presolve"]:
        return FilterDecision(False, "solved in presolve")
    if float(stats["gap_300s"]) > MAX_GAP:
        return FilterDecision(False, "gap>10%")
    if float(stats["default_work_units"]) < MIN_WORK_UNITS:
        return FilterDecision(False, "too easy")
    return FilterDecision(True, "kept")
