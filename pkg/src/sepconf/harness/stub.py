"""Deterministic in-process solver used for tests and dry runs.

The scripted solve time of ``(instance, configuration, seed)`` is::

    base[instance]
      * prod(effects[sep][level])
      * (1 + planted.penalty * hamming(config, planted))
      * (1 + jitter * u(instance, seed))       u in [-1, 1)

unless ``times[instance]`` lists the configuration explicitly. Gap traces
are piecewise constant from ``gaps[instance]`` or fall linearly from
``initial_gap`` to zero at the finish time. A table looks like::

    default_base: 10.0
    base: {inst_a: 4.0}
    effects: {gomory: {off: 0.5}}
    planted: {levels: {clique: aggressive}, penalty: 0.25}
    times: {inst_a: {default: 4.0, "off,default,default,default,default,default": 1.5}}
    gaps: {inst_b: [[1.0, 0.3], [3.0, 0.08]]}
    usage: {"*": {gomory: 5}}
    fail: [inst_c]
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import yaml

from ..catalog import Configuration, SeparatorCatalog, SettingLevel, require_same_catalog
from ..errors import ParseError
from .types import Instance, SolveOutcome, SolveStatus

TimeFn = Callable[[str, Configuration, int], float]


def config_key(config: Configuration) -> str:
    return ",".join(lv.label for lv in config.vector)


@dataclass
class StubTable:
    default_base: float = 10.0
    base: dict[str, float] = field(default_factory=dict)
    effects: dict[str, dict[SettingLevel, float]] = field(default_factory=dict)
    planted: dict[str, SettingLevel] | None = None
    penalty: float = 0.0
    times: dict[str, dict[str, float]] = field(default_factory=dict)
    jitter: float = 0.0
    initial_gap: float = 1.0
    gaps: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    usage: dict[str, dict[str, int]] = field(default_factory=dict)
    fail: frozenset[str] = frozenset()

    @classmethod
    def from_dict(cls, doc: Mapping) -> "StubTable":
        try:
            planted = doc.get("planted") or None
            return cls(
                default_base=float(doc.get("default_base", 10.0)),
                base={str(k): float(v) for k, v in (doc.get("base") or {}).items()},
                effects={
                    str(sep): {SettingLevel.parse(lv): float(f) for lv, f in levels.items()}
                    for sep, levels in (doc.get("effects") or {}).items()
                },
                planted=(
                    {str(k): SettingLevel.parse(v) for k, v in planted["levels"].items()}
                    if planted else None
                ),
                penalty=float(planted.get("penalty", 0.0)) if planted else 0.0,
                times={
                    str(i): {str(k): float(v) for k, v in row.items()}
                    for i, row in (doc.get("times") or {}).items()
                },
                jitter=float(doc.get("jitter", 0.0)),
                initial_gap=float(doc.get("initial_gap", 1.0)),
                gaps={
                    str(i): sorted((float(t), float(g)) for t, g in trace)
                    for i, trace in (doc.get("gaps") or {}).items()
                },
                usage={
                    str(i): {str(n): int(c) for n, c in row.items()}
                    for i, row in (doc.get("usage") or {}).items()
                },
                fail=frozenset(str(i) for i in doc.get("fail") or ()),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed stub table: {exc}") from None

    def to_dict(self) -> dict:
        doc: dict = {"default_base": self.default_base, "jitter": self.jitter,
                     "initial_gap": self.initial_gap}
        if self.base:
            doc["base"] = dict(self.base)
        if self.effects:
            doc["effects"] = {s: {lv.label: f for lv, f in e.items()} for s, e in self.effects.items()}
        if self.planted is not None:
            doc["planted"] = {"levels": {k: v.label for k, v in self.planted.items()},
                              "penalty": self.penalty}
        if self.times:
            doc["times"] = self.times
        if self.gaps:
            doc["gaps"] = {i: [list(p) for p in tr] for i, tr in self.gaps.items()}
        if self.usage:
            doc["usage"] = self.usage
        if self.fail:
            doc["fail"] = sorted(self.fail)
        return doc


def load_stub_table(path: str | Path) -> StubTable:
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ParseError(f"cannot read stub table: {exc}", path=str(path)) from None
    if not isinstance(doc, dict):
        raise ParseError("stub table must be a mapping", path=str(path))
    return StubTable.from_dict(doc)


def _unit_noise(instance: str, seed: int) -> float:
    digest = hashlib.sha256(f"{instance}:{seed}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2**63 - 1.0


class StubSolver:
    """Scripted solver; ``calls`` counts every solve it has been asked for."""

    def __init__(self, catalog: SeparatorCatalog, table: StubTable | None = None,
                 time_fn: TimeFn | None = None, log_dir: str | Path | None = None):
        self.catalog = catalog
        self.table = table or StubTable()
        self.time_fn = time_fn
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.calls = 0
        self._lock = threading.Lock()
        self._stats_names = catalog.stats_name_map()

    def scripted_time(self, instance: str, config: Configuration, seed: int) -> float:
        if self.time_fn is not None:
            return float(self.time_fn(instance, config, seed))
        tab = self.table
        row = tab.times.get(instance, {})
        key = config_key(config)
        if key in row:
            return row[key]
        if "default" in row and all(lv == SettingLevel.DEFAULT for lv in config.vector):
            return row["default"]
        t = tab.base.get(instance, tab.default_base)
        for sep, lv in zip(config.ids, config.vector):
            t *= tab.effects.get(sep, {}).get(lv, 1.0)
        if tab.planted is not None:
            miss = sum(1 for sep, lv in zip(config.ids, config.vector)
                       if tab.planted.get(sep, SettingLevel.DEFAULT) != lv)
            t *= 1.0 + tab.penalty * miss
        if tab.jitter:
            t *= 1.0 + tab.jitter * _unit_noise(instance, seed)
        return t

    def _gap_at(self, instance: str, t: float, finish: float) -> float:
        if t >= finish:
            return 0.0
        trace = self.table.gaps.get(instance)
        if trace:
            gap = self.table.initial_gap
            for when, g in trace:
                if when <= t:
                    gap = g
            return gap
        return self.table.initial_gap * (1.0 - t / finish)

    def _gap_hit(self, instance: str, target: float, finish: float) -> float | None:
        """Earliest time the gap is at or below ``target`` (before finishing)."""
        trace = self.table.gaps.get(instance)
        if trace:
            for when, g in trace:
                if g <= target and when < finish:
                    return when
            return None
        g0 = self.table.initial_gap
        if target >= g0:
            return 0.0
        return finish * (1.0 - target / g0)

    def _usage(self, instance: str, config: Configuration) -> dict[str, int]:
        row = self.table.usage.get(instance, self.table.usage.get("*", {}))
        out = {}
        for name, count in row.items():
            sep = self._stats_names.get(name.strip().lower())
            off = sep is not None and config.level(sep) == SettingLevel.OFF
            out[name] = 0 if off else count
        return out

    def solve(self, instance: Instance | str, config: Configuration, seed: int,
              time_limit: float | None = None, gap_target: float = 0.0) -> SolveOutcome:
        require_same_catalog(config.catalog_ref, self.catalog.ref)
        inst = instance.id if isinstance(instance, Instance) else str(instance)
        with self._lock:
            self.calls += 1
        if inst in self.table.fail:
            return self._log(SolveOutcome.error(inst, config.digest, seed, "scripted failure",
                                                time_limit=time_limit))

        finish = self.scripted_time(inst, config, seed)
        status, stop = SolveStatus.OPTIMAL, finish
        if gap_target > 0:
            hit = self._gap_hit(inst, gap_target, finish)
            if hit is not None and hit < finish:
                status, stop = SolveStatus.GAP_LIMIT, hit
        if time_limit is not None and stop > time_limit:
            status, stop = SolveStatus.TIME_LIMIT, float(time_limit)
        gap = 0.0 if status is SolveStatus.OPTIMAL else self._gap_at(inst, stop, finish)
        out = SolveOutcome(inst, config.digest, seed, status, stop, gap, None, time_limit,
                           self._usage(inst, config))
        return self._log(out)

    def _log(self, out: SolveOutcome) -> SolveOutcome:
        if self.log_dir is None:
            return out
        self.log_dir.mkdir(parents=True, exist_ok=True)
        path = self.log_dir / f"{out.instance}__{out.config_hash[:12]}__s{out.seed}.log"
        path.write_text(json.dumps(out.to_dict(), sort_keys=True, default=str) + "\n")
        return SolveOutcome(out.instance, out.config_hash, out.seed, out.status, out.time, out.gap,
                            str(path), out.time_limit, out.cut_stats, out.message)
