"""Clustering and selection over a configuration pool.

Distances are Hamming distances between level vectors. Clustering is PAM
(greedy BUILD then steepest-descent SWAP) run over the distinct
configurations, with multiplicities as weights, so duplicates pull medoids
toward themselves exactly as they would in the full pool but the work only
grows with the number of distinct vectors.
"""

from __future__ import annotations

import enum
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .catalog import (
    Configuration,
    ConfigurationPool,
    Provenance,
    SettingLevel,
    require_same_catalog,
)
from .errors import EmptyPool, KTooLarge, MissingResults

PoolLike = ConfigurationPool | Sequence[Configuration]


class Strategy(str, enum.Enum):
    COLD_START = "llm0"
    VALIDATED = "llmk"
    AVERAGE = "average"
    MODE = "mode"
    SMALLEST = "smallest"
    SEARCH = "search"
    PRUNING = "pruning"


def _configs(pool: PoolLike) -> tuple[Configuration, ...]:
    configs = tuple(pool.configs if isinstance(pool, ConfigurationPool) else pool)
    if not configs:
        raise EmptyPool("configuration pool is empty")
    first = configs[0]
    for cfg in configs[1:]:
        require_same_catalog(first, cfg)
    return configs


def config_distance(a: Configuration, b: Configuration) -> int:
    require_same_catalog(a, b)
    return sum(1 for x, y in zip(a.vector, b.vector) if x != y)


def distance_matrix(configs: Sequence[Configuration]) -> np.ndarray:
    """Pairwise Hamming distances as an int matrix."""
    if not configs:
        return np.zeros((0, 0), dtype=np.int64)
    for cfg in configs[1:]:
        require_same_catalog(configs[0], cfg)
    vecs = np.array([[int(v) for v in c.vector] for c in configs], dtype=np.int8)
    return (vecs[:, None, :] != vecs[None, :, :]).sum(axis=2).astype(np.int64)


@dataclass(frozen=True)
class Clustering:
    k: int
    medoid_indices: tuple[int, ...]  # pool indices, ascending; position = cluster index
    assignment: tuple[int, ...]  # pool index -> cluster index
    total_cost: int
    cost_history: tuple[int, ...] = field(default=(), compare=False)

    def members(self, cluster: int) -> list[int]:
        return [i for i, c in enumerate(self.assignment) if c == cluster]

    def sizes(self) -> list[int]:
        return [self.assignment.count(c) for c in range(self.k)]

    def within_costs(self, pool: PoolLike) -> list[int]:
        configs = _configs(pool)
        costs = [0] * self.k
        for i, c in enumerate(self.assignment):
            costs[c] += config_distance(configs[i], configs[self.medoid_indices[c]])
        return costs

    def check(self, pool: PoolLike) -> None:
        """Raise AssertionError if the clustering is not self-consistent."""
        configs = _configs(pool)
        assert len(self.assignment) == len(configs)
        assert len(self.medoid_indices) == self.k == len(set(self.medoid_indices))
        total = 0
        for i, c in enumerate(self.assignment):
            d = [config_distance(configs[i], configs[m]) for m in self.medoid_indices]
            assert d[c] == min(d) and c == d.index(min(d)), f"pool index {i} misassigned"
            total += d[c]
        assert total == self.total_cost

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "medoid_indices": list(self.medoid_indices),
            "assignment": list(self.assignment),
            "total_cost": self.total_cost,
            "cost_history": list(self.cost_history),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Clustering":
        return cls(
            doc["k"],
            tuple(doc["medoid_indices"]),
            tuple(doc["assignment"]),
            doc["total_cost"],
            tuple(doc.get("cost_history", ())),
        )


def _pam(dist: np.ndarray, weights: np.ndarray, k: int, order: np.ndarray) -> tuple[list[int], list[int]]:
    """Weighted PAM on a distinct-point distance matrix.

    ``order`` is a permutation of candidate indices used only to break ties
    in BUILD. Returns the medoid list and the cost after BUILD and after
    every accepted swap.
    """
    n = dist.shape[0]
    # BUILD: first medoid minimises total weighted distance
    totals = dist @ weights
    medoids = [int(min(order, key=lambda c: totals[c]))]
    nearest = dist[medoids[0]].copy()
    while len(medoids) < k:
        best, best_gain = None, -1
        for c in order:
            if c in medoids:
                continue
            gain = int((weights * np.maximum(nearest - dist[c], 0)).sum())
            if gain > best_gain:
                best, best_gain = int(c), gain
        medoids.append(best)
        nearest = np.minimum(nearest, dist[best])
    history = [int((weights * nearest).sum())]

    # SWAP: steepest descent over all (medoid, non-medoid) exchanges
    while True:
        current = history[-1]
        dm = dist[medoids]  # k x n
        best_swap, best_cost = None, current
        for pos in range(k):
            if k > 1:
                others = np.delete(dm, pos, axis=0).min(axis=0)
            else:
                others = np.full(n, np.iinfo(np.int64).max // 4)
            costs = (weights * np.minimum(others[None, :], dist)).sum(axis=1)
            for o in np.argsort(costs, kind="stable"):
                if o in medoids:
                    continue
                if costs[o] < best_cost:
                    best_swap, best_cost = (pos, int(o)), int(costs[o])
                break
        if best_swap is None:
            return medoids, history
        medoids[best_swap[0]] = best_swap[1]
        history.append(best_cost)


def kmedoids(pool: PoolLike, k: int, seed: int = 0) -> Clustering:
    """Partition the pool into ``k`` clusters around pool members.

    Raises :class:`KTooLarge` when ``k`` exceeds the number of distinct
    configurations. Deterministic for a given seed; the seed only affects
    tie-breaking during BUILD.
    """
    configs = _configs(pool)
    if k < 1:
        raise ValueError("k must be >= 1")
    first_seen: dict[tuple[SettingLevel, ...], int] = {}
    counts: dict[tuple[SettingLevel, ...], int] = {}
    for i, cfg in enumerate(configs):
        first_seen.setdefault(cfg.vector, i)
        counts[cfg.vector] = counts.get(cfg.vector, 0) + 1
    distinct = list(first_seen)
    if k > len(distinct):
        raise KTooLarge(f"k={k} exceeds the {len(distinct)} distinct configurations in the pool")

    reps = [configs[first_seen[v]] for v in distinct]
    dist = distance_matrix(reps)
    weights = np.array([counts[v] for v in distinct], dtype=np.int64)
    order = np.random.default_rng(seed).permutation(len(distinct))
    chosen, history = _pam(dist, weights, k, order)

    medoid_indices = tuple(sorted(first_seen[distinct[c]] for c in chosen))
    med_cfgs = [configs[m] for m in medoid_indices]
    assignment = []
    total = 0
    for cfg in configs:
        d = [config_distance(cfg, m) for m in med_cfgs]
        c = d.index(min(d))
        assignment.append(c)
        total += d[c]
    return Clustering(k, medoid_indices, tuple(assignment), total, tuple(history))


@dataclass(frozen=True)
class SelectionOutcome:
    final: Configuration
    strategy: Strategy
    candidates_tested: tuple[tuple[Configuration, float], ...] = ()
    pool_index: int | None = None
    clustering: Clustering | None = None
    solve_count: int = 0

    def __post_init__(self):
        if self.strategy is Strategy.VALIDATED:
            if not self.candidates_tested:
                raise ValueError("validated selection needs tested candidates")
            top = max(m for _, m in self.candidates_tested)
            if not any(c == self.final and m == top for c, m in self.candidates_tested):
                raise ValueError("validated selection must attain the best median")


def select_cold_start(clustering: Clustering, pool: PoolLike) -> SelectionOutcome:
    """Medoid of the largest cluster (then lower within-cluster cost, then lower index)."""
    configs = _configs(pool)
    sizes = clustering.sizes()
    within = clustering.within_costs(configs)
    best = min(range(clustering.k), key=lambda c: (-sizes[c], within[c], c))
    idx = clustering.medoid_indices[best]
    final = configs[idx].with_provenance(Provenance.ensemble(Strategy.COLD_START.value))
    return SelectionOutcome(final, Strategy.COLD_START, pool_index=idx, clustering=clustering)


def median(values: Iterable[float]) -> float:
    return float(statistics.median(list(values)))


def select_validated(
    medoids: Sequence[Configuration],
    val_results: Mapping[Configuration, Sequence[float]],
    *,
    clustering: Clustering | None = None,
    solve_count: int = 0,
) -> SelectionOutcome:
    """Medoid with the highest median validation improvement.

    Ties go to fewer non-Default levels, then to the earlier medoid.
    """
    if not medoids:
        raise EmptyPool("no medoids to select from")
    scored = []
    for pos, cfg in enumerate(medoids):
        values = val_results.get(cfg)
        if not values:
            raise MissingResults(f"no validation results for medoid {pos}")
        scored.append((cfg, median(values), pos))
    final, _, pos = min(scored, key=lambda t: (-t[1], t[0].n_non_default(), t[2]))
    tested = tuple((cfg, m) for cfg, m, _ in scored)
    pool_index = clustering.medoid_indices[pos] if clustering is not None else None
    return SelectionOutcome(
        final.with_provenance(Provenance.ensemble(Strategy.VALIDATED.value)),
        Strategy.VALIDATED,
        tested,
        pool_index=pool_index,
        clustering=clustering,
        solve_count=solve_count,
    )


def ensemble_average(pool: PoolLike) -> Configuration:
    """Per-separator mean of level ordinals, rounded half up."""
    configs = _configs(pool)
    n = len(configs)
    vector = []
    for j in range(len(configs[0].vector)):
        s = sum(int(c.vector[j]) for c in configs)
        # floor(s/n + 1/2) in integers
        vector.append(SettingLevel((2 * s + n) // (2 * n)))
    base = configs[0]
    return Configuration(base.catalog_ref, base.ids, tuple(vector), Provenance.ensemble(Strategy.AVERAGE.value))


def ensemble_mode(pool: PoolLike) -> Configuration:
    """Most frequent whole configuration; ties to fewer non-Default levels, then earliest."""
    configs = _configs(pool)
    counts: dict[tuple, int] = {}
    first: dict[tuple, int] = {}
    for i, c in enumerate(configs):
        counts[c.vector] = counts.get(c.vector, 0) + 1
        first.setdefault(c.vector, i)
    vec = min(counts, key=lambda v: (-counts[v], configs[first[v]].n_non_default(), first[v]))
    return configs[first[vec]].with_provenance(Provenance.ensemble(Strategy.MODE.value))


def ensemble_smallest(pool: PoolLike) -> Configuration:
    """Configuration with the fewest separators not Off; ties to the earliest."""
    configs = _configs(pool)
    idx = min(range(len(configs)), key=lambda i: (configs[i].n_enabled(), i))
    return configs[idx].with_provenance(Provenance.ensemble(Strategy.SMALLEST.value))


def validate_medoids(pool: PoolLike, k: int, evaluator, val_instances, *, seed: int = 0):
    """LLM(k): cluster, evaluate the k medoids on the validation set, keep the best median.

    ``evaluator`` is a :class:`sepconf.harness.Evaluator`. Returns the
    selection and the validation records of each medoid, in medoid order.
    """
    configs = _configs(pool)
    clustering = kmedoids(configs, k, seed=seed)
    medoids = [configs[m] for m in clustering.medoid_indices]
    before = evaluator.config_solves
    records = evaluator.evaluate_many(medoids, val_instances)
    results = {}
    for cfg, recs in zip(medoids, records):
        good = [r.improvement for r in recs if r.ok]
        if not good:
            raise MissingResults(f"every validation run failed for medoid {cfg.short()}")
        results[cfg] = good
    outcome = select_validated(medoids, results, clustering=clustering,
                               solve_count=evaluator.config_solves - before)
    return outcome, records
