"""Configure from an MPS file alone: structure histogram -> descriptions -> pool -> LLM(0)."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .catalog import ConfigurationPool, SeparatorCatalog
from .ensemble import Clustering, SelectionOutcome, kmedoids, select_cold_start
from .errors import NoBlockFound, NoDescriptions, PoolIncomplete
from .llm.clients import LlmClient
from .llm.pool import PoolResult, SampleFailure, generate_pool
from .llm.prompts import (
    DEFAULT_MODEL,
    DEFAULT_TEMPERATURE,
    ProblemCard,
    PromptBundle,
    PromptFlags,
    build_description_prompt,
    parse_descriptions,
)
from .mps import StructureHistogram, histogram, parse_mps

log = logging.getLogger(__name__)

# generated cards carry no LaTeX, so only the separator list and the text go in
TEXTFREE_FLAGS = PromptFlags(separator_descriptions=True, problem_text=True, latex_model=False)


@dataclass(frozen=True)
class TextFreePlan:
    k_desc: int = 5
    configs_per_desc: int = 20
    k_clusters: int = 5
    retry_budget: int = 3
    temperature: float = DEFAULT_TEMPERATURE
    model_id: str = DEFAULT_MODEL

    def __post_init__(self):
        if min(self.k_desc, self.configs_per_desc, self.k_clusters, self.retry_budget) < 1:
            raise ValueError("text-free plan counts must all be >= 1")

    @property
    def pool_size(self) -> int:
        return self.k_desc * self.configs_per_desc

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class TextFreeResult:
    outcome: SelectionOutcome
    histogram: StructureHistogram
    description_prompt: PromptBundle
    cards: tuple[ProblemCard, ...]
    pool: ConfigurationPool
    segments: tuple[PoolResult, ...]
    clustering: Clustering
    k_used: int
    failures: tuple[SampleFailure, ...] = ()


def _descriptions(client: LlmClient, hist: StructureHistogram, plan: TextFreePlan
                  ) -> tuple[PromptBundle, list[ProblemCard]]:
    prompt = build_description_prompt(hist, plan.k_desc, temperature=plan.temperature, model_id=plan.model_id)
    for attempt in range(plan.retry_budget):
        raw = client.complete(prompt, f"desc:{attempt}")
        try:
            return prompt, parse_descriptions(raw, plan.k_desc)
        except NoBlockFound:
            log.info("description attempt %d gave no blocks", attempt)
    raise NoDescriptions(f"no problem descriptions after {plan.retry_budget} attempts")


def textfree_configure(instance_path: str | Path, catalog: SeparatorCatalog, client: LlmClient,
                       plan: TextFreePlan = TextFreePlan(), *, max_workers: int = 8) -> TextFreeResult:
    """Pick a configuration for ``instance_path`` without solving anything.

    Each generated description seeds its own pool segment; segments are
    concatenated in description order. A segment that exhausts its retries
    contributes the samples it did get.
    """
    hist = histogram(parse_mps(instance_path))
    prompt, cards = _descriptions(client, hist, plan)

    def expand(card: ProblemCard) -> PoolResult:
        try:
            return generate_pool(card, catalog, client, plan.configs_per_desc, TEXTFREE_FLAGS,
                                 plan.retry_budget, max_workers=max_workers, temperature=plan.temperature,
                                 model_id=plan.model_id, source=card.source_index)
        except PoolIncomplete as exc:
            log.warning("description %s: %s", card.source_index, exc)
            return exc.pool

    workers = max(1, min(len(cards), max_workers))
    with ThreadPoolExecutor(max_workers=workers) as ex:
        segments = list(ex.map(expand, cards))

    configs = tuple(cfg for seg in segments for cfg in seg.pool)
    pool = ConfigurationPool(catalog.ref, configs)
    distinct = len({c.vector for c in configs})
    k = min(plan.k_clusters, distinct)
    if k < plan.k_clusters:
        log.warning("pool has %d distinct configurations; clustering with k=%d", distinct, k)
    clustering = kmedoids(pool, k)
    outcome = select_cold_start(clustering, pool)
    return TextFreeResult(
        outcome=outcome,
        histogram=hist,
        description_prompt=prompt,
        cards=tuple(cards),
        pool=pool,
        segments=tuple(segments),
        clustering=clustering,
        k_used=k,
        failures=tuple(f for seg in segments for f in seg.failures),
    )
