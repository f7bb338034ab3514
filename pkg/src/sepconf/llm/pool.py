"""Sampling a configuration pool from the LLM with per-sample retries."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..catalog import Configuration, ConfigurationPool, Provenance, SeparatorCatalog
from ..errors import PoolIncomplete, SepconfError
from .clients import LlmClient
from .prompts import (
    DEFAULT_MODEL,
    DEFAULT_TEMPERATURE,
    ProblemCard,
    PromptBundle,
    PromptFlags,
    build_config_prompt,
    parse_config_response,
)

log = logging.getLogger(__name__)

DEFAULT_RETRY_BUDGET = 3


@dataclass(frozen=True)
class SampleFailure:
    sample: int
    attempt: int
    error: str
    message: str
    raw: str | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class PoolResult:
    pool: ConfigurationPool
    failures: tuple[SampleFailure, ...]
    completions: int
    prompt: PromptBundle

    @property
    def retries(self) -> int:
        """Rejected completions; each one cost an extra attempt or ended a sample."""
        return len(self.failures)


def _draw(client: LlmClient, prompt: PromptBundle, catalog: SeparatorCatalog, sample: int,
          retry_budget: int, source: int | None):
    failures = []
    for attempt in range(retry_budget):
        nonce = f"{sample}:{attempt}"
        # client errors (no endpoint, replay miss) are not the sample's fault and propagate
        raw = client.complete(prompt, nonce)
        try:
            cfg = parse_config_response(raw, catalog, Provenance.llm_sample(sample, source))
            return cfg, failures, attempt + 1
        except SepconfError as exc:
            failures.append(SampleFailure(sample, attempt, type(exc).__name__, str(exc), raw))
            log.info("sample %d attempt %d rejected: %s", sample, attempt, exc)
    return None, failures, retry_budget


def generate_pool(
    card: ProblemCard,
    catalog: SeparatorCatalog,
    client: LlmClient,
    pool_size: int,
    flags: PromptFlags = PromptFlags(),
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    *,
    max_workers: int = 8,
    temperature: float = DEFAULT_TEMPERATURE,
    model_id: str = DEFAULT_MODEL,
    source: int | None = None,
) -> PoolResult:
    """Draw ``pool_size`` validated configurations.

    Sample ``i`` gets up to ``retry_budget`` completions with nonces
    ``"i:0"``, ``"i:1"``, ... Results are assembled in sample order whatever
    order the completions finish in. Raises :class:`PoolIncomplete` (with
    the partial :class:`PoolResult` as ``.pool``) if any sample exhausts its
    budget.
    """
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    if retry_budget < 1:
        raise ValueError("retry_budget must be >= 1")
    prompt = build_config_prompt(card, catalog, flags, temperature=temperature, model_id=model_id)

    def one(i):
        return _draw(client, prompt, catalog, i, retry_budget, source)

    workers = max(1, min(max_workers, pool_size))
    with ThreadPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(one, range(pool_size)))

    configs: list[Configuration] = []
    failures: list[SampleFailure] = []
    completions = 0
    for cfg, fails, used in results:
        completions += used
        failures.extend(fails)
        if cfg is not None:
            configs.append(cfg)
    result = PoolResult(ConfigurationPool(catalog.ref, tuple(configs)), tuple(failures), completions, prompt)
    if len(configs) < pool_size:
        raise PoolIncomplete(
            f"only {len(configs)} of {pool_size} samples produced a valid configuration",
            pool=result,
            failures=result.failures,
        )
    return result
