"""Deterministic scripted LLM behaviour shared by several test modules."""

import hashlib
import random

from sepconf.catalog import SettingLevel
from sepconf.llm.prompts import DESCRIPTION_SYSTEM


def nonce_rng(prompt, nonce, salt=""):
    digest = hashlib.sha256(f"{prompt.digest}|{nonce}|{salt}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def config_block(ids, vector):
    body = "\n".join(f"{i}: {lv.label}" for i, lv in zip(ids, vector))
    return f"Here is my choice.\n\n```config\n{body}\n```\n"


def noisy_variant(center, rng, p_exact=0.3, max_flips=3):
    vec = list(center)
    if rng.random() < p_exact:
        return vec
    for j in rng.sample(range(len(vec)), rng.randint(1, max_flips)):
        vec[j] = rng.choice([lv for lv in SettingLevel if lv != vec[j]])
    return vec


def planted_script(catalog, center, n_desc=5):
    """Descriptions for description prompts, noisy variants of ``center`` otherwise."""
    ids = catalog.ids

    def script(prompt, nonce):
        if prompt.system_text == DESCRIPTION_SYSTEM:
            blocks = [f"```description\nProblem {i}\nDecide which items to pick; family {i}.\n```"
                      for i in range(n_desc)]
            return "\n\n".join(blocks)
        return config_block(ids, noisy_variant(center, nonce_rng(prompt, nonce)))

    return script


def record_pool_fixtures(fixtures, catalog, card, script, size, **kw):
    """Run ``script`` through a recording client so the CLI can replay it."""
    from sepconf.errors import PoolIncomplete
    from sepconf.llm import FixtureStore, RecordingClient, ScriptedClient, generate_pool

    client = RecordingClient(ScriptedClient(script), FixtureStore(fixtures))
    try:
        return generate_pool(card, catalog, client, size, **kw)
    except PoolIncomplete as exc:
        return exc.pool


def write_ids(path, ids):
    path.write_text("".join(f"{i}\n" for i in ids))
    return path
