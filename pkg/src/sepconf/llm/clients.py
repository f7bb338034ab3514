"""Chat-completion clients: live HTTP, fixture replay/recording, and scripted mocks.

Every client implements ``complete(prompt, nonce) -> str``. The nonce is an
opaque string chosen by the caller (``"<sample>:<attempt>"`` for pool
generation) so that replay and scripted clients are deterministic given the
prompt digest and nonce, whatever order requests arrive in.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from pathlib import Path
from typing import Callable, Protocol

import httpx

from ..errors import ReplayMiss, SepconfError
from .prompts import PromptBundle

log = logging.getLogger(__name__)

ENV_URL = "SEPCONF_LLM_URL"
ENV_KEY = "SEPCONF_LLM_API_KEY"
ENV_MODEL = "SEPCONF_LLM_MODEL"
DEFAULT_URL = "https://api.openai.com/v1/chat/completions"


class LlmClient(Protocol):
    def complete(self, prompt: PromptBundle, nonce: str) -> str: ...


class LlmUnavailable(SepconfError):
    pass


class HttpChatClient:
    """OpenAI-compatible chat-completions endpoint.

    Transport errors and 429/5xx responses are retried with exponential
    backoff; anything else surfaces as :class:`LlmUnavailable`.
    """

    def __init__(
        self,
        url: str | None = None,
        api_key: str | None = None,
        model_id: str | None = None,
        *,
        timeout: float = 120.0,
        max_attempts: int = 5,
        backoff: float = 2.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.url = url or os.environ.get(ENV_URL, DEFAULT_URL)
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_KEY)
        self.model_id = model_id or os.environ.get(ENV_MODEL)
        self.max_attempts = max_attempts
        self.backoff = backoff
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        self._http = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def complete(self, prompt: PromptBundle, nonce: str) -> str:
        body = {
            "model": self.model_id or prompt.model_id,
            "temperature": prompt.temperature,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        }
        delay = self.backoff
        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = self._http.post(self.url, json=body)
            except httpx.TransportError as exc:
                reason = f"transport error: {exc}"
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()["choices"][0]["message"]["content"] or ""
                    except (ValueError, KeyError, IndexError, TypeError):
                        raise LlmUnavailable("endpoint returned an unexpected payload") from None
                if resp.status_code != 429 and resp.status_code < 500:
                    raise LlmUnavailable(f"endpoint rejected request: HTTP {resp.status_code}")
                reason = f"HTTP {resp.status_code}"
            if attempt == self.max_attempts:
                raise LlmUnavailable(f"giving up after {attempt} attempts ({reason})")
            log.warning("completion attempt %d failed (%s); retrying in %.1fs", attempt, reason, delay)
            time.sleep(delay)
            delay *= 2
        raise AssertionError("unreachable")

    def close(self):
        self._http.close()


class FixtureStore:
    """Directory of recorded completions, one JSON file per prompt digest.

    File layout::

        {"prompt": {...}, "responses": [{"nonce": "0:0", "text": "..."}, ...]}

    Responses are kept in recording order.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()

    def path_for(self, prompt: PromptBundle) -> Path:
        return self.root / f"{prompt.digest}.json"

    def load(self, prompt: PromptBundle) -> dict:
        path = self.path_for(prompt)
        if not path.exists():
            return {"prompt": _prompt_doc(prompt), "responses": []}
        return json.loads(path.read_text())

    def lookup(self, prompt: PromptBundle, nonce: str) -> str | None:
        for entry in self.load(prompt)["responses"]:
            if entry["nonce"] == nonce:
                return entry["text"]
        return None

    def record(self, prompt: PromptBundle, nonce: str, text: str) -> None:
        with self._lock:
            doc = self.load(prompt)
            doc["responses"] = [e for e in doc["responses"] if e["nonce"] != nonce]
            doc["responses"].append({"nonce": nonce, "text": text})
            self.root.mkdir(parents=True, exist_ok=True)
            path = self.path_for(prompt)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
            tmp.replace(path)


def _prompt_doc(prompt: PromptBundle) -> dict:
    return {
        "system": prompt.system_text,
        "user": prompt.user_text,
        "temperature": prompt.temperature,
        "model_id": prompt.model_id,
    }


class ReplayClient:
    """Serve completions from a :class:`FixtureStore`; never touches the network."""

    def __init__(self, store: FixtureStore | str | Path):
        self.store = store if isinstance(store, FixtureStore) else FixtureStore(store)

    def complete(self, prompt: PromptBundle, nonce: str) -> str:
        text = self.store.lookup(prompt, nonce)
        if text is None:
            raise ReplayMiss(f"no recorded response for prompt {prompt.digest[:12]} nonce {nonce}")
        return text


class RecordingClient:
    """Wrap a live client and write every completion into a fixture store."""

    def __init__(self, inner: LlmClient, store: FixtureStore | str | Path):
        self.inner = inner
        self.store = store if isinstance(store, FixtureStore) else FixtureStore(store)

    def complete(self, prompt: PromptBundle, nonce: str) -> str:
        text = self.inner.complete(prompt, nonce)
        self.store.record(prompt, nonce, text)
        return text


class ScriptedClient:
    """Deterministic mock driven by ``script(prompt, nonce) -> text``.

    Counts calls so tests can check retry accounting. Thread safe.
    """

    def __init__(self, script: Callable[[PromptBundle, str], str]):
        self.script = script
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt: PromptBundle, nonce: str) -> str:
        with self._lock:
            self.calls += 1
        return self.script(prompt, nonce)


class SerializedClient:
    """Adapter that serializes calls to a client that is not thread safe."""

    def __init__(self, inner: LlmClient):
        self.inner = inner
        self._lock = threading.Lock()

    def complete(self, prompt: PromptBundle, nonce: str) -> str:
        with self._lock:
            return self.inner.complete(prompt, nonce)
