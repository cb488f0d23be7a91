"""LLM clients: a scripted deterministic mock and a chat-completion HTTP client."""

from __future__ import annotations

import hashlib
import json
import logging
import time
import urllib.error
import urllib.request
from typing import Callable, Protocol

from ..reportgen import PromptBundle

log = logging.getLogger(__name__)

_MARKERS = {"false_alarm": "FALSE ALARM", "real_bug": "REAL BUG", "unknown": "UNKNOWN"}


class TransportError(Exception):
    retryable = True


class Client(Protocol):
    def generate(self, bundle: PromptBundle) -> list[str]: ...


def _as_response(entry: str, index: int) -> str:
    if entry in _MARKERS:
        return f"Scripted sample {index}.\nVERDICT: {_MARKERS[entry]}"
    return entry


class MockClient:
    """Offline client.

    ``script`` is ``{"default": [...], "rules": [{"contains": str, "responses": [...]}]}``.
    Entries are either raw response text or one of ``false_alarm``, ``real_bug``,
    ``unknown``; lists shorter than ``n`` are cycled.  The first rule whose
    ``contains`` string occurs in the user prompt wins.  Without a matching rule
    or default, responses are derived from a hash of the prompt.
    """

    def __init__(self, script: dict | None = None):
        self.script = script or {}

    @classmethod
    def from_file(cls, path) -> "MockClient":
        with open(path, "rb") as fh:
            return cls(json.load(fh))

    def _scripted(self, user: str) -> list[str] | None:
        for rule in self.script.get("rules", []):
            if rule.get("contains", "") in user:
                return list(rule["responses"])
        default = self.script.get("default")
        if default is None:
            return None
        return [default] if isinstance(default, str) else list(default)

    def generate(self, bundle: PromptBundle) -> list[str]:
        entries = self._scripted(bundle.user)
        out = []
        for i in range(bundle.n_samples):
            if entries:
                out.append(_as_response(entries[i % len(entries)], i))
            else:
                digest = hashlib.sha256(f"{i}\0{bundle.user}".encode("utf-8")).digest()
                choice = ("false_alarm", "real_bug")[digest[0] % 2]
                out.append(_as_response(choice, i))
        return out


class ChatCompletionClient:
    """POSTs ``{model, messages, n, temperature}`` and reads ``choices[].message.content``."""

    def __init__(self, endpoint: str, model: str, api_key: str | None = None, timeout: float = 120.0,
                 attempts: int = 3, backoff: float = 1.0, sleep: Callable[[float], None] = time.sleep):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self.sleep = sleep

    def _post(self, body: bytes) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=body, headers=headers, method="POST")
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            return json.loads(resp.read())

    def generate(self, bundle: PromptBundle) -> list[str]:
        n = bundle.n_samples
        body = json.dumps({"model": self.model, "messages": bundle.messages(), "n": n,
                           "temperature": bundle.temperature}).encode("utf-8")
        last: Exception | None = None
        for attempt in range(self.attempts):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                doc = self._post(body)
                choices = sorted(doc["choices"], key=lambda c: c.get("index", 0))
                texts = [c["message"]["content"] for c in choices]
                if len(texts) < n:
                    raise TransportError(f"partial batch: {len(texts)} of {n} samples")
                return texts[:n]
            except (urllib.error.URLError, OSError, ValueError, KeyError, TypeError, TransportError) as err:
                last = err
                log.warning("attempt %d/%d to %s failed: %s", attempt + 1, self.attempts, self.endpoint, err)
        raise TransportError(f"{self.endpoint}: giving up after {self.attempts} attempts ({last})")


def query_llm(bundle: PromptBundle, client: Client) -> list[str]:
    """Exactly ``bundle.n_samples`` responses in sample-index order."""
    out = client.generate(bundle)
    if len(out) != bundle.n_samples:
        raise TransportError(f"client returned {len(out)} of {bundle.n_samples} samples")
    return list(out)
