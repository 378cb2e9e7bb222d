"""LLM-backed oracle: chat-completion transport plus the two-stage prompt chain."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import httpx

from .base import TRANSPORT, UNPARSEABLE, OracleFailure, OracleRequest, OracleResponse
from .cache import Exchange, ExchangeCache
from .parsing import STRICT, parse_predicates
from .prompts import build_prompt_stage1, build_prompt_stage2, conversation

log = logging.getLogger(__name__)

ENV_API_KEY = "SOUNDHTN_API_KEY"
ENV_BASE_URL = "SOUNDHTN_BASE_URL"
ENV_MODEL = "SOUNDHTN_MODEL"
ENV_TEMPERATURE = "SOUNDHTN_TEMPERATURE"

DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4-turbo"

Transport = Callable[[list[dict[str, str]]], str]


@dataclass
class ChatTransport:
    """Minimal OpenAI-compatible ``/chat/completions`` client.

    Retries timeouts, connection errors, 429 and 5xx responses with
    exponential backoff; anything still failing becomes
    ``OracleFailure(transport)``.
    """

    api_key: str = ""
    base_url: str = DEFAULT_BASE_URL
    model: str = DEFAULT_MODEL
    temperature: float = 1.0
    timeout: float = 60.0
    retries: int = 3
    backoff: float = 1.0
    client: Optional[httpx.Client] = None
    sleep: Callable[[float], None] = field(default=time.sleep, repr=False)

    @classmethod
    def from_env(cls, **overrides) -> ChatTransport:
        env = os.environ
        settings = dict(
            api_key=env.get(ENV_API_KEY) or env.get("OPENAI_API_KEY", ""),
            base_url=env.get(ENV_BASE_URL) or env.get("OPENAI_BASE_URL") or DEFAULT_BASE_URL,
            model=env.get(ENV_MODEL, DEFAULT_MODEL),
            temperature=float(env.get(ENV_TEMPERATURE, "1.0")),
        )
        settings.update(overrides)
        return cls(**settings)

    def __call__(self, messages: list[dict[str, str]]) -> str:
        if not self.api_key:
            raise OracleFailure(TRANSPORT, f"no API key configured (set {ENV_API_KEY})")
        client = self.client or httpx.Client(timeout=self.timeout)
        url = self.base_url.rstrip("/") + "/chat/completions"
        body = {"model": self.model, "messages": messages, "temperature": self.temperature}
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last = "no attempt made"
        try:
            for attempt in range(self.retries + 1):
                if attempt:
                    self.sleep(self.backoff * 2 ** (attempt - 1))
                try:
                    resp = client.post(url, json=body, headers=headers, timeout=self.timeout)
                except httpx.HTTPError as exc:
                    last = f"{type(exc).__name__}: {exc}"
                    log.warning("chat request failed (attempt %d): %s", attempt + 1, last)
                    continue
                if resp.status_code == 429 or resp.status_code >= 500:
                    last = f"HTTP {resp.status_code}"
                    log.warning("chat request failed (attempt %d): %s", attempt + 1, last)
                    continue
                if resp.status_code >= 400:
                    raise OracleFailure(TRANSPORT, f"HTTP {resp.status_code}: {resp.text[:200]}")
                try:
                    return resp.json()["choices"][0]["message"]["content"] or ""
                except (ValueError, KeyError, IndexError, TypeError) as exc:
                    raise OracleFailure(TRANSPORT, f"malformed completion payload: {exc}") from exc
        finally:
            if self.client is None:
                client.close()
        raise OracleFailure(TRANSPORT, f"gave up after {self.retries + 1} attempts: {last}")


class LLMOracle:
    """Queries a chat model twice per decomposition (breakdown, then mapping
    to operator calls) and parses the second answer.

    With a cache attached, exchanges are looked up by request fingerprint
    (salted with the attempt number so retries are fresh queries) and every
    new exchange is recorded, including ones whose answer fails to parse.
    """

    stochastic = True

    def __init__(
        self,
        transport: Transport,
        cache: Optional[ExchangeCache] = None,
        policy: str = STRICT,
        attempt: int = 0,
    ):
        self.transport = transport
        self.cache = cache
        self.policy = policy
        self.attempt = attempt

    def decompose(self, request: OracleRequest) -> OracleResponse:
        fingerprint = request.fingerprint(salt=f"attempt={self.attempt}")
        cached = self.cache.get(fingerprint) if self.cache is not None else None
        if cached is not None:
            return self._parse(request, cached.responses, "cache")

        prompt1 = build_prompt_stage1(request)
        response1 = self.transport(conversation(prompt1))
        if not response1.strip():
            raise OracleFailure(UNPARSEABLE, "empty breakdown from stage 1")
        prompt2 = build_prompt_stage2(request, response1)
        response2 = self.transport(conversation(prompt2))
        try:
            out = self._parse(request, (response1, response2), "live")
        except OracleFailure:
            self._record(fingerprint, (prompt1, prompt2), (response1, response2), ())
            raise
        self._record(fingerprint, (prompt1, prompt2), (response1, response2), out.tasks)
        return out

    def _parse(self, request: OracleRequest, responses: tuple[str, str], source: str) -> OracleResponse:
        result = parse_predicates(responses[1], request.domain, request.constants, self.policy)
        return OracleResponse(result.tasks, tuple(responses), source, result.rejected)

    def _record(self, fingerprint, prompts, responses, tasks) -> None:
        if self.cache is not None:
            self.cache.put(Exchange(fingerprint, tuple(prompts), tuple(responses), tuple(map(str, tasks))))
