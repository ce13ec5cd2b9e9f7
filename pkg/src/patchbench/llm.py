"""Chat-completions client with fresh-context sampling and a replay cache.

Each sample is one independent request whose conversation contains exactly
two messages: a system prefix (the category's knowledge document plus its
few-shot examples — the portable stand-in for an assistant's retrieved
knowledge base) and the user prompt.  No request ever carries a previous
sample's output, mirroring a new thread per trial.

Responses are cached content-addressed by hash(config, prompt, index);
replay mode reads only the cache, which makes full evaluation runs
bitwise reproducible and network-free.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .benchmarks import BENCHMARKS, CATEGORIES, Category

DEFAULT_TEMPERATURE = 1.0  # provider default; k <= 3 needs no tuning
DEFAULT_MODEL = "gpt-4-0125-preview"
MAX_ATTEMPTS = 5
RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})

ENV_API_KEY = "LLM_API_KEY"
ENV_BASE_URL = "LLM_BASE_URL"
ENV_MODEL = "LLM_MODEL"


class PromptError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class LlmHttpError(Exception):
    code = "http-error"

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


class CacheMissError(Exception):
    code = "cache-miss"

    def __init__(self, key: str):
        super().__init__(f"no cached response for key {key}")
        self.key = key


@dataclass(frozen=True)
class AssistantConfig:
    """One category's generation setup: knowledge document + few-shots."""

    category_id: str
    knowledge_document: str
    examples: tuple[tuple[str, str], ...] = ()
    model_name: str = DEFAULT_MODEL
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        if not self.knowledge_document.strip():
            raise ValueError("knowledge_document must be non-empty")

    def system_prompt(self) -> str:
        parts = [self.knowledge_document.strip()]
        for label, code in self.examples:
            parts.append(f"### Example: {label}\n{code.strip()}")
        return "\n\n".join(parts)

    def canonical(self) -> str:
        return json.dumps(
            {
                "category": self.category_id,
                "knowledge": self.knowledge_document,
                "examples": list(self.examples),
                "model": self.model_name,
                "temperature": self.temperature,
            },
            sort_keys=True,
        )


def build_prompt(category_id: str, benchmark_id: str, rich: bool | None = None) -> str:
    """Instantiate the exact prompt template for (category, benchmark).

    The Max-family wording anchors the assistant on its few-shot examples
    ("Based on the examples given, ..."); the Web-Audio-family wording is
    the bare "Write {...} that implements {...}." because the anchored
    variant just makes those assistants parrot the examples.  Rich
    categories append the loops/randomness instruction.
    """
    category = CATEGORIES.get(category_id)
    if category is None:
        raise PromptError("unknown-category", f"unknown category {category_id!r}")
    benchmark = BENCHMARKS.get(benchmark_id)
    if benchmark is None:
        raise PromptError("unknown-benchmark", f"unknown benchmark {benchmark_id!r}")
    if category.template == "examples":
        prompt = (
            f"Based on the examples given, use {category.noun} to write code "
            f"that implements {benchmark.prompt_noun}."
        )
    else:
        prompt = f"Write {category.noun} that implements {benchmark.prompt_noun}."
    if rich if rich is not None else category.rich:
        prompt += f" Use for loops and/or {category.random_fn} in your code."
    return prompt


def cache_key(config: AssistantConfig, prompt: str, index: int) -> str:
    payload = f"{config.canonical()}\x1f{prompt}\x1f{index}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseCache:
    """Content-addressed response files; concurrent reads, serialized writes."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        self._write_lock = threading.Lock()

    def path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self.path(key)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["response"]

    def put(self, key: str, response: str) -> None:
        with self._write_lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            tmp = self.path(key).with_suffix(".tmp")
            tmp.write_text(
                json.dumps({"response": response}, ensure_ascii=False),
                encoding="utf-8",
            )
            os.replace(tmp, self.path(key))


@dataclass
class LlmClient:
    """Thin chat-completions HTTP client (provider-agnostic wire format)."""

    base_url: str | None = None
    api_key: str | None = None
    timeout: float = 120.0
    backoff_base: float = 1.0
    session: requests.Session = field(default_factory=requests.Session)

    def resolved_base_url(self) -> str:
        base = self.base_url or os.environ.get(ENV_BASE_URL)
        if not base:
            raise LlmHttpError(0, f"no endpoint configured (set {ENV_BASE_URL})")
        return base.rstrip("/")

    def complete(self, config: AssistantConfig, prompt: str) -> str:
        body = {
            "model": config.model_name,
            "messages": [
                {"role": "system", "content": config.system_prompt()},
                {"role": "user", "content": prompt},
            ],
            "temperature": config.temperature,
        }
        headers = {"Content-Type": "application/json"}
        key = self.api_key or os.environ.get(ENV_API_KEY)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        url = f"{self.resolved_base_url()}/chat/completions"
        last_status = 0
        for attempt in range(MAX_ATTEMPTS):
            try:
                response = self.session.post(url, json=body, headers=headers,
                                             timeout=self.timeout)
            except requests.RequestException as err:
                raise LlmHttpError(0, f"request failed: {err}") from err
            if response.status_code == 200:
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            last_status = response.status_code
            if response.status_code in RETRYABLE_STATUSES and attempt < MAX_ATTEMPTS - 1:
                time.sleep(self.backoff_base * 2**attempt)
                continue
            break
        raise LlmHttpError(last_status, f"endpoint returned {last_status} after retries")


def generate(config: AssistantConfig, prompt: str, n: int, *, mode: str = "live",
             cache: ResponseCache | None = None,
             client: LlmClient | None = None) -> list[str]:
    """Sample ``n`` raw responses, each from a fresh two-message context.

    Live mode asks the endpoint once per index and caches everything;
    replay mode touches only the cache and raises CacheMissError on holes.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode not in ("live", "replay"):
        raise ValueError(f"unknown mode {mode!r}")
    responses: list[str] = []
    for index in range(n):
        key = cache_key(config, prompt, index)
        cached = cache.get(key) if cache is not None else None
        if cached is not None:
            responses.append(cached)
            continue
        if mode == "replay":
            raise CacheMissError(key)
        text = (client or LlmClient()).complete(config, prompt)
        if cache is not None:
            cache.put(key, text)
        responses.append(text)
    return responses


# ---------------------------------------------------------------------------
# code extraction
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


def _longest_json_region(text: str) -> str | None:
    """Longest brace-balanced substring that parses as JSON.

    Restricting to parseable regions keeps extraction from chewing up
    loop bodies or prose braces, and is what makes the function a
    retraction (idempotent) on its own output.
    """
    best: str | None = None
    n = len(text)
    i = 0
    while i < n:
        if text[i] == "{":
            depth = 0
            in_string = False
            escaped = False
            for j in range(i, n):
                ch = text[j]
                if in_string:
                    if escaped:
                        escaped = False
                    elif ch == "\\":
                        escaped = True
                    elif ch == '"':
                        in_string = False
                    continue
                if ch == '"':
                    in_string = True
                elif ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth == 0:
                        candidate = text[i:j + 1]
                        if best is None or len(candidate) > len(best):
                            try:
                                json.loads(candidate)
                            except json.JSONDecodeError:
                                pass
                            else:
                                best = candidate
                        break
        i += 1
    return best


def _extract_once(text: str) -> tuple[str, str]:
    fences = _FENCE_RE.findall(text)
    if fences:
        return fences[-1].strip(), "fenced"
    region = _longest_json_region(text)
    if region is not None and region.strip() != text.strip():
        return region.strip(), "brace"
    return text.strip(), "whole"


def extract_code(raw_response: str) -> str:
    """Pull the code out of a raw model response (total and idempotent).

    The contents of the last fenced block win (models often restate the
    examples first and answer last); failing that, the longest embedded
    JSON region; failing that, the whole response.  Steps repeat until
    stable, so extracting an already-extracted answer is a no-op.
    """
    return extract_code_with_provenance(raw_response)[0]


def extract_code_with_provenance(raw_response: str) -> tuple[str, list[str]]:
    text = raw_response
    steps: list[str] = []
    for _ in range(10):
        extracted, method = _extract_once(text)
        if not steps or steps[-1] != method:
            steps.append(method)
        if extracted == text:
            break
        text = extracted
    return text, steps


def assistant_config_for(category: Category, model: str = DEFAULT_MODEL,
                         temperature: float = DEFAULT_TEMPERATURE) -> AssistantConfig:
    """Assemble the packaged knowledge document + examples for a category."""
    from .knowledge import EXAMPLES, KNOWLEDGE_DOCS

    return AssistantConfig(
        category_id=category.id,
        knowledge_document=KNOWLEDGE_DOCS[category.id],
        examples=tuple(EXAMPLES.get(category.id, ())),
        model_name=model,
        temperature=temperature,
    )
