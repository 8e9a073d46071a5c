"""Provider-agnostic chat-completion client plus a deterministic mock provider.

The real client speaks the OpenAI-compatible chat completions wire format and
retries transient failures with exponential backoff. The mock provider emits
responses seeded per call, injecting the known response-quality failure modes
(unequal lengths, run-on/truncated output, empty or continuation text) at
configurable proportions, so the whole pipeline can run offline.
"""

from __future__ import annotations

import json
import logging
import math
import os
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

import requests

from .corpus import LabelSpace
from .seedgen import PromptBundle

logger = logging.getLogger(__name__)


class GatewayError(Exception):
    """Base class for terminal provider-call failures."""


class AuthError(GatewayError):
    """Authentication failed or no API key was resolvable."""


class ProviderError(GatewayError):
    """Provider rejected the request with a non-retryable status."""


class MalformedPayloadError(GatewayError):
    """Provider returned a payload the client cannot interpret."""


class RetriesExhaustedError(GatewayError):
    """All retry attempts for a transient failure were used up."""


@dataclass(frozen=True)
class ProviderConfig:
    """Connection and sampling settings for one chat-completion provider."""

    endpoint_url: str
    model_name: str
    temperature: float = 0.8
    top_p: float = 0.8
    max_new_tokens: int = 8192
    structured_output: bool = False
    api_key_env: str | None = "OPENAI_API_KEY"
    max_retries: int = 3
    backoff_base_ms: int = 500
    timeout_s: float = 120.0

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not (0 < self.top_p <= 1):
            raise ValueError("top_p must be in (0, 1]")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")

    def to_json_obj(self) -> dict:
        return {
            "endpoint_url": self.endpoint_url,
            "model_name": self.model_name,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_new_tokens": self.max_new_tokens,
            "structured_output": self.structured_output,
            "api_key_env": self.api_key_env,
            "max_retries": self.max_retries,
            "backoff_base_ms": self.backoff_base_ms,
            "timeout_s": self.timeout_s,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ProviderConfig":
        return cls(**obj)


@dataclass(frozen=True)
class RawResponse:
    """Verbatim provider output for one call."""

    call_index: int
    text: str
    finish_reason: str  # "stop" | "length" | "error"
    latency_ms: int

    def to_json_obj(self) -> dict:
        return {
            "call_index": self.call_index,
            "text": self.text,
            "finish_reason": self.finish_reason,
            "latency_ms": self.latency_ms,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RawResponse":
        return cls(
            call_index=obj["call_index"],
            text=obj["text"],
            finish_reason=obj["finish_reason"],
            latency_ms=obj["latency_ms"],
        )


def write_responses(path: str | Path, responses: Iterable[RawResponse]) -> None:
    """Persist responses verbatim, one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for resp in responses:
            fh.write(json.dumps(resp.to_json_obj(), ensure_ascii=False) + "\n")


def read_responses(path: str | Path) -> list[RawResponse]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(RawResponse.from_json_obj(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{line_no}: bad response record: {exc}") from exc
    return out


def _build_payload(bundle: PromptBundle, config: ProviderConfig) -> dict:
    payload = {
        "model": config.model_name,
        "messages": [
            {"role": "system", "content": bundle.system_text},
            {"role": "user", "content": bundle.user_text},
        ],
        "temperature": config.temperature,
        "top_p": config.top_p,
        "max_tokens": config.max_new_tokens,
    }
    if config.structured_output:
        payload["response_format"] = {"type": "json_object"}
    return payload


def _parse_completion(body: dict) -> tuple[str, str]:
    try:
        choice = body["choices"][0]
        text = choice["message"]["content"]
        finish = choice.get("finish_reason", "stop")
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedPayloadError(f"unexpected completion payload: {exc}") from exc
    if not isinstance(text, str):
        raise MalformedPayloadError("completion content is not a string")
    return text, "length" if finish == "length" else "stop"


def complete(bundle: PromptBundle, config: ProviderConfig) -> RawResponse:
    """Run one chat-completion call, retrying transient failures.

    Retryable: HTTP 429, 5xx, timeouts and connection errors. Terminal: auth
    failures (401/403, or missing key), other 4xx, malformed payloads, and
    exhaustion of the retry budget.
    """
    headers = {"Content-Type": "application/json"}
    if config.api_key_env:
        key = os.environ.get(config.api_key_env)
        if not key:
            raise AuthError(f"environment variable {config.api_key_env} is not set")
        headers["Authorization"] = f"Bearer {key}"

    payload = _build_payload(bundle, config)
    start = time.monotonic()
    last_reason = "no attempt made"
    for attempt in range(config.max_retries + 1):
        if attempt:
            time.sleep(config.backoff_base_ms * 2 ** (attempt - 1) / 1000.0)
        try:
            http = requests.post(
                config.endpoint_url, json=payload, headers=headers, timeout=config.timeout_s
            )
        except requests.RequestException as exc:
            last_reason = f"transport error: {exc}"
            continue
        if http.status_code == 200:
            try:
                body = http.json()
            except ValueError as exc:
                raise MalformedPayloadError(f"response body is not JSON: {exc}") from exc
            text, finish = _parse_completion(body)
            latency = int((time.monotonic() - start) * 1000)
            return RawResponse(bundle.call_index, text, finish, latency)
        if http.status_code in (401, 403):
            raise AuthError(f"provider returned HTTP {http.status_code}")
        if http.status_code == 429 or http.status_code >= 500:
            last_reason = f"HTTP {http.status_code}"
            continue
        raise ProviderError(f"provider returned HTTP {http.status_code}: {http.text[:200]}")
    raise RetriesExhaustedError(
        f"call {bundle.call_index}: {config.max_retries} retries exhausted ({last_reason})"
    )


def run_plan(
    bundles: Iterable[PromptBundle],
    config: ProviderConfig | None = None,
    parallelism: int = 1,
    completer: Callable[[PromptBundle], RawResponse] | None = None,
) -> Iterator[RawResponse]:
    """Run every bundle, yielding exactly one response per bundle.

    Responses arrive as calls finish, so ordering follows completion, not
    call_index. Terminal per-call failures become finish_reason="error"
    responses instead of raising.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    if completer is None:
        if config is None:
            raise ValueError("run_plan needs a ProviderConfig or an explicit completer")
        completer = lambda b: complete(b, config)  # noqa: E731

    def call_one(bundle: PromptBundle) -> RawResponse:
        start = time.monotonic()
        try:
            return completer(bundle)
        except GatewayError as exc:
            logger.warning("call %d failed terminally: %s", bundle.call_index, exc)
            latency = int((time.monotonic() - start) * 1000)
            return RawResponse(bundle.call_index, "", "error", latency)

    done = failed = 0
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(call_one, b) for b in bundles]
        for fut in as_completed(futures):
            resp = fut.result()
            done += 1
            failed += resp.finish_reason == "error"
            if done % 25 == 0:
                logger.info("%d/%d calls done (%d failed)", done, len(futures), failed)
            yield resp
    logger.info("plan finished: %d calls, %d failed", done, failed)


# --- mock provider -----------------------------------------------------------

_CLASS_ORDER = ("well_formatted", "unequal_lengths", "run_on_incomplete", "empty_or_continuation")


@dataclass(frozen=True)
class InjectionProfile:
    """Per-candidate proportions of response-quality classes for the mock provider."""

    well_formatted: float = 1.0
    unequal_lengths: float = 0.0
    run_on_incomplete: float = 0.0
    empty_or_continuation: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        weights = self.weights()
        if any(w < 0 for w in weights):
            raise ValueError("proportions must be nonnegative")
        if not math.isclose(sum(weights), 1.0, abs_tol=1e-9):
            raise ValueError(f"proportions must sum to 1, got {sum(weights)}")

    def weights(self) -> list[float]:
        return [getattr(self, name) for name in _CLASS_ORDER]

    def to_json_obj(self) -> dict:
        return {name: getattr(self, name) for name in _CLASS_ORDER} | {
            "rng_seed": self.rng_seed
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "InjectionProfile":
        return cls(**obj)


_SYLLABLES = (
    "ba", "de", "ki", "lo", "mu", "na", "po", "ra", "su", "ti",
    "ve", "zo", "fa", "gi", "hu", "je", "ka", "li", "mo", "nu",
)

_CONTINUATION_PROSE = (
    "include a mix of names, locations, organizations and other entities "
    "so the dataset stays diverse."
)

_COUNT_RE = re.compile(r"give me (\d+) new datapoints")


def _requested_count(bundle: PromptBundle) -> int:
    m = _COUNT_RE.search(bundle.user_text)
    if m is None:
        raise ValueError("bundle user text does not state a requested datapoint count")
    return int(m.group(1))


def _mock_word(rng: random.Random) -> str:
    return "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 4)))


def _mock_point_obj(rng: random.Random, space: LabelSpace) -> dict:
    """A datapoint object satisfying every validity rule."""
    length = rng.randint(4, 12)
    tokens = [_mock_word(rng) for _ in range(length)]
    tags = [0] * length
    for _ in range(rng.randint(0, 2)):
        etype = rng.choice(space.entity_types)
        span_len = rng.randint(1, min(3, length))
        start = rng.randrange(0, length - span_len + 1)
        if any(tags[i] != 0 for i in range(start, start + span_len)):
            continue
        tokens[start] = tokens[start].capitalize()
        tags[start] = space.begin_id(etype)
        for i in range(start + 1, start + span_len):
            tokens[i] = tokens[i].capitalize()
            tags[i] = space.inside_id(etype)
    obj: dict = {"tokens": tokens, "ner_tags": tags}
    if rng.random() < 0.5:
        obj = {"id": str(rng.randrange(100000)), **obj}
    return obj


def _serialize(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False)


def mock_complete(
    bundle: PromptBundle, profile: InjectionProfile, space: LabelSpace
) -> RawResponse:
    """Deterministic offline stand-in for complete().

    Draws a quality class per requested candidate from the profile and emits a
    response text exhibiting it: well-formatted objects, length-mismatched
    objects, run-on objects (a token repeated 25+ times) or a truncated final
    object, while empty/continuation slots contribute no parseable object at
    all. Pure function of (profile, call_index, bundle text).
    """
    n = _requested_count(bundle)
    rng = random.Random(f"{profile.rng_seed}:{bundle.call_index}")
    classes = rng.choices(_CLASS_ORDER, weights=profile.weights(), k=n)

    parts: list[tuple[str, str]] = []  # (class, serialized object or prose)
    for cls in classes:
        if cls == "well_formatted":
            parts.append((cls, _serialize(_mock_point_obj(rng, space))))
        elif cls == "unequal_lengths":
            obj = _mock_point_obj(rng, space)
            delta = rng.randint(1, 3)
            if rng.random() < 0.5:
                obj["ner_tags"] = obj["ner_tags"] + [0] * delta
            else:
                obj["ner_tags"] = obj["ner_tags"][: max(0, len(obj["ner_tags"]) - delta)]
            parts.append((cls, _serialize(obj)))
        elif cls == "run_on_incomplete":
            obj = _mock_point_obj(rng, space)
            stuck = _mock_word(rng)
            repeats = [stuck] * rng.randint(25, 40)
            obj["tokens"] = obj["tokens"] + repeats
            obj["ner_tags"] = obj["ner_tags"] + [0] * len(repeats)
            parts.append((cls, _serialize(obj)))
        else:  # empty_or_continuation: this slot yields prose or nothing at all
            if rng.random() < 0.5:
                parts.append((cls, _CONTINUATION_PROSE))

    # A run-on slot landing last may surface as token-limit truncation instead
    # of a repeated token; nothing can follow the cut.
    finish_reason = "stop"
    object_idx = [i for i, (c, _) in enumerate(parts) if c != "empty_or_continuation"]
    if object_idx and parts[object_idx[-1]][0] == "run_on_incomplete" and rng.random() < 0.5:
        last = object_idx[-1]
        cls, serialized = parts[last]
        cut = serialized.rfind("[")
        cut = len(serialized) * 3 // 5 if cut <= 1 else min(cut + rng.randint(2, 8), len(serialized) - 2)
        parts = parts[:last] + [(cls, serialized[:cut])]
        finish_reason = "length"
        object_idx = [i for i, (c, _) in enumerate(parts) if c != "empty_or_continuation"]

    if not object_idx:
        text = "<EOS_TOKEN>"
        if any(c == "empty_or_continuation" for c, _ in parts):
            text += _CONTINUATION_PROSE
        return RawResponse(bundle.call_index, text, "stop", 0)

    layout = rng.choice(("data_object", "bare_array", "concat"))
    serialized = [parts[i][1] for i in object_idx]
    if layout == "data_object":
        text = '{"data": [' + ", ".join(serialized)
        text += "" if finish_reason == "length" else "]}"
    elif layout == "bare_array":
        text = "[" + ",\n".join(serialized)
        text += "" if finish_reason == "length" else "]"
    else:
        chunks = []
        if rng.random() < 0.5:
            chunks.append(f"Here are {n} new datapoints:")
        chunks.extend(s for _, s in parts)
        text = "\n".join(chunks)
        if finish_reason != "length" and rng.random() < 0.3:
            text = "```json\n" + text + "\n```"
    return RawResponse(bundle.call_index, text, finish_reason, 0)
