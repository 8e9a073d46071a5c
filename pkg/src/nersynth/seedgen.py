"""Seed sampling and prompt construction for the generation loop.

Each generation call embeds m seed datapoints and asks for n new ones; a plan
schedules k such calls. Sampling is keyed per call index so calls can be
rendered in any order (or concurrently) with identical results.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterator, Sequence

from .corpus import DataPoint

if TYPE_CHECKING:
    from .datasets import Dataset

USER_PROMPT_TEMPLATE = (
    "Help me make a {language} Named Entity Recognition dataset. "
    "Please give me {n} new datapoints, formatted as a single JSON object. "
    "Make sure the examples are unique and diverse. "
    "Here are some examples to get you started:"
)

SYSTEM_PROMPT_BASE = (
    "You are a helpful model that helps build text-based datasets, "
    "but does not produce any conversation besides the text it is asked to produce."
)

# Providers without a JSON output mode get the output-format reminder appended.
SYSTEM_PROMPT_PLAIN = SYSTEM_PROMPT_BASE + " You only output JSON strings."


class ProviderKind(str, Enum):
    """Whether the provider enforces JSON output itself (structured) or not (open)."""

    OPEN = "open"
    STRUCTURED = "structured"


@dataclass(frozen=True)
class GenerationPlan:
    """The (m, n, k) call schedule for one language."""

    m: int = 10
    n: int = 20
    k: int = 500
    compile_cap: int = 5000
    language: str = "English"
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1 or self.k < 1:
            raise ValueError("m, n and k must all be >= 1")
        if self.compile_cap < 1:
            raise ValueError("compile_cap must be >= 1")

    @property
    def requested(self) -> int:
        """Total datapoints requested across the whole plan (n per call, k calls)."""
        return self.n * self.k

    def to_json_obj(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "compile_cap": self.compile_cap,
            "language": self.language,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "GenerationPlan":
        return cls(**obj)


@dataclass(frozen=True)
class PromptBundle:
    """Rendered system+user prompt for one generation call."""

    system_text: str
    user_text: str
    call_index: int = 0


def serialize_seed(point: DataPoint) -> str:
    """One seed example in the same JSON shape the model is asked to produce."""
    return json.dumps(
        {"tokens": list(point.tokens), "ner_tags": list(point.tags)},
        ensure_ascii=False,
    )


def sample_seeds(dataset: "Dataset", m: int, rng: random.Random) -> list[DataPoint]:
    """Sample m datapoints without replacement; reproducible given the rng state."""
    if m > len(dataset.points):
        raise ValueError(f"cannot sample {m} seeds from {len(dataset.points)} datapoints")
    return rng.sample(list(dataset.points), m)


def build_prompt(
    seeds: Sequence[DataPoint],
    n: int,
    language: str,
    provider_kind: ProviderKind = ProviderKind.OPEN,
    *,
    call_index: int = 0,
) -> PromptBundle:
    """Render the generation prompt around the given seed examples."""
    if not seeds:
        raise ValueError("seed list must not be empty")
    header = USER_PROMPT_TEMPLATE.format(language=language, n=n)
    body = "\n".join(serialize_seed(p) for p in seeds)
    system = (
        SYSTEM_PROMPT_PLAIN if provider_kind == ProviderKind.OPEN else SYSTEM_PROMPT_BASE
    )
    return PromptBundle(
        system_text=system,
        user_text=f"{header}\n\n{body}",
        call_index=call_index,
    )


def _call_rng(rng_seed: int, call_index: int) -> random.Random:
    # String seeding hashes via sha512 inside random.seed, so it is stable
    # across processes and platforms regardless of PYTHONHASHSEED.
    return random.Random(f"{rng_seed}:{call_index}")


def bundle_for_call(
    plan: GenerationPlan,
    dataset: "Dataset",
    call_index: int,
    provider_kind: ProviderKind = ProviderKind.OPEN,
) -> PromptBundle:
    """Render the prompt for one call independently of every other call."""
    rng = _call_rng(plan.rng_seed, call_index)
    seeds = sample_seeds(dataset, plan.m, rng)
    return build_prompt(
        seeds, plan.n, plan.language, provider_kind, call_index=call_index
    )


def plan_calls(
    plan: GenerationPlan,
    dataset: "Dataset",
    provider_kind: ProviderKind = ProviderKind.OPEN,
) -> Iterator[tuple[int, PromptBundle]]:
    """Yield (call_index, PromptBundle) for all k calls of the plan."""
    for i in range(plan.k):
        yield i, bundle_for_call(plan, dataset, i, provider_kind)
