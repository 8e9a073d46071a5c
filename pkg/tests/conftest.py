import random

import pytest

from nersynth.corpus import (
    DEFAULT_SPACE_3,
    DEFAULT_SPACE_4,
    DataPoint,
    EntitySpan,
    decode_spans,
    encode_spans,
)
from nersynth.datasets import Dataset, Provenance

DANISH_TOKENS = ("Lars", "Løkke", "Rasmussen", "besøgte", "firmaet", "i", "Odense", ".")
DANISH_TAGS = (1, 2, 2, 0, 0, 0, 5, 0)


@pytest.fixture
def space3():
    return DEFAULT_SPACE_3


@pytest.fixture
def space4():
    return DEFAULT_SPACE_4


@pytest.fixture
def danish_point():
    return DataPoint(tokens=DANISH_TOKENS, tags=DANISH_TAGS, id="1")


def random_point(rng: random.Random, space, max_len: int = 12, with_id: bool = False) -> DataPoint:
    """Random valid datapoint with BIO-consistent tags."""
    length = rng.randint(1, max_len)
    tokens = tuple(f"w{rng.randrange(10_000)}" for _ in range(length))
    tags = [0] * length
    i = 0
    while i < length:
        if rng.random() < 0.35:
            etype = rng.choice(space.entity_types)
            span_len = min(rng.randint(1, 3), length - i)
            tags[i] = space.begin_id(etype)
            for j in range(i + 1, i + span_len):
                tags[j] = space.inside_id(etype)
            i += span_len
        else:
            i += 1
    return DataPoint(
        tokens=tokens,
        tags=tuple(tags),
        id=str(rng.randrange(1_000_000)) if with_id else None,
    )


def make_dataset(
    rng: random.Random,
    space,
    n_points: int,
    name: str = "fixture",
    provenance: Provenance | None = None,
    with_ids: bool = False,
) -> Dataset:
    points = tuple(random_point(rng, space, with_id=with_ids) for _ in range(n_points))
    return Dataset(
        name=name, space=space, points=points, provenance=provenance or Provenance()
    )


def perturbed_tags(rng: random.Random, point: DataPoint, space) -> list[int]:
    """Prediction tags: keep, shift, retype or drop gold spans; add spurious ones."""
    spans = decode_spans(point.tags, space)
    proposed = []
    for span in spans:
        roll = rng.random()
        if roll < 0.5:
            proposed.append(span)
        elif roll < 0.65 and span.end + 1 < len(point.tokens):
            proposed.append(EntitySpan(span.entity_type, span.start + 1, span.end + 1))
        elif roll < 0.8:
            proposed.append(EntitySpan(rng.choice(space.entity_types), span.start, span.end))
        # else: dropped
    occupied = [False] * len(point.tokens)
    kept = []
    for span in sorted(proposed, key=lambda s: s.start):
        if span.end < len(point.tokens) and not any(occupied[span.start : span.end + 1]):
            kept.append(span)
            for i in range(span.start, span.end + 1):
                occupied[i] = True
    for _ in range(rng.randint(0, 2)):
        start = rng.randrange(0, len(point.tokens))
        if not occupied[start]:
            kept.append(EntitySpan(rng.choice(space.entity_types), start, start))
            occupied[start] = True
    return encode_spans(kept, len(point.tokens), space)
