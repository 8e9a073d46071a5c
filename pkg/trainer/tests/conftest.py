import json
import random
from pathlib import Path

LABEL_NAMES = ["O", "B-PER", "I-PER", "B-ORG", "I-ORG", "B-LOC", "I-LOC"]

# Per-type token pools keep the word->tag mapping learnable, so a tiny
# encoder can memorize small fixture sets.
PER_WORDS = ["Anna", "Boris", "Carla", "Derek", "Elif", "Farid", "Greta", "Hamid"]
ORG_WORDS = ["Nortek", "Velox", "Quandry", "Ostrum", "Platek", "Rivon"]
LOC_WORDS = ["Odense", "Tromvik", "Salir", "Benua", "Kastell", "Movara"]
FILLER = ["the", "met", "in", "with", "near", "works", "at", "visited", "old", "new", "river", "market"]

_POOLS = {"PER": PER_WORDS, "ORG": ORG_WORDS, "LOC": LOC_WORDS}
_BEGIN = {"PER": 1, "ORG": 3, "LOC": 5}


def fixture_sentence(rng: random.Random, index: int) -> dict:
    tokens: list[str] = []
    tags: list[int] = []
    for _ in range(rng.randint(1, 2)):
        for _ in range(rng.randint(1, 3)):
            tokens.append(rng.choice(FILLER))
            tags.append(0)
        etype = rng.choice(list(_POOLS))
        span_len = rng.randint(1, 2)
        for k in range(span_len):
            tokens.append(rng.choice(_POOLS[etype]))
            tags.append(_BEGIN[etype] if k == 0 else _BEGIN[etype] + 1)
    tokens.append(rng.choice(FILLER))
    tags.append(0)
    return {"id": str(index), "tokens": tokens, "ner_tags": tags}


def write_fixture_dataset(
    path: Path, n_points: int, seed: int = 0, label_names: list[str] | None = None
) -> Path:
    """Write a JSONL dataset plus the metadata sidecar the trainer expects."""
    names = label_names or LABEL_NAMES
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n_points):
            fh.write(json.dumps(fixture_sentence(rng, i), ensure_ascii=False) + "\n")
    meta = {
        "name": path.stem,
        "space": {"names": names},
        "provenance": {"kind": "organic", "generator": "fixture", "rng_seed": seed},
        "counts": {"points": n_points},
    }
    meta_path = path.with_suffix(".meta.json")
    meta_path.write_text(json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path
