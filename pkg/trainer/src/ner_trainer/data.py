"""Dataset file IO and word-to-subtoken label alignment.

The interchange format is the pipeline's JSONL schema: one
{"id"?, "tokens": [...], "ner_tags": [...]} object per line, with a
<name>.meta.json sidecar carrying the ordered tag-name inventory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

IGNORE_INDEX = -100


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    tags: tuple[int, ...]
    id: str | None = None


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    if path.suffix == ".jsonl":
        return path.with_suffix(".meta.json")
    return Path(str(path) + ".meta.json")


def read_label_names(path: str | Path) -> list[str] | None:
    """Tag names recorded in the dataset's metadata sidecar, if present."""
    meta_file = sidecar_path(path)
    if not meta_file.exists():
        return None
    with open(meta_file, encoding="utf-8") as fh:
        meta = json.load(fh)
    space = meta.get("space", {})
    names = space.get("names")
    return list(names) if names else None


def read_jsonl(path: str | Path) -> list[Sentence]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                tokens = tuple(obj["tokens"])
                tags = tuple(obj["ner_tags"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: malformed datapoint: {exc}") from exc
            if len(tokens) != len(tags):
                raise ValueError(f"{path}:{line_no}: {len(tokens)} tokens vs {len(tags)} tags")
            raw_id = obj.get("id")
            sentences.append(
                Sentence(tokens=tokens, tags=tags, id=None if raw_id is None else str(raw_id))
            )
    return sentences


def write_jsonl(path: str | Path, sentences: list[Sentence], label_names: list[str], generator: str) -> None:
    """Write predictions in the shared schema, plus a sidecar the evaluator can read."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            obj = {}
            if s.id is not None:
                obj["id"] = s.id
            obj["tokens"] = list(s.tokens)
            obj["ner_tags"] = list(s.tags)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    meta = {
        "name": path.stem,
        "space": {"names": list(label_names)},
        "provenance": {"kind": "automatic", "generator": generator, "rng_seed": None},
        "counts": {"points": len(sentences)},
    }
    with open(sidecar_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def encode_sentence(tokenizer, sentence: Sentence, max_seq_length: int) -> dict:
    """Encode one sentence; only the first subtoken of each word carries its label."""
    encoding = tokenizer(
        list(sentence.tokens),
        is_split_into_words=True,
        truncation=True,
        max_length=max_seq_length,
    )
    labels = []
    previous_word = None
    for word_id in encoding.word_ids(0):
        if word_id is None or word_id == previous_word:
            labels.append(IGNORE_INDEX)
        else:
            labels.append(sentence.tags[word_id])
        previous_word = word_id
    return {
        "input_ids": encoding["input_ids"],
        "attention_mask": encoding["attention_mask"],
        "labels": labels,
    }


def collate(tokenizer, features: list[dict]) -> dict:
    """Pad a batch to its longest sequence."""
    longest = max(len(f["input_ids"]) for f in features)
    pad_id = tokenizer.pad_token_id or 0
    batch = {"input_ids": [], "attention_mask": [], "labels": []}
    for f in features:
        gap = longest - len(f["input_ids"])
        batch["input_ids"].append(f["input_ids"] + [pad_id] * gap)
        batch["attention_mask"].append(f["attention_mask"] + [0] * gap)
        batch["labels"].append(f["labels"] + [IGNORE_INDEX] * gap)
    return {k: torch.tensor(v, dtype=torch.long) for k, v in batch.items()}
