"""Inference: emit prediction files aligned line-for-line with their input."""

from __future__ import annotations

import json
from pathlib import Path

import torch
from transformers import AutoModelForTokenClassification, AutoTokenizer

from .data import Sentence, collate, encode_sentence, read_jsonl, write_jsonl
from .train import LABELS_FILENAME


def load_checkpoint(checkpoint_dir: str | Path):
    checkpoint_dir = Path(checkpoint_dir)
    model = AutoModelForTokenClassification.from_pretrained(checkpoint_dir)
    tokenizer = AutoTokenizer.from_pretrained(checkpoint_dir)
    with open(checkpoint_dir / LABELS_FILENAME, encoding="utf-8") as fh:
        label_names = json.load(fh)["names"]
    return model, tokenizer, label_names


def _word_tags(encoding_word_ids, logits, n_words: int, sentence_index: int) -> list[int]:
    """Collapse subtoken predictions to one tag per word via the first subtoken.

    Words lost to truncation get the outside tag; a word that produced no
    subtoken at all (tokenizer misalignment) is an error.
    """
    tags: dict[int, int] = {}
    for position, word_id in enumerate(encoding_word_ids):
        if word_id is None or word_id in tags:
            continue
        tags[word_id] = int(logits[position].argmax())
    covered = max(tags) + 1 if tags else 0
    for word in range(covered):
        if word not in tags:
            raise ValueError(
                f"sentence {sentence_index}: word {word} produced no subtokens; "
                "token/tokenizer misalignment"
            )
    return [tags.get(word, 0) for word in range(n_words)]


def predict(
    checkpoint_dir: str | Path,
    input_path: str | Path,
    output_path: str | Path,
    batch_size: int = 32,
    max_seq_length: int = 256,
    device: str = "cpu",
) -> Path:
    """Tag every sentence of input_path; output aligns line-for-line with it."""
    model, tokenizer, label_names = load_checkpoint(checkpoint_dir)
    sentences = read_jsonl(input_path)
    dev = torch.device(device)
    model.to(dev)
    model.eval()

    predicted: list[Sentence] = []
    for start in range(0, len(sentences), batch_size):
        chunk = sentences[start : start + batch_size]
        features = [encode_sentence(tokenizer, s, max_seq_length) for s in chunk]
        encodings = [
            tokenizer(list(s.tokens), is_split_into_words=True, truncation=True, max_length=max_seq_length)
            for s in chunk
        ]
        batch = collate(tokenizer, features)
        with torch.no_grad():
            logits = model(
                input_ids=batch["input_ids"].to(dev),
                attention_mask=batch["attention_mask"].to(dev),
            ).logits.cpu()
        for offset, sentence in enumerate(chunk):
            word_ids = encodings[offset].word_ids(0)
            tags = _word_tags(word_ids, logits[offset], len(sentence.tokens), start + offset)
            predicted.append(Sentence(tokens=sentence.tokens, tags=tuple(tags), id=sentence.id))

    output_path = Path(output_path)
    write_jsonl(output_path, predicted, label_names, generator=str(checkpoint_dir))
    return output_path
