"""Training loop for the two regimes.

from_scratch fine-tunes the base encoder on the target data alone.
fine_tuning first trains on related-language data, then continues on the
target data; with zero target datapoints the related-only model is kept,
which is exactly the zero-shot transfer point.
"""

from __future__ import annotations

import json
import logging
import random
from pathlib import Path

import torch

from .config import TrainConfig
from .data import Sentence, collate, encode_sentence, read_jsonl, read_label_names
from .modeling import build_model_and_tokenizer

logger = logging.getLogger(__name__)

LABELS_FILENAME = "label_space.json"
TRAIN_CONFIG_FILENAME = "train_config.json"


def _resolve_label_names(config: TrainConfig, paths: list[str]) -> list[str]:
    names: list[str] | None = None
    for path in paths:
        found = read_label_names(path)
        if found is None:
            continue
        if names is None:
            names = found
        elif names != found:
            raise ValueError(
                f"incompatible label spaces: {path} declares {found}, "
                f"but an earlier dataset declares {names}; remap before training"
            )
    if names is None:
        raise ValueError(
            "no label space found: every training dataset needs a metadata sidecar"
        )
    return names


def _epoch_order(n: int, rng: random.Random) -> list[int]:
    order = list(range(n))
    rng.shuffle(order)
    return order


def _train_phase(
    model,
    tokenizer,
    sentences: list[Sentence],
    epochs: int,
    config: TrainConfig,
    rng: random.Random,
    phase: str,
) -> None:
    features = [encode_sentence(tokenizer, s, config.max_seq_length) for s in sentences]
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    device = torch.device(config.device)
    model.to(device)
    model.train()
    for epoch in range(epochs):
        total_loss = 0.0
        order = _epoch_order(len(features), rng)
        for start in range(0, len(order), config.batch_size):
            batch_features = [features[i] for i in order[start : start + config.batch_size]]
            batch = {k: v.to(device) for k, v in collate(tokenizer, batch_features).items()}
            loss = model(**batch).loss
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            total_loss += loss.item()
        logger.info("%s epoch %d/%d: loss %.4f", phase, epoch + 1, epochs, total_loss)


def train(config: TrainConfig) -> Path:
    """Run the configured regime and persist the final checkpoint."""
    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)

    target = read_jsonl(config.target_dataset_path)
    phases: list[tuple[str, list[Sentence], int]] = []
    dataset_paths = [config.target_dataset_path]
    if config.setting == "fine_tuning":
        related = read_jsonl(config.related_dataset_path)
        if not related:
            raise ValueError("fine_tuning requires a non-empty related dataset")
        dataset_paths.insert(0, config.related_dataset_path)
        phases.append(("related", related, config.epochs_related))
        if target:
            phases.append(("target", target, config.epochs_target))
        else:
            logger.info("no target datapoints: keeping the related-only (zero-shot) model")
    else:
        if not target:
            raise ValueError("from_scratch requires a non-empty target dataset")
        phases.append(("target", target, config.epochs_target))

    label_names = _resolve_label_names(config, dataset_paths)
    for _, sentences, _ in phases:
        for idx, sentence in enumerate(sentences):
            if any(t < 0 or t >= len(label_names) for t in sentence.tags):
                raise ValueError(
                    f"datapoint {idx} carries a tag outside the {len(label_names)}-tag space"
                )

    model, tokenizer = build_model_and_tokenizer(
        config.base_model, label_names, [s for _, s, _ in phases], config.max_seq_length
    )
    for phase_name, sentences, epochs in phases:
        _train_phase(model, tokenizer, sentences, epochs, config, rng, phase_name)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    with open(out_dir / LABELS_FILENAME, "w", encoding="utf-8") as fh:
        json.dump({"names": label_names}, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    with open(out_dir / TRAIN_CONFIG_FILENAME, "w", encoding="utf-8") as fh:
        json.dump(
            config.to_json_obj() | {"config_hash": config.config_hash()},
            fh,
            ensure_ascii=False,
            indent=2,
        )
        fh.write("\n")
    logger.info("checkpoint written to %s", out_dir)
    return out_dir
