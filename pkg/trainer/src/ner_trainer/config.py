"""Training configuration: two regimes over shared-format JSONL datasets."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

SETTINGS = ("from_scratch", "fine_tuning")

#: Special base_model value: a small randomly initialized encoder with a
#: word-level vocabulary built from the training data. Used in CI; full runs
#: default to the large multilingual encoder below.
TINY_BASE_MODEL = "tiny"
DEFAULT_BASE_MODEL = "xlm-roberta-large"


@dataclass
class TrainConfig:
    target_dataset_path: str
    output_dir: str
    base_model: str = DEFAULT_BASE_MODEL
    setting: str = "from_scratch"
    related_dataset_path: str | None = None
    epochs_related: int = 5
    epochs_target: int = 10
    learning_rate: float = 2e-5
    batch_size: int = 16
    seed: int = 0
    max_seq_length: int = 256
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.setting not in SETTINGS:
            raise ValueError(f"setting must be one of {SETTINGS}, got {self.setting!r}")
        if self.epochs_related < 1 or self.epochs_target < 1:
            raise ValueError("epoch counts must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.setting == "fine_tuning" and not self.related_dataset_path:
            raise ValueError("fine_tuning requires related_dataset_path")
        if self.setting == "from_scratch" and self.related_dataset_path:
            raise ValueError("from_scratch must not set related_dataset_path")

    def to_json_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TrainConfig":
        return cls(**obj)

    @classmethod
    def from_file(cls, path: str | Path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_json_obj(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
