"""Model and tokenizer construction for both the tiny CI encoder and hub models."""

from __future__ import annotations

from typing import Iterable

from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import (
    AutoModelForTokenClassification,
    AutoTokenizer,
    BertConfig,
    BertForTokenClassification,
    PreTrainedTokenizerFast,
)

from .config import TINY_BASE_MODEL
from .data import Sentence

TINY_HIDDEN = 128
TINY_LAYERS = 2
TINY_HEADS = 4


def build_word_vocab(sentence_groups: Iterable[list[Sentence]]) -> dict[str, int]:
    vocab = {"[PAD]": 0, "[UNK]": 1}
    for sentences in sentence_groups:
        for sentence in sentences:
            for token in sentence.tokens:
                vocab.setdefault(token, len(vocab))
    return vocab


def build_tiny_tokenizer(vocab: dict[str, int]) -> PreTrainedTokenizerFast:
    tokenizer = Tokenizer(models.WordLevel(vocab=vocab, unk_token="[UNK]"))
    tokenizer.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    return PreTrainedTokenizerFast(
        tokenizer_object=tokenizer, unk_token="[UNK]", pad_token="[PAD]"
    )


def build_model_and_tokenizer(
    base_model: str,
    label_names: list[str],
    sentence_groups: Iterable[list[Sentence]],
    max_seq_length: int,
):
    """Instantiate the base encoder with a token-classification head.

    base_model == "tiny" builds a small randomly initialized encoder whose
    word-level vocabulary comes from the training data; any other value is a
    pretrained checkpoint name resolved by the transformers hub machinery.
    """
    id2label = dict(enumerate(label_names))
    label2id = {name: i for i, name in id2label.items()}
    if base_model == TINY_BASE_MODEL:
        vocab = build_word_vocab(sentence_groups)
        tokenizer = build_tiny_tokenizer(vocab)
        config = BertConfig(
            vocab_size=len(vocab),
            hidden_size=TINY_HIDDEN,
            num_hidden_layers=TINY_LAYERS,
            num_attention_heads=TINY_HEADS,
            intermediate_size=TINY_HIDDEN * 2,
            max_position_embeddings=max_seq_length + 2,
            pad_token_id=tokenizer.pad_token_id,
            num_labels=len(label_names),
            id2label=id2label,
            label2id=label2id,
        )
        return BertForTokenClassification(config), tokenizer
    tokenizer = AutoTokenizer.from_pretrained(base_model)
    model = AutoModelForTokenClassification.from_pretrained(
        base_model, num_labels=len(label_names), id2label=id2label, label2id=label2id
    )
    return model, tokenizer
