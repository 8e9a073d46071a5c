"""Synthetic NER dataset generation, validation and span-level evaluation."""

from .corpus import (
    DataPoint,
    EntitySpan,
    ErrorClass,
    LabelSpace,
    ValidationPolicy,
    ValidationVerdict,
    decode_spans,
    encode_spans,
    validate_datapoint,
)
from .datasets import Dataset, Provenance, SizeLadder
from .gateway import InjectionProfile, ProviderConfig, RawResponse
from .harvest import HarvestReport
from .seedgen import GenerationPlan, PromptBundle
from .spaneval import EvalReport

__version__ = "0.1.0"

__all__ = [
    "DataPoint",
    "Dataset",
    "EntitySpan",
    "ErrorClass",
    "EvalReport",
    "GenerationPlan",
    "HarvestReport",
    "InjectionProfile",
    "LabelSpace",
    "PromptBundle",
    "Provenance",
    "ProviderConfig",
    "RawResponse",
    "SizeLadder",
    "ValidationPolicy",
    "ValidationVerdict",
    "decode_spans",
    "encode_spans",
    "validate_datapoint",
    "__version__",
]
