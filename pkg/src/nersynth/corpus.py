"""Core domain types: BIO label spaces, datapoints, span codec and candidate validation.

Everything here is an immutable value or a pure function, so all of it is safe
to call from concurrent workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Sequence


class BioLintError(ValueError):
    """A tag sequence violates strict BIO consistency (I-X without a preceding B-X/I-X)."""


_TAG_RE = re.compile(r"^[BI]-(.+)$")


@dataclass(frozen=True)
class LabelSpace:
    """Ordered BIO tag inventory; tag ids are positions in ``names``.

    Invariants: index 0 is "O", every entity type contributes exactly the pair
    B-X / I-X, and ids are contiguous starting at 0.
    """

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names or names[0] != "O":
            raise ValueError("label space must start with the outside tag 'O'")
        begins: dict[str, int] = {}
        insides: dict[str, int] = {}
        for idx, name in enumerate(names[1:], start=1):
            m = _TAG_RE.match(name)
            if m is None:
                raise ValueError(f"tag name {name!r} is neither 'O' nor 'B-X'/'I-X'")
            bucket = begins if name.startswith("B-") else insides
            if m.group(1) in bucket:
                raise ValueError(f"duplicate tag name {name!r}")
            bucket[m.group(1)] = idx
        if set(begins) != set(insides):
            missing = set(begins) ^ set(insides)
            raise ValueError(f"entity types missing a B-/I- partner: {sorted(missing)}")
        object.__setattr__(self, "_begin_ids", begins)
        object.__setattr__(self, "_inside_ids", insides)

    @classmethod
    def from_entity_types(cls, entity_types: Sequence[str]) -> "LabelSpace":
        """Canonical space: O, then adjacent B-X/I-X pairs in the given type order."""
        names = ["O"]
        for etype in entity_types:
            names += [f"B-{etype}", f"I-{etype}"]
        return cls(tuple(names))

    @property
    def entity_types(self) -> tuple[str, ...]:
        """Entity types ordered by first appearance of their B- tag."""
        pairs = sorted(self._begin_ids.items(), key=lambda kv: kv[1])  # type: ignore[attr-defined]
        return tuple(t for t, _ in pairs)

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, tag_id: int) -> bool:
        return 0 <= tag_id < len(self.names)

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown tag name {name!r}") from None

    def begin_id(self, entity_type: str) -> int:
        return self._begin_ids[entity_type]  # type: ignore[attr-defined]

    def inside_id(self, entity_type: str) -> int:
        return self._inside_ids[entity_type]  # type: ignore[attr-defined]

    def type_of(self, tag_id: int) -> str | None:
        """Entity type of a tag id, or None for "O"."""
        name = self.names[tag_id]
        return None if name == "O" else name[2:]

    def to_json_obj(self) -> dict:
        return {"names": list(self.names)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LabelSpace":
        if "names" in obj:
            return cls(tuple(obj["names"]))
        return cls.from_entity_types(obj["entity_types"])


#: Default 3-type space: 0=O, 1=B-PER, 2=I-PER, 3=B-ORG, 4=I-ORG, 5=B-LOC, 6=I-LOC.
DEFAULT_SPACE_3 = LabelSpace.from_entity_types(("PER", "ORG", "LOC"))
#: 4-type space adds 7=B-DATE, 8=I-DATE.
DEFAULT_SPACE_4 = LabelSpace.from_entity_types(("PER", "ORG", "LOC", "DATE"))


@dataclass(frozen=True)
class DataPoint:
    """A tokenized sentence with one tag id per token."""

    tokens: tuple[str, ...]
    tags: tuple[int, ...]
    id: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"{len(self.tokens)} tokens vs {len(self.tags)} tags"
            )
        for tok in self.tokens:
            if not isinstance(tok, str) or not tok or "\n" in tok:
                raise ValueError(f"invalid token {tok!r}: must be non-empty, no newline")
        for tag in self.tags:
            if isinstance(tag, bool) or not isinstance(tag, int) or tag < 0:
                raise ValueError(f"invalid tag id {tag!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def fits(self, space: LabelSpace) -> bool:
        return all(t in space for t in self.tags)

    def to_json_obj(self) -> dict:
        obj: dict[str, Any] = {}
        if self.id is not None:
            obj["id"] = self.id
        obj["tokens"] = list(self.tokens)
        obj["ner_tags"] = list(self.tags)
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DataPoint":
        raw_id = obj.get("id")
        return cls(
            tokens=tuple(obj["tokens"]),
            tags=tuple(obj["ner_tags"]),
            id=None if raw_id is None else str(raw_id),
        )


@dataclass(frozen=True, order=True)
class EntitySpan:
    """Inclusive token-index span of one entity."""

    entity_type: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start <= self.end):
            raise ValueError(f"bad span bounds [{self.start}, {self.end}]")


class ErrorClass(str, Enum):
    """Rejection classes for candidate datapoints, in precedence order."""

    MALFORMED_STRUCTURE = "MalformedStructure"
    EMPTY_OR_CONTINUATION = "EmptyOrContinuation"
    UNEQUAL_LENGTHS = "UnequalLengths"
    OUT_OF_VOCAB_TAG = "OutOfVocabTag"
    RUN_ON_INCOMPLETE = "RunOnIncomplete"


@dataclass(frozen=True)
class ValidationVerdict:
    """Accept, or reject with exactly one error class."""

    error_class: ErrorClass | None = None

    @property
    def accepted(self) -> bool:
        return self.error_class is None

    @classmethod
    def accept(cls) -> "ValidationVerdict":
        return cls(None)

    @classmethod
    def reject(cls, error_class: ErrorClass) -> "ValidationVerdict":
        if error_class is None:
            raise ValueError("reject requires an error class")
        return cls(error_class)


@dataclass(frozen=True)
class ValidationPolicy:
    """Thresholds for run-on detection.

    A candidate is run-on if it has more than ``max_tokens`` tokens or any
    token repeated at least ``max_consecutive_repeat`` times in a row.
    """

    max_tokens: int = 256
    max_consecutive_repeat: int = 20


DEFAULT_POLICY = ValidationPolicy()


def decode_spans(
    tags: Sequence[int], space: LabelSpace, *, strict: bool = False
) -> list[EntitySpan]:
    """Decode a BIO tag-id sequence into entity spans.

    Lenient by default: an I-X with no open span of type X starts a new span.
    With strict=True the same situation raises BioLintError instead.
    Output spans never overlap and are ordered by start.
    """
    spans: list[EntitySpan] = []
    open_type: str | None = None
    open_start = 0
    for i, tag_id in enumerate(tags):
        if tag_id not in space:
            raise ValueError(f"tag id {tag_id} out of range for space of size {len(space)}")
        name = space.names[tag_id]
        if name == "O":
            if open_type is not None:
                spans.append(EntitySpan(open_type, open_start, i - 1))
                open_type = None
        elif name.startswith("B-"):
            if open_type is not None:
                spans.append(EntitySpan(open_type, open_start, i - 1))
            open_type, open_start = name[2:], i
        else:  # I-X
            etype = name[2:]
            if open_type == etype:
                continue
            if strict:
                raise BioLintError(
                    f"I-{etype} at position {i} does not continue an open {etype} span"
                )
            if open_type is not None:
                spans.append(EntitySpan(open_type, open_start, i - 1))
            open_type, open_start = etype, i
    if open_type is not None:
        spans.append(EntitySpan(open_type, open_start, len(tags) - 1))
    return spans


def encode_spans(
    spans: Iterable[EntitySpan], length: int, space: LabelSpace
) -> list[int]:
    """Encode non-overlapping entity spans into a BIO tag-id sequence.

    Inverse of decode_spans: decode_spans(encode_spans(s)) == sorted(s).
    """
    ordered = sorted(spans, key=lambda s: s.start)
    tags = [0] * length
    prev_end = -1
    for span in ordered:
        if span.start <= prev_end:
            raise ValueError(f"overlapping spans at token {span.start}")
        if span.end >= length:
            raise ValueError(f"span [{span.start}, {span.end}] exceeds length {length}")
        tags[span.start] = space.begin_id(span.entity_type)
        inside = space.inside_id(span.entity_type)
        for i in range(span.start + 1, span.end + 1):
            tags[i] = inside
        prev_end = span.end
    return tags


def _max_consecutive_repeat(tokens: Sequence[str]) -> int:
    best = run = 1 if tokens else 0
    for prev, cur in zip(tokens, tokens[1:]):
        run = run + 1 if cur == prev else 1
        best = max(best, run)
    return best


def validate_datapoint(
    candidate: Any,
    space: LabelSpace,
    policy: ValidationPolicy = DEFAULT_POLICY,
) -> ValidationVerdict:
    """Classify a parsed candidate object. Total: never raises.

    Rejection precedence is fixed: MalformedStructure > EmptyOrContinuation >
    UnequalLengths > OutOfVocabTag > RunOnIncomplete, so structural failures
    mask content failures.
    """
    if not isinstance(candidate, dict):
        return ValidationVerdict.reject(ErrorClass.MALFORMED_STRUCTURE)
    tokens = candidate.get("tokens")
    tags = candidate.get("ner_tags")
    if not isinstance(tokens, list) or not isinstance(tags, list):
        return ValidationVerdict.reject(ErrorClass.MALFORMED_STRUCTURE)
    if "id" in candidate and not isinstance(candidate["id"], (str, int, type(None))):
        return ValidationVerdict.reject(ErrorClass.MALFORMED_STRUCTURE)
    for tok in tokens:
        if not isinstance(tok, str) or not tok or "\n" in tok:
            return ValidationVerdict.reject(ErrorClass.MALFORMED_STRUCTURE)
    for tag in tags:
        if isinstance(tag, bool) or not isinstance(tag, int):
            return ValidationVerdict.reject(ErrorClass.MALFORMED_STRUCTURE)

    if not tokens:
        return ValidationVerdict.reject(ErrorClass.EMPTY_OR_CONTINUATION)
    if len(tokens) != len(tags):
        return ValidationVerdict.reject(ErrorClass.UNEQUAL_LENGTHS)
    if any(tag not in space for tag in tags):
        return ValidationVerdict.reject(ErrorClass.OUT_OF_VOCAB_TAG)
    if len(tokens) > policy.max_tokens:
        return ValidationVerdict.reject(ErrorClass.RUN_ON_INCOMPLETE)
    if _max_consecutive_repeat(tokens) >= policy.max_consecutive_repeat:
        return ValidationVerdict.reject(ErrorClass.RUN_ON_INCOMPLETE)
    return ValidationVerdict.accept()
