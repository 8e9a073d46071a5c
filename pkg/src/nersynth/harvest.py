"""Candidate extraction from raw LLM text, rejection accounting and dedup.

Extraction is a tolerant scanner (string-aware balanced-brace detection, one
JSON parse per object) rather than a whole-document parse: responses often
bury salvageable objects in prose, code fences, broken wrappers or truncated
tails, and strict parsing would lose them.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .corpus import (
    DataPoint,
    ErrorClass,
    LabelSpace,
    ValidationPolicy,
    ValidationVerdict,
    DEFAULT_POLICY,
    validate_datapoint,
)
from .gateway import RawResponse
from .seedgen import GenerationPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Candidate:
    """One potential datapoint recognized in a response.

    obj is the parsed JSON value (None for unparseable fragments); incomplete
    marks a truncated trailing object; empty_response marks the single
    placeholder candidate of a response with nothing recognizable in it.
    """

    obj: Any = None
    incomplete: bool = False
    empty_response: bool = False
    raw: str | None = None


@dataclass
class ExtractionDiagnostics:
    objects_parsed: int = 0
    parse_failures: int = 0
    incomplete_tail: bool = False
    empty_response: bool = False


def _match_brace(text: str, start: int, hi: int) -> int:
    """Index just past the balanced group opening at text[start], or -1."""
    depth = 0
    in_str = False
    escaped = False
    for i in range(start, hi):
        c = text[i]
        if in_str:
            if escaped:
                escaped = False
            elif c == "\\":
                escaped = True
            elif c == '"':
                in_str = False
        elif c == '"':
            in_str = True
        elif c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    return -1


_TRAILING_COMMA_RE = re.compile(r",\s*([\]}])")


def _try_parse(fragment: str) -> Any:
    try:
        return json.loads(fragment, strict=False)
    except json.JSONDecodeError:
        pass
    try:
        return json.loads(_TRAILING_COMMA_RE.sub(r"\1", fragment), strict=False)
    except json.JSONDecodeError:
        return None


def _extract_region(
    text: str, lo: int, hi: int, out: list[Candidate], diag: ExtractionDiagnostics
) -> None:
    i = lo
    while i < hi:
        if text[i] != "{":
            i += 1
            continue
        end = _match_brace(text, i, hi)
        if end == -1:
            # Unterminated object. Complete objects nested inside it are
            # salvaged; if none exist, the fragment itself is the candidate.
            before = len(out)
            _extract_region(text, i + 1, hi, out, diag)
            if len(out) == before:
                out.append(Candidate(obj=None, incomplete=True, raw=text[i:hi]))
                diag.incomplete_tail = True
            return
        fragment = text[i:end]
        parsed = _try_parse(fragment)
        if parsed is None:
            diag.parse_failures += 1
            before = len(out)
            _extract_region(text, i + 1, end - 1, out, diag)
            if len(out) == before:
                out.append(Candidate(obj=None, raw=fragment))
        elif isinstance(parsed, dict) and isinstance(parsed.get("data"), list):
            diag.objects_parsed += len(parsed["data"])
            out.extend(Candidate(obj=element) for element in parsed["data"])
        else:
            diag.objects_parsed += 1
            out.append(Candidate(obj=parsed))
        i = end


def extract_candidates(
    raw: RawResponse,
) -> tuple[list[Candidate], ExtractionDiagnostics]:
    """Recognize candidate datapoints in a raw response.

    Handles a {"data": [...]} wrapper object, a bare JSON array, and objects
    concatenated in prose or code fences. A truncated trailing object becomes
    a candidate flagged incomplete. A response with nothing recognizable
    yields exactly one whole-response candidate flagged empty_response.
    """
    diag = ExtractionDiagnostics()
    candidates: list[Candidate] = []
    _extract_region(raw.text, 0, len(raw.text), candidates, diag)
    if not candidates:
        diag.empty_response = True
        candidates = [Candidate(obj=None, empty_response=True, raw=raw.text)]
    return candidates, diag


def classify(
    candidate: Candidate,
    space: LabelSpace,
    policy: ValidationPolicy = DEFAULT_POLICY,
) -> ValidationVerdict:
    """Verdict for one candidate; structural flags override field validation."""
    if candidate.empty_response:
        return ValidationVerdict.reject(ErrorClass.EMPTY_OR_CONTINUATION)
    if candidate.incomplete:
        return ValidationVerdict.reject(ErrorClass.RUN_ON_INCOMPLETE)
    return validate_datapoint(candidate.obj, space, policy)


def candidate_to_datapoint(candidate: Candidate) -> DataPoint:
    """Build the accepted DataPoint; only valid after classify() accepts."""
    obj = candidate.obj
    raw_id = obj.get("id")
    return DataPoint(
        tokens=tuple(obj["tokens"]),
        tags=tuple(obj["ner_tags"]),
        id=None if raw_id is None else str(raw_id),
    )


def dedup_key(point: DataPoint) -> str:
    """Case-sensitive, whitespace-normalized token-sequence key.

    Tag disagreement on identical text is a labeling variant, not a duplicate
    sentence, so tags are deliberately not part of the key.
    """
    return " ".join(" ".join(point.tokens).split())


def dedup(
    candidates: Sequence[DataPoint],
    seeds: Sequence[DataPoint] = (),
    prior: Sequence[DataPoint] = (),
) -> list[DataPoint]:
    """Keep the first occurrence per key; drop collisions with seeds or prior data."""
    blocked = {dedup_key(p) for p in seeds} | {dedup_key(p) for p in prior}
    out: list[DataPoint] = []
    seen: set[str] = set()
    for point in candidates:
        key = dedup_key(point)
        if key in blocked or key in seen:
            continue
        seen.add(key)
        out.append(point)
    return out


@dataclass(frozen=True)
class HarvestReport:
    """Outcome of harvesting one plan's responses.

    Conservation: |accepted| + sum(reject_counts) + duplicates_dropped equals
    candidates_seen, where a response with nothing recognizable (or a missing
    call) counts as one candidate.
    """

    accepted: tuple[DataPoint, ...]
    reject_counts: dict[ErrorClass, int]
    candidates_seen: int
    requested: int
    usable_rate: float
    duplicates_dropped: int = 0

    def to_json_obj(self) -> dict:
        return {
            "accepted": [p.to_json_obj() for p in self.accepted],
            "reject_counts": {cls.value: n for cls, n in self.reject_counts.items()},
            "candidates_seen": self.candidates_seen,
            "requested": self.requested,
            "usable_rate": self.usable_rate,
            "duplicates_dropped": self.duplicates_dropped,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "HarvestReport":
        return cls(
            accepted=tuple(DataPoint.from_json_obj(o) for o in obj["accepted"]),
            reject_counts={ErrorClass(k): v for k, v in obj["reject_counts"].items()},
            candidates_seen=obj["candidates_seen"],
            requested=obj["requested"],
            usable_rate=obj["usable_rate"],
            duplicates_dropped=obj.get("duplicates_dropped", 0),
        )


def harvest_run(
    responses: Iterable[RawResponse],
    space: LabelSpace,
    policy: ValidationPolicy,
    plan: GenerationPlan,
    dedup_against: Sequence[DataPoint] = (),
) -> HarvestReport:
    """Extract, classify and dedup all responses of one plan.

    Calls missing from the response stream count as one EmptyOrContinuation
    candidate each. Accepted order is deterministic: call_index, then
    intra-response order.
    """
    by_index: dict[int, RawResponse] = {}
    for resp in responses:
        if not 0 <= resp.call_index < plan.k:
            logger.warning("ignoring response with call_index %d outside plan", resp.call_index)
            continue
        if resp.call_index in by_index:
            logger.warning("duplicate response for call %d; keeping the first", resp.call_index)
            continue
        by_index[resp.call_index] = resp

    reject_counts = {cls: 0 for cls in ErrorClass}
    raw_accepted: list[DataPoint] = []
    candidates_seen = 0
    for call_index in range(plan.k):
        resp = by_index.get(call_index)
        if resp is None:
            candidates_seen += 1
            reject_counts[ErrorClass.EMPTY_OR_CONTINUATION] += 1
            continue
        candidates, _ = extract_candidates(resp)
        for cand in candidates:
            candidates_seen += 1
            verdict = classify(cand, space, policy)
            if verdict.accepted:
                raw_accepted.append(candidate_to_datapoint(cand))
            else:
                reject_counts[verdict.error_class] += 1

    accepted = dedup(raw_accepted, seeds=dedup_against)
    return HarvestReport(
        accepted=tuple(accepted),
        reject_counts=reject_counts,
        candidates_seen=candidates_seen,
        requested=plan.requested,
        usable_rate=len(accepted) / plan.requested,
        duplicates_dropped=len(raw_accepted) - len(accepted),
    )
