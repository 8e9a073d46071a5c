"""Independent brute-force scorer used to cross-check the evaluator.

Deliberately naive: for every sentence it walks all gold x pred span pairs,
marking each gold span off at most once. Shares no code with the library's
matcher beyond the BIO decode of inputs.
"""

from __future__ import annotations

from nersynth.corpus import LabelSpace, decode_spans


def brute_force_counts(
    gold_tag_seqs: list[list[int]],
    pred_tag_seqs: list[list[int]],
    space: LabelSpace,
) -> dict[str, dict[str, int]]:
    """Per-type {gold, pred, matched} counts via pairwise enumeration."""
    counts = {t: {"gold": 0, "pred": 0, "matched": 0} for t in space.entity_types}
    for gold_tags, pred_tags in zip(gold_tag_seqs, pred_tag_seqs):
        gold_spans = decode_spans(gold_tags, space)
        pred_spans = decode_spans(pred_tags, space)
        for span in gold_spans:
            counts[span.entity_type]["gold"] += 1
        for span in pred_spans:
            counts[span.entity_type]["pred"] += 1
        used = [False] * len(gold_spans)
        for pred_span in pred_spans:
            for idx, gold_span in enumerate(gold_spans):
                if used[idx]:
                    continue
                if (
                    pred_span.entity_type == gold_span.entity_type
                    and pred_span.start == gold_span.start
                    and pred_span.end == gold_span.end
                ):
                    used[idx] = True
                    counts[pred_span.entity_type]["matched"] += 1
                    break
    return counts


def brute_force_prf(gold: int, pred: int, matched: int) -> tuple[float, float, float]:
    """Same zero conventions as the library, recomputed from scratch."""
    if gold == 0 and pred == 0:
        return 1.0, 1.0, 1.0
    p = matched / pred if pred > 0 else 0.0
    r = matched / gold if gold > 0 else 0.0
    if p + r == 0:
        return p, r, 0.0
    return p, r, 2 * p * r / (p + r)
