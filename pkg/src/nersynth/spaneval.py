"""Entity-level exact-match precision/recall/F1, micro-averaged and per type.

A predicted span matches iff its (type, start, end) triple equals a gold span
of the same sentence; each gold span can be matched at most once. Zero
conventions: when both sides of a sentence-set have no spans of the relevant
kind, P = R = F1 = 1; when exactly one side is empty, the undefined ratio is
0 and F1 = 0. Both sequences are decoded leniently before matching.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import DataPoint, EntitySpan, LabelSpace, decode_spans
from .datasets import Dataset


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class TypeScore(Score):
    support: int = 0


@dataclass(frozen=True)
class MatchCounts:
    gold_spans: int
    pred_spans: int
    matched: int


@dataclass(frozen=True)
class EvalReport:
    micro: Score
    per_type: dict[str, TypeScore]
    counts: MatchCounts

    def to_json_obj(self) -> dict:
        return {
            "micro": {
                "precision": self.micro.precision,
                "recall": self.micro.recall,
                "f1": self.micro.f1,
            },
            "per_type": {
                t: {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "support": s.support,
                }
                for t, s in self.per_type.items()
            },
            "counts": {
                "gold_spans": self.counts.gold_spans,
                "pred_spans": self.counts.pred_spans,
                "matched": self.counts.matched,
            },
        }


def _prf(matched: int, pred_n: int, gold_n: int) -> tuple[float, float, float]:
    if pred_n == 0 and gold_n == 0:
        return 1.0, 1.0, 1.0
    precision = matched / pred_n if pred_n else 0.0
    recall = matched / gold_n if gold_n else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def _check_aligned(gold: Dataset, pred: Dataset) -> None:
    if gold.space.names != pred.space.names:
        raise ValueError("gold and pred must share one label space")
    if len(gold.points) != len(pred.points):
        raise ValueError(
            f"gold has {len(gold.points)} datapoints but pred has {len(pred.points)}"
        )
    for idx, (g, p) in enumerate(zip(gold.points, pred.points)):
        if len(g.tokens) != len(p.tokens):
            raise ValueError(
                f"datapoint {idx}: gold has {len(g.tokens)} tokens, pred has {len(p.tokens)}"
            )


def evaluate(gold: Dataset, pred: Dataset) -> EvalReport:
    """Score pred against gold over exact (type, start, end) span matches."""
    _check_aligned(gold, pred)
    space = gold.space
    gold_n = {t: 0 for t in space.entity_types}
    pred_n = {t: 0 for t in space.entity_types}
    matched_n = {t: 0 for t in space.entity_types}
    for g, p in zip(gold.points, pred.points):
        gold_spans = set(decode_spans(g.tags, space))
        pred_spans = set(decode_spans(p.tags, space))
        for span in gold_spans:
            gold_n[span.entity_type] += 1
        for span in pred_spans:
            pred_n[span.entity_type] += 1
        for span in gold_spans & pred_spans:
            matched_n[span.entity_type] += 1

    per_type = {}
    for etype in space.entity_types:
        precision, recall, f1 = _prf(matched_n[etype], pred_n[etype], gold_n[etype])
        per_type[etype] = TypeScore(precision, recall, f1, support=gold_n[etype])
    total_gold = sum(gold_n.values())
    total_pred = sum(pred_n.values())
    total_matched = sum(matched_n.values())
    precision, recall, f1 = _prf(total_matched, total_pred, total_gold)
    return EvalReport(
        micro=Score(precision, recall, f1),
        per_type=per_type,
        counts=MatchCounts(total_gold, total_pred, total_matched),
    )


def diff_spans(
    gold_point: DataPoint, pred_point: DataPoint, space: LabelSpace
) -> dict[str, list[EntitySpan]]:
    """Per-sentence span diff: matched, spurious (pred only), missed (gold only)."""
    if len(gold_point.tokens) != len(pred_point.tokens):
        raise ValueError(
            f"token count mismatch: gold {len(gold_point.tokens)}, pred {len(pred_point.tokens)}"
        )
    gold_spans = set(decode_spans(gold_point.tags, space))
    pred_spans = set(decode_spans(pred_point.tags, space))
    return {
        "matched": sorted(gold_spans & pred_spans),
        "spurious": sorted(pred_spans - gold_spans),
        "missed": sorted(gold_spans - pred_spans),
    }


def format_report_table(report: EvalReport) -> str:
    """Aligned plain-text rendering of an evaluation report."""
    rows = [("type", "precision", "recall", "f1", "support")]
    for etype, score in report.per_type.items():
        rows.append(
            (etype, f"{score.precision:.4f}", f"{score.recall:.4f}",
             f"{score.f1:.4f}", str(score.support))
        )
    rows.append(
        ("micro", f"{report.micro.precision:.4f}", f"{report.micro.recall:.4f}",
         f"{report.micro.f1:.4f}", str(report.counts.gold_spans))
    )
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)
