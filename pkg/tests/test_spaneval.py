import random

import pytest
from hypothesis import given, settings, strategies as st

from nersynth.corpus import DEFAULT_SPACE_4, DataPoint, EntitySpan, encode_spans
from nersynth.datasets import Dataset
from nersynth.spaneval import diff_spans, evaluate, format_report_table

from conftest import make_dataset, perturbed_tags as _perturbed_tags, random_point
from oracles import brute_force_counts, brute_force_prf


def _pair(space, gold_points, pred_tags_per_point):
    gold = Dataset("gold", space, tuple(gold_points))
    pred_points = tuple(
        DataPoint(tokens=g.tokens, tags=tuple(tags), id=g.id)
        for g, tags in zip(gold_points, pred_tags_per_point)
    )
    return gold, Dataset("pred", space, pred_points)


class TestEvaluate:
    def test_identity_scores_one(self, space3):
        points = [DataPoint(tokens=("a", "b", "c"), tags=(1, 2, 0))]
        gold, pred = _pair(space3, points, [points[0].tags])
        report = evaluate(gold, pred)
        assert report.micro.f1 == 1.0
        assert report.counts.matched == report.counts.gold_spans == 1

    def test_half_right_half_wrong(self, space3):
        # gold spans {A, B}; pred spans {A, C}
        points = [DataPoint(tokens=("a", "b", "c", "d"), tags=(1, 0, 5, 0))]
        pred_tags = [(1, 0, 0, 3)]
        gold, pred = _pair(space3, points, pred_tags)
        report = evaluate(gold, pred)
        assert report.micro.precision == 0.5
        assert report.micro.recall == 0.5
        assert report.micro.f1 == 0.5

    def test_both_empty_convention(self, space3):
        points = [DataPoint(tokens=("a", "b"), tags=(0, 0))]
        gold, pred = _pair(space3, points, [(0, 0)])
        report = evaluate(gold, pred)
        assert (report.micro.precision, report.micro.recall, report.micro.f1) == (1.0, 1.0, 1.0)

    def test_one_sided_zero_convention(self, space3):
        points = [DataPoint(tokens=("a", "b"), tags=(1, 0))]
        gold, pred = _pair(space3, points, [(0, 0)])
        report = evaluate(gold, pred)
        assert report.micro.recall == 0.0
        assert report.micro.f1 == 0.0
        swapped = evaluate(pred := Dataset("p", space3, pred.points), Dataset("g", space3, points))
        assert swapped.micro.precision == 0.0
        assert swapped.micro.f1 == 0.0

    def test_length_mismatch_names_datapoint(self, space3):
        gold = Dataset("g", space3, (DataPoint(tokens=("a", "b"), tags=(0, 0)),))
        pred = Dataset("p", space3, (DataPoint(tokens=("a",), tags=(0,)),))
        with pytest.raises(ValueError, match="datapoint 0"):
            evaluate(gold, pred)

    def test_count_mismatch_is_error(self, space3):
        gold = Dataset("g", space3, (DataPoint(tokens=("a",), tags=(0,)),))
        pred = Dataset("p", space3, ())
        with pytest.raises(ValueError, match="datapoints"):
            evaluate(gold, pred)

    def test_space_mismatch_is_error(self, space3, space4):
        gold = Dataset("g", space3, ())
        pred = Dataset("p", space4, ())
        with pytest.raises(ValueError, match="label space"):
            evaluate(gold, pred)

    def test_micro_counts_equal_per_type_sums(self, space4):
        rng = random.Random(31)
        gold_points = [random_point(rng, space4) for _ in range(200)]
        pred_tags = [_perturbed_tags(rng, p, space4) for p in gold_points]
        gold, pred = _pair(space4, gold_points, pred_tags)
        report = evaluate(gold, pred)
        assert report.counts.gold_spans == sum(s.support for s in report.per_type.values())

    def test_swap_exchanges_precision_and_recall(self, space4):
        rng = random.Random(32)
        gold_points = [random_point(rng, space4) for _ in range(100)]
        pred_tags = [_perturbed_tags(rng, p, space4) for p in gold_points]
        gold, pred = _pair(space4, gold_points, pred_tags)
        fwd = evaluate(gold, pred)
        rev = evaluate(pred, gold)
        assert fwd.micro.precision == pytest.approx(rev.micro.recall, abs=1e-15)
        assert fwd.micro.recall == pytest.approx(rev.micro.precision, abs=1e-15)
        assert fwd.micro.f1 == pytest.approx(rev.micro.f1, abs=1e-15)

    def test_sentence_permutation_invariance(self, space4):
        rng = random.Random(33)
        gold_points = [random_point(rng, space4) for _ in range(80)]
        pred_tags = [_perturbed_tags(rng, p, space4) for p in gold_points]
        gold, pred = _pair(space4, gold_points, pred_tags)
        order = list(range(80))
        rng.shuffle(order)
        gold2 = Dataset("g2", space4, tuple(gold.points[i] for i in order))
        pred2 = Dataset("p2", space4, tuple(pred.points[i] for i in order))
        assert evaluate(gold, pred) == evaluate(gold2, pred2)

    def test_matches_brute_force_oracle(self, space4):
        rng = random.Random(34)
        gold_points = [random_point(rng, space4) for _ in range(500)]
        pred_tags = [_perturbed_tags(rng, p, space4) for p in gold_points]
        gold, pred = _pair(space4, gold_points, pred_tags)
        report = evaluate(gold, pred)
        oracle = brute_force_counts(
            [list(p.tags) for p in gold.points], [list(p.tags) for p in pred.points], space4
        )
        for etype, counts in oracle.items():
            p, r, f1 = brute_force_prf(counts["gold"], counts["pred"], counts["matched"])
            assert report.per_type[etype].precision == pytest.approx(p, abs=1e-12)
            assert report.per_type[etype].recall == pytest.approx(r, abs=1e-12)
            assert report.per_type[etype].f1 == pytest.approx(f1, abs=1e-12)
            assert report.per_type[etype].support == counts["gold"]


class TestDiffSpans:
    def test_identical_tags_all_matched(self, space3):
        point = DataPoint(tokens=("a", "b", "c"), tags=(1, 2, 0))
        diff = diff_spans(point, point, space3)
        assert len(diff["matched"]) == 1
        assert diff["spurious"] == [] and diff["missed"] == []

    def test_all_outside_prediction_misses_everything(self, space3):
        gold = DataPoint(tokens=("a", "b", "c", "d"), tags=(1, 0, 5, 0))
        pred = DataPoint(tokens=("a", "b", "c", "d"), tags=(0, 0, 0, 0))
        diff = diff_spans(gold, pred, space3)
        assert len(diff["missed"]) == 2
        assert diff["matched"] == [] and diff["spurious"] == []

    def test_token_count_mismatch_is_error(self, space3):
        gold = DataPoint(tokens=("a",), tags=(0,))
        pred = DataPoint(tokens=("a", "b"), tags=(0, 0))
        with pytest.raises(ValueError, match="token count"):
            diff_spans(gold, pred, space3)

    @settings(max_examples=50)
    @given(seed=st.integers(min_value=0, max_value=100_000))
    def test_match_count_agrees_with_oracle(self, seed):
        rng = random.Random(seed)
        gold = random_point(rng, DEFAULT_SPACE_4)
        pred_tags = _perturbed_tags(rng, gold, DEFAULT_SPACE_4)
        pred = DataPoint(tokens=gold.tokens, tags=tuple(pred_tags))
        diff = diff_spans(gold, pred, DEFAULT_SPACE_4)
        oracle = brute_force_counts([list(gold.tags)], [list(pred.tags)], DEFAULT_SPACE_4)
        assert len(diff["matched"]) == sum(c["matched"] for c in oracle.values())
        gold_side = len(diff["matched"]) + len(diff["missed"])
        pred_side = len(diff["matched"]) + len(diff["spurious"])
        assert gold_side == sum(c["gold"] for c in oracle.values())
        assert pred_side == sum(c["pred"] for c in oracle.values())


def test_report_table_is_aligned(space3):
    points = [DataPoint(tokens=("a", "b", "c"), tags=(1, 2, 0))]
    gold, pred = _pair(space3, points, [points[0].tags])
    table = format_report_table(evaluate(gold, pred))
    lines = table.splitlines()
    assert lines[0].split() == ["type", "precision", "recall", "f1", "support"]
    assert len({len(l) for l in lines}) == 1  # every row padded to equal width
    assert any(l.split()[0] == "micro" for l in lines)
