"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Everything here uses the mock provider and fixture files only.
"""

import filecmp
import json
import random
import time
from pathlib import Path

import pytest

from nersynth.cli import main
from nersynth.corpus import DEFAULT_POLICY, DEFAULT_SPACE_3, DataPoint, LabelSpace
from nersynth.datasets import (
    Dataset,
    SizeLadder,
    compile_dataset,
    export_conll,
    export_jsonl,
    import_conll,
    import_jsonl,
    subset_ladder,
)
from nersynth.gateway import InjectionProfile, RawResponse, mock_complete
from nersynth.harvest import HarvestReport, classify, dedup_key, extract_candidates, harvest_run
from nersynth.seedgen import GenerationPlan, plan_calls
from nersynth.spaneval import evaluate

from conftest import make_dataset, perturbed_tags, random_point
from oracles import brute_force_counts, brute_force_prf

FIXTURES = Path(__file__).parent / "fixtures"


def _passed(criterion: str, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


def _conserves_literally(report: HarvestReport) -> bool:
    return len(report.accepted) + sum(report.reject_counts.values()) == report.candidates_seen


def test_taxonomy_fidelity():
    """Every labeled response shape classifies into exactly its labeled class."""
    started = time.perf_counter()
    fixture = json.loads((FIXTURES / "response_taxonomy.json").read_text(encoding="utf-8"))
    space = LabelSpace.from_json_obj(fixture["label_space"])
    agreements = 0
    for entry in fixture["responses"]:
        response = RawResponse.from_json_obj(entry["response"])
        candidates, _ = extract_candidates(response)
        got = [
            "Accept" if (v := classify(c, space, DEFAULT_POLICY)).accepted else v.error_class.value
            for c in candidates
        ]
        assert got == entry["expected"], f"{entry['label']}: {got} != {entry['expected']}"
        agreements += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"taxonomy classification took {elapsed:.2f}s"
    _passed("taxonomy-fidelity", f"{agreements}/{len(fixture['responses'])} shapes, {elapsed:.3f}s")


def test_evaluator_oracle_equivalence(space4):
    """Micro and per-type P/R/F1 match a brute-force matcher to 1e-12 on 1000 pairs."""
    started = time.perf_counter()
    rng = random.Random(2024)
    gold_points = [random_point(rng, space4, max_len=12) for _ in range(1000)]
    pred_points = [
        DataPoint(tokens=p.tokens, tags=tuple(perturbed_tags(rng, p, space4)))
        for p in gold_points
    ]
    gold = Dataset("gold", space4, tuple(gold_points))
    pred = Dataset("pred", space4, tuple(pred_points))
    report = evaluate(gold, pred)

    oracle = brute_force_counts(
        [list(p.tags) for p in gold_points], [list(p.tags) for p in pred_points], space4
    )
    for etype, counts in oracle.items():
        p, r, f1 = brute_force_prf(counts["gold"], counts["pred"], counts["matched"])
        score = report.per_type[etype]
        assert abs(score.precision - p) <= 1e-12
        assert abs(score.recall - r) <= 1e-12
        assert abs(score.f1 - f1) <= 1e-12
    total = {k: sum(c[k] for c in oracle.values()) for k in ("gold", "pred", "matched")}
    p, r, f1 = brute_force_prf(total["gold"], total["pred"], total["matched"])
    assert abs(report.micro.precision - p) <= 1e-12
    assert abs(report.micro.recall - r) <= 1e-12
    assert abs(report.micro.f1 - f1) <= 1e-12

    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"oracle comparison took {elapsed:.2f}s"
    _passed(
        "evaluator-oracle-equivalence",
        f"1000 pairs, {total['gold']} gold spans, micro f1 {report.micro.f1:.4f}, {elapsed:.2f}s",
    )


def test_round_trips(tmp_path, space4):
    """JSONL round trip is exact; CoNLL round trip is exact modulo ids."""
    rng = random.Random(777)
    dataset = make_dataset(rng, space4, 1000, name="roundtrip", with_ids=True)

    jsonl_a = tmp_path / "a.jsonl"
    jsonl_b = tmp_path / "b.jsonl"
    export_jsonl(dataset, jsonl_a)
    reloaded = import_jsonl(jsonl_a)
    assert reloaded == dataset
    export_jsonl(reloaded, jsonl_b)
    assert jsonl_a.read_bytes() == jsonl_b.read_bytes()

    conll_a = tmp_path / "a.conll"
    conll_b = tmp_path / "b.conll"
    export_conll(dataset, conll_a)
    conll_loaded = import_conll(conll_a, space4, name=dataset.name)
    assert conll_loaded.points == tuple(DataPoint(p.tokens, p.tags) for p in dataset.points)
    export_conll(conll_loaded, conll_b)
    assert conll_a.read_bytes() == conll_b.read_bytes()

    _passed("round-trips", "1000 datapoints, JSONL exact, CoNLL equal modulo ids, zero diffs")


E2E_MANIFEST = {
    "language": "Danish",
    "organic_path": "organic.jsonl",
    "provider": {
        "kind": "mock",
        "well_formatted": 0.6,
        "unequal_lengths": 0.2,
        "run_on_incomplete": 0.1,
        "empty_or_continuation": 0.1,
        "rng_seed": 20240501,
    },
    "plan": {"m": 10, "n": 20, "k": 50, "compile_cap": 5000, "rng_seed": 42},
    "ladder": {"sizes": [100, 500], "rng_seed": 0},
    "label_space": {"entity_types": ["PER", "ORG", "LOC"]},
    "output_dir": "out",
}

E2E_ARTIFACTS = ("raw_responses.jsonl", "synthetic.jsonl", "synthetic.meta.json", "harvest_report.json")


def test_end_to_end_mock_run(tmp_path):
    """Mock pipeline hits the profiled usable rate and is byte-reproducible."""
    started = time.perf_counter()
    organic = make_dataset(random.Random(5), DEFAULT_SPACE_3, 60, name="organic", with_ids=True)
    export_jsonl(organic, tmp_path / "organic.jsonl")
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps(E2E_MANIFEST, indent=2))

    for run_dir in ("run1", "run2"):
        assert main(["generate", "--manifest", str(manifest_path), "--output-dir", str(tmp_path / run_dir)]) == 0
        assert main(["harvest", "--manifest", str(manifest_path), "--output-dir", str(tmp_path / run_dir)]) == 0

    report = HarvestReport.from_json_obj(
        json.loads((tmp_path / "run1" / "harvest_report.json").read_text(encoding="utf-8"))
    )
    dataset = import_jsonl(tmp_path / "run1" / "synthetic.jsonl")
    assert report.requested == 1000
    assert abs(report.usable_rate - 0.60) <= 0.05, f"usable rate {report.usable_rate}"
    assert len(dataset) == len(report.accepted)

    for artifact in E2E_ARTIFACTS:
        assert filecmp.cmp(tmp_path / "run1" / artifact, tmp_path / "run2" / artifact, shallow=False), (
            f"{artifact} differs between identical-seed runs"
        )

    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"end-to-end mock run took {elapsed:.2f}s"
    _passed(
        "end-to-end-mock-run",
        f"usable rate {report.usable_rate:.3f}, {len(dataset)} datapoints, "
        f"2 runs byte-identical, {elapsed:.2f}s",
    )


def test_dedup_and_cap(space3):
    """Duplicate/seed-echo injection leaves no key collisions; cap and clip arithmetic."""
    # Duplicated and seed-identical candidates, injected through a real harvest.
    seeds = [DataPoint(tokens=(f"seed{i}", "sentence"), tags=(0, 0)) for i in range(5)]
    fresh = [{"tokens": [f"fresh{i}", "one"], "ner_tags": [0, 0]} for i in range(10)]
    echo = [{"tokens": list(s.tokens), "ner_tags": list(s.tags)} for s in seeds]
    responses = [
        RawResponse(0, json.dumps({"data": fresh + echo}), "stop", 0),
        RawResponse(1, json.dumps({"data": fresh}), "stop", 0),  # exact duplicates
    ]
    plan = GenerationPlan(m=2, n=15, k=2, language="Danish")
    report = harvest_run(responses, space3, DEFAULT_POLICY, plan, dedup_against=seeds)
    keys = [dedup_key(p) for p in report.accepted]
    assert len(keys) == len(set(keys)), "duplicate keys in harvest output"
    assert not set(keys) & {dedup_key(s) for s in seeds}, "seed leakage in harvest output"
    assert len(report.accepted) == 10
    assert report.duplicates_dropped == 15

    # Cap: 10000 accepted compiles to exactly 5000.
    rng = random.Random(1)
    big = [random_point(rng, space3) for _ in range(10_000)]
    big_report = HarvestReport(
        accepted=tuple(big),
        reject_counts={cls: 0 for cls in report.reject_counts},
        candidates_seen=10_000,
        requested=10_000,
        usable_rate=1.0,
    )
    capped = compile_dataset(big_report, space3, cap=5000, rng_seed=9, name="c", generator="mock")
    assert len(capped) == 5000

    # Ladder clip: rung 5000 over 4899 points returns all 4899.
    points_4899 = tuple(random_point(rng, space3) for _ in range(4899))
    dataset = Dataset("kannada-like", space3, points_4899)
    rungs = subset_ladder(dataset, SizeLadder(sizes=(100, 1000, 5000), rng_seed=3))
    assert [len(r) for r in rungs] == [100, 1000, 4899]

    _passed("dedup-and-cap", "0 collisions, cap 10000->5000, ladder rung 5000->4899")


def test_conservation(space3):
    """accepted + sum(rejects) == candidates_seen on fixtures and 100 mock runs."""
    fixture = json.loads((FIXTURES / "response_taxonomy.json").read_text(encoding="utf-8"))
    space4 = LabelSpace.from_json_obj(fixture["label_space"])
    fixture_responses = [
        RawResponse.from_json_obj(e["response"]) for e in fixture["responses"]
    ]
    plan = GenerationPlan(m=1, n=1, k=len(fixture_responses), language="Danish")
    report = harvest_run(fixture_responses, space4, DEFAULT_POLICY, plan)
    assert _conserves_literally(report)

    checked = 1
    organic = make_dataset(random.Random(99), space3, 25, name="organic")
    for run in range(100):
        profile_rng = random.Random(run)
        weights = [profile_rng.random() for _ in range(4)]
        total = sum(weights)
        profile = InjectionProfile(*(w / total for w in weights), rng_seed=run)
        plan = GenerationPlan(m=3, n=6, k=4, language="Danish", rng_seed=run)
        responses = [mock_complete(b, profile, space3) for _, b in plan_calls(plan, organic)]
        run_report = harvest_run(
            responses, space3, DEFAULT_POLICY, plan, dedup_against=organic.points
        )
        assert _conserves_literally(run_report), f"conservation failed on mock run {run}"
        checked += 1
    _passed("conservation", f"{checked} harvest runs conserved candidates exactly")
