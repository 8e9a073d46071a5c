"""Command-line pipeline driver.

One JSON manifest describes a full experiment (language, organic data,
provider or mock profile, call plan, size ladder, label space, output dir);
subcommands run its stages: generate -> harvest -> subset, plus convert,
stats and evaluate utilities. Secrets stay in environment variables so
manifests are safe to commit.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from dataclasses import dataclass
from pathlib import Path

from .corpus import DEFAULT_POLICY, LabelSpace, ValidationPolicy
from .datasets import (
    Dataset,
    SizeLadder,
    compile_dataset,
    export_conll,
    export_jsonl,
    import_conll,
    import_jsonl,
    sidecar_space,
    subset_ladder,
)
from .gateway import (
    InjectionProfile,
    ProviderConfig,
    RawResponse,
    mock_complete,
    read_responses,
    run_plan,
    write_responses,
)
from .harvest import HarvestReport, harvest_run
from .seedgen import GenerationPlan, ProviderKind, plan_calls
from .spaneval import evaluate, format_report_table

logger = logging.getLogger(__name__)

RESPONSES_FILENAME = "raw_responses.jsonl"
REPORT_FILENAME = "harvest_report.json"
DATASET_FILENAME = "synthetic.jsonl"


@dataclass
class ExperimentManifest:
    language: str
    organic_path: Path
    plan: GenerationPlan
    label_space: LabelSpace
    output_dir: Path
    provider: ProviderConfig | None = None
    mock_profile: InjectionProfile | None = None
    ladder: SizeLadder = SizeLadder()
    policy: ValidationPolicy = DEFAULT_POLICY
    source_path: Path | None = None

    @property
    def is_mock(self) -> bool:
        return self.provider is None

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentManifest":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        base = path.parent

        provider_obj = obj.get("provider")
        if provider_obj is None:
            raise ValueError(f"{path}: manifest is missing the 'provider' field")
        kind = provider_obj.get("kind", "http")
        provider = None
        mock_profile = None
        if kind == "mock":
            fields = {k: v for k, v in provider_obj.items() if k != "kind"}
            mock_profile = InjectionProfile.from_json_obj(fields)
        elif kind == "http":
            fields = {k: v for k, v in provider_obj.items() if k != "kind"}
            provider = ProviderConfig.from_json_obj(fields)
        else:
            raise ValueError(f"{path}: unknown provider kind {kind!r}")

        plan_obj = dict(obj["plan"])
        plan_obj.setdefault("language", obj["language"])
        policy_obj = obj.get("validation", {})
        return cls(
            language=obj["language"],
            organic_path=base / obj["organic_path"],
            plan=GenerationPlan.from_json_obj(plan_obj),
            label_space=LabelSpace.from_json_obj(obj["label_space"]),
            output_dir=base / obj["output_dir"],
            provider=provider,
            mock_profile=mock_profile,
            ladder=SizeLadder.from_json_obj(obj["ladder"]) if "ladder" in obj else SizeLadder(),
            policy=ValidationPolicy(**policy_obj),
            source_path=path,
        )


def _load_dataset(path: Path, fallback_space: LabelSpace | None = None) -> Dataset:
    """Load a JSONL dataset, preferring its sidecar space over the fallback."""
    try:
        return import_jsonl(path)
    except ValueError:
        if fallback_space is None:
            raise
        return import_jsonl(path, space=fallback_space)


def _apply_overrides(manifest: ExperimentManifest, args: argparse.Namespace) -> ExperimentManifest:
    if getattr(args, "seed", None) is not None:
        manifest.plan = GenerationPlan.from_json_obj(
            manifest.plan.to_json_obj() | {"rng_seed": args.seed}
        )
        if manifest.mock_profile is not None:
            manifest.mock_profile = InjectionProfile.from_json_obj(
                manifest.mock_profile.to_json_obj() | {"rng_seed": args.seed}
            )
    if getattr(args, "output_dir", None) is not None:
        manifest.output_dir = Path(args.output_dir)
    if getattr(args, "mock", False) and not manifest.is_mock:
        manifest.provider = None
        if manifest.mock_profile is None:
            manifest.mock_profile = InjectionProfile(rng_seed=manifest.plan.rng_seed)
    return manifest


def _require_manifest(args: argparse.Namespace) -> ExperimentManifest:
    if args.manifest is None:
        raise SystemExit("this command needs --manifest")
    return _apply_overrides(ExperimentManifest.from_file(args.manifest), args)


def cmd_generate(args: argparse.Namespace) -> int:
    manifest = _require_manifest(args)
    organic = _load_dataset(manifest.organic_path, manifest.label_space)
    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    responses_path = manifest.output_dir / RESPONSES_FILENAME

    existing: list[RawResponse] = []
    if responses_path.exists():
        existing = read_responses(responses_path)
    done = {r.call_index for r in existing}
    if done:
        print(f"resuming: {len(done)} of {manifest.plan.k} calls already recorded")

    provider_kind = (
        ProviderKind.STRUCTURED
        if manifest.provider is not None and manifest.provider.structured_output
        else ProviderKind.OPEN
    )
    bundles = [
        bundle
        for index, bundle in plan_calls(manifest.plan, organic, provider_kind)
        if index not in done
    ]

    completer = None
    if manifest.is_mock:
        profile = manifest.mock_profile or InjectionProfile(rng_seed=manifest.plan.rng_seed)
        space = manifest.label_space
        completer = lambda b: mock_complete(b, profile, space)  # noqa: E731

    new_responses = sorted(
        run_plan(bundles, manifest.provider, args.parallelism, completer),
        key=lambda r: r.call_index,
    )
    write_responses(responses_path, existing + new_responses)

    if manifest.source_path is not None:
        target = manifest.output_dir / "manifest.json"
        if manifest.source_path.resolve() != target.resolve():
            shutil.copyfile(manifest.source_path, target)

    failed = sum(1 for r in new_responses if r.finish_reason == "error")
    print(
        f"generate: {len(new_responses)} new calls, {len(done)} resumed, "
        f"{failed} failed -> {responses_path}"
    )
    if failed:
        print(f"error: {failed} of {len(new_responses)} calls failed", file=sys.stderr)
        return 1
    return 0


def _stats_lines(report: HarvestReport) -> list[str]:
    label_width = max(len(c.value) for c in report.reject_counts) + len("rejected ")
    lines = [
        f"{'requested':<{label_width}} {report.requested:>8}",
        f"{'candidates seen':<{label_width}} {report.candidates_seen:>8}",
        f"{'accepted':<{label_width}} {len(report.accepted):>8}",
        f"{'duplicates dropped':<{label_width}} {report.duplicates_dropped:>8}",
    ]
    for cls, count in report.reject_counts.items():
        lines.append(f"{'rejected ' + cls.value:<{label_width}} {count:>8}")
    lines.append(f"{'usable rate':<{label_width}} {report.usable_rate * 100:>7.1f}%")
    return lines


def cmd_harvest(args: argparse.Namespace) -> int:
    manifest = _require_manifest(args)
    responses_path = (
        Path(args.responses) if args.responses else manifest.output_dir / RESPONSES_FILENAME
    )
    responses = read_responses(responses_path)
    organic = _load_dataset(manifest.organic_path, manifest.label_space)

    report = harvest_run(
        responses,
        manifest.label_space,
        manifest.policy,
        manifest.plan,
        dedup_against=organic.points,
    )
    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    report_path = manifest.output_dir / REPORT_FILENAME
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json_obj(), fh, ensure_ascii=False, indent=2)
        fh.write("\n")

    if not report.accepted:
        print("error: no accepted datapoints; nothing to compile", file=sys.stderr)
        return 1
    generator = "mock" if manifest.is_mock else manifest.provider.model_name
    dataset = compile_dataset(
        report,
        manifest.label_space,
        cap=manifest.plan.compile_cap,
        rng_seed=manifest.plan.rng_seed,
        name=f"{manifest.language.lower()}-synthetic",
        generator=generator,
    )
    dataset_path = manifest.output_dir / DATASET_FILENAME
    export_jsonl(dataset, dataset_path)

    print("\n".join(_stats_lines(report)))
    print(f"harvest: {len(dataset)} datapoints -> {dataset_path}")
    return 0


def cmd_subset(args: argparse.Namespace) -> int:
    dataset = import_jsonl(args.dataset)
    if args.sizes:
        sizes = tuple(int(s) for s in args.sizes.split(","))
        ladder = SizeLadder(sizes=sizes, rng_seed=args.seed if args.seed is not None else 0)
    elif args.manifest:
        manifest = ExperimentManifest.from_file(args.manifest)
        ladder = manifest.ladder
        if args.seed is not None:
            ladder = SizeLadder(sizes=ladder.sizes, rng_seed=args.seed)
    else:
        ladder = SizeLadder(rng_seed=args.seed if args.seed is not None else 0)

    out_dir = Path(args.output_dir) if args.output_dir else Path(args.dataset).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.dataset).stem
    for subset in subset_ladder(dataset, ladder):
        size = len(subset)
        path = out_dir / f"{stem}-n{size}.jsonl"
        export_jsonl(subset, path)
        print(f"subset: {size} datapoints -> {path}")
    return 0


def cmd_convert(args: argparse.Namespace) -> int:
    in_path, out_path = Path(args.input), Path(args.output)
    space = None
    if args.entity_types:
        space = LabelSpace.from_entity_types(args.entity_types.split(","))
    elif args.manifest:
        space = ExperimentManifest.from_file(args.manifest).label_space

    if args.to == "conll":
        dataset = _load_dataset(in_path, space)
        export_conll(dataset, out_path)
    elif args.to == "jsonl":
        if space is None:
            space = sidecar_space(in_path)
        if space is None:
            raise SystemExit(
                "convert to jsonl needs a label space: pass --entity-types, "
                "--manifest, or provide a metadata sidecar"
            )
        dataset = import_conll(in_path, space)
        export_jsonl(dataset, out_path)
    else:
        raise SystemExit(f"unknown target format {args.to!r}")
    print(f"convert: {in_path} -> {out_path}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    with open(args.report, encoding="utf-8") as fh:
        report = HarvestReport.from_json_obj(json.load(fh))
    print("\n".join(_stats_lines(report)))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold = import_jsonl(args.gold)
    pred = _load_dataset(Path(args.pred), gold.space)
    report = evaluate(gold, pred)
    print(format_report_table(report))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_obj(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")
        print(f"evaluate: report -> {args.json_out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="experiment manifest JSON")
    common.add_argument("--seed", type=int, help="override the plan rng seed")
    common.add_argument("--parallelism", type=int, default=1, help="concurrent provider calls")
    common.add_argument("--mock", action="store_true", help="force the mock provider")
    common.add_argument("--output-dir", help="override the manifest output directory")
    common.add_argument("--verbose", action="store_true", help="log progress details")

    parser = argparse.ArgumentParser(
        prog="nersynth",
        description="Synthetic NER dataset generation, validation and evaluation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="run the generation calls")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("harvest", parents=[common], help="extract, validate and compile")
    p.add_argument("--responses", help="raw responses file (default: output dir)")
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("subset", parents=[common], help="write size-ladder subsets")
    p.add_argument("dataset", help="dataset JSONL to subset")
    p.add_argument("--sizes", help="comma-separated rung sizes")
    p.set_defaults(func=cmd_subset)

    p = sub.add_parser("convert", parents=[common], help="convert between JSONL and CoNLL")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--to", required=True, choices=("jsonl", "conll"))
    p.add_argument("--entity-types", help="comma-separated entity types for CoNLL input")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("stats", parents=[common], help="print a harvest report table")
    p.add_argument("report", help="harvest report JSON")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("evaluate", parents=[common], help="span-level F1 of pred vs gold")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--json-out", help="also write the report as JSON")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
