"""Dataset containers, JSONL/CoNLL serialization, label remapping and subsetting.

Every dataset file gets a metadata sidecar (<name>.meta.json) carrying the
label space and provenance, keeping the data files themselves interoperable
with standard tools.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from .corpus import DataPoint, EntitySpan, LabelSpace, decode_spans, encode_spans
from .harvest import HarvestReport

logger = logging.getLogger(__name__)

PROVENANCE_KINDS = ("organic", "synthetic", "automatic")


@dataclass(frozen=True)
class Provenance:
    """Where a dataset came from: hand-labeled, LLM-generated, or scraped."""

    kind: str = "organic"
    generator: str | None = None
    rng_seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in PROVENANCE_KINDS:
            raise ValueError(f"provenance kind must be one of {PROVENANCE_KINDS}")

    def to_json_obj(self) -> dict:
        return {"kind": self.kind, "generator": self.generator, "rng_seed": self.rng_seed}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Provenance":
        return cls(**obj)


@dataclass(frozen=True)
class Dataset:
    name: str
    space: LabelSpace
    points: tuple[DataPoint, ...]
    provenance: Provenance = Provenance()

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if not self.name:
            raise ValueError("dataset name must be non-empty")
        for idx, point in enumerate(self.points):
            if not point.fits(self.space):
                raise ValueError(f"datapoint {idx} has tags outside the label space")

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class SizeLadder:
    """Strictly increasing training-set sizes for data-amount modulation."""

    sizes: tuple[int, ...] = (100, 500, 1000, 2500, 5000)
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "sizes", tuple(self.sizes))
        if not self.sizes:
            raise ValueError("ladder must have at least one size")
        if any(s < 1 for s in self.sizes):
            raise ValueError("ladder sizes must be positive")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("ladder sizes must be strictly increasing")

    def to_json_obj(self) -> dict:
        return {"sizes": list(self.sizes), "rng_seed": self.rng_seed}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SizeLadder":
        return cls(sizes=tuple(obj["sizes"]), rng_seed=obj.get("rng_seed", 0))


def meta_path_for(path: str | Path) -> Path:
    path = Path(path)
    if path.suffix in (".jsonl", ".conll", ".txt"):
        return path.with_suffix(".meta.json")
    return Path(str(path) + ".meta.json")


def _write_meta(dataset: Dataset, path: Path) -> None:
    meta = {
        "name": dataset.name,
        "space": dataset.space.to_json_obj(),
        "provenance": dataset.provenance.to_json_obj(),
        "counts": {"points": len(dataset.points)},
    }
    with open(meta_path_for(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def _read_meta(path: Path) -> dict | None:
    meta_path = meta_path_for(path)
    if not meta_path.exists():
        return None
    with open(meta_path, encoding="utf-8") as fh:
        return json.load(fh)


def sidecar_space(path: str | Path) -> LabelSpace | None:
    """Label space recorded in a dataset file's metadata sidecar, if any."""
    meta = _read_meta(Path(path))
    if meta is None or "space" not in meta:
        return None
    return LabelSpace.from_json_obj(meta["space"])


def export_jsonl(dataset: Dataset, path: str | Path) -> None:
    """Write one {"id"?, "tokens", "ner_tags"} object per line, plus the sidecar."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for point in dataset.points:
            fh.write(json.dumps(point.to_json_obj(), ensure_ascii=False) + "\n")
    _write_meta(dataset, path)


def import_jsonl(
    path: str | Path,
    space: LabelSpace | None = None,
    name: str | None = None,
    provenance: Provenance | None = None,
) -> Dataset:
    """Read a JSONL dataset; label space comes from the sidecar unless given."""
    path = Path(path)
    meta = _read_meta(path)
    if space is None:
        if meta is None or "space" not in meta:
            raise ValueError(
                f"{path}: no label space given and no metadata sidecar found"
            )
        space = LabelSpace.from_json_obj(meta["space"])
    if meta is not None:
        name = name or meta.get("name")
        if provenance is None and "provenance" in meta:
            provenance = Provenance.from_json_obj(meta["provenance"])
    points = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                point = DataPoint.from_json_obj(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: malformed datapoint: {exc}") from exc
            if not point.fits(space):
                raise ValueError(f"{path}:{line_no}: tag id outside the label space")
            points.append(point)
    return Dataset(
        name=name or path.stem,
        space=space,
        points=tuple(points),
        provenance=provenance or Provenance(),
    )


def export_conll(dataset: Dataset, path: str | Path) -> None:
    """Write <token>TAB<tag-name> lines with blank-line sentence breaks."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for point in dataset.points:
            for token, tag in zip(point.tokens, point.tags):
                fh.write(f"{token}\t{dataset.space.names[tag]}\n")
            fh.write("\n")
    _write_meta(dataset, path)


def import_conll(
    path: str | Path,
    space: LabelSpace,
    name: str | None = None,
    provenance: Provenance | None = None,
) -> Dataset:
    """Read a CoNLL-style file. Lossless against export_conll except for ids."""
    path = Path(path)
    points: list[DataPoint] = []
    tokens: list[str] = []
    tags: list[int] = []
    region_lines = 0

    def flush(line_no: int) -> None:
        nonlocal tokens, tags, region_lines
        if tokens:
            points.append(DataPoint(tokens=tuple(tokens), tags=tuple(tags)))
        elif region_lines:
            logger.warning("%s:%d: zero-length sentence skipped", path, line_no)
        tokens, tags, region_lines = [], [], 0

    with open(path, encoding="utf-8") as fh:
        line_no = 0
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                flush(line_no)
                continue
            region_lines += 1
            if "\t" not in line:
                raise ValueError(f"{path}:{line_no}: expected <token>TAB<tag-name>")
            token, tag_name = line.rsplit("\t", 1)
            if not token:
                logger.warning("%s:%d: empty token skipped", path, line_no)
                continue
            try:
                tag = space.id_of(tag_name)
            except KeyError:
                raise ValueError(f"{path}:{line_no}: unknown tag name {tag_name!r}") from None
            tokens.append(token)
            tags.append(tag)
        flush(line_no)
    return Dataset(
        name=name or path.stem,
        space=space,
        points=tuple(points),
        provenance=provenance or Provenance(),
    )


@dataclass(frozen=True)
class RemapPolicy:
    """How source entity types translate into a target space.

    mapping sends a source type to a target type or to "O" (erase). Types not
    in the mapping keep their name when the target space has it; otherwise
    they are erased, or rejected when strict.
    """

    mapping: tuple[tuple[str, str], ...] = ()
    strict: bool = False

    def lookup(self, entity_type: str) -> str | None:
        for src, dst in self.mapping:
            if src == entity_type:
                return dst
        return None


def remap_labels(
    dataset: Dataset, target_space: LabelSpace, policy: RemapPolicy = RemapPolicy()
) -> Dataset:
    """Re-express a dataset in another label space.

    Token sequences never change; spans of erased types become O, every other
    span is preserved exactly.
    """
    type_map: dict[str, str] = {}
    for etype in dataset.space.entity_types:
        mapped = policy.lookup(etype)
        if mapped is None:
            if etype in target_space.entity_types:
                mapped = etype
            elif policy.strict:
                raise ValueError(f"entity type {etype!r} has no mapping into the target space")
            else:
                mapped = "O"
        if mapped != "O" and mapped not in target_space.entity_types:
            raise ValueError(f"mapped type {mapped!r} does not exist in the target space")
        type_map[etype] = mapped

    points = []
    for point in dataset.points:
        spans = decode_spans(point.tags, dataset.space)
        kept = [
            EntitySpan(type_map[s.entity_type], s.start, s.end)
            for s in spans
            if type_map[s.entity_type] != "O"
        ]
        points.append(
            DataPoint(
                tokens=point.tokens,
                tags=tuple(encode_spans(kept, len(point.tokens), target_space)),
                id=point.id,
            )
        )
    return Dataset(
        name=dataset.name,
        space=target_space,
        points=tuple(points),
        provenance=dataset.provenance,
    )


def compile_dataset(
    report: HarvestReport,
    space: LabelSpace,
    *,
    cap: int = 5000,
    rng_seed: int = 0,
    name: str = "synthetic",
    generator: str = "unknown",
) -> Dataset:
    """Turn a harvest report into a training dataset, sampling down to the cap."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if not report.accepted:
        raise ValueError("harvest produced no accepted datapoints; nothing to compile")
    points = list(report.accepted)
    if len(points) > cap:
        rng = random.Random(rng_seed)
        keep = sorted(rng.sample(range(len(points)), cap))
        points = [points[i] for i in keep]
    return Dataset(
        name=name,
        space=space,
        points=tuple(points),
        provenance=Provenance(kind="synthetic", generator=generator, rng_seed=rng_seed),
    )


def subset_ladder(dataset: Dataset, ladder: SizeLadder) -> list[Dataset]:
    """Nested shuffled-prefix subsets, one per rung.

    A single seeded shuffle orders the data; rung r takes the first r points,
    so smaller rungs are subsets of larger ones. Rungs beyond the dataset size
    are clipped to the full dataset.
    """
    order = list(range(len(dataset.points)))
    random.Random(ladder.rng_seed).shuffle(order)
    subsets = []
    for rung in ladder.sizes:
        size = min(rung, len(dataset.points))
        if size < rung:
            logger.warning(
                "ladder rung %d clipped to %d (dataset size)", rung, size
            )
        subsets.append(
            Dataset(
                name=f"{dataset.name}-n{size}",
                space=dataset.space,
                points=tuple(dataset.points[i] for i in order[:size]),
                provenance=dataset.provenance,
            )
        )
    return subsets
