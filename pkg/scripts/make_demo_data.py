#!/usr/bin/env python3
"""Build a small synthetic 'organic' dataset to seed demo pipeline runs.

Fabricates word-like sentences with BIO-consistent entity spans; useful as the
organic_path input of a mock-provider manifest when no real corpus is at hand.
"""

import argparse
import random

from nersynth.corpus import DEFAULT_SPACE_3, DEFAULT_SPACE_4, DataPoint
from nersynth.datasets import Dataset, Provenance, export_jsonl

SYLLABLES = ("ban", "der", "kil", "lom", "mun", "nar", "pol", "rau", "sut", "tiv", "vel", "zor")


def fabricate_point(rng: random.Random, space, index: int) -> DataPoint:
    length = rng.randint(4, 14)
    tokens = ["".join(rng.choice(SYLLABLES) for _ in range(rng.randint(1, 3))) for _ in range(length)]
    tags = [0] * length
    i = 0
    while i < length:
        if rng.random() < 0.3:
            etype = rng.choice(space.entity_types)
            span_len = min(rng.randint(1, 3), length - i)
            tags[i] = space.begin_id(etype)
            tokens[i] = tokens[i].capitalize()
            for j in range(i + 1, i + span_len):
                tags[j] = space.inside_id(etype)
                tokens[j] = tokens[j].capitalize()
            i += span_len
        else:
            i += 1
    return DataPoint(tokens=tuple(tokens), tags=tuple(tags), id=str(index))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", help="output JSONL path")
    parser.add_argument("--points", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--with-dates", action="store_true", help="use the 4-type label space")
    args = parser.parse_args()

    space = DEFAULT_SPACE_4 if args.with_dates else DEFAULT_SPACE_3
    rng = random.Random(args.seed)
    dataset = Dataset(
        name="demo-organic",
        space=space,
        points=tuple(fabricate_point(rng, space, i) for i in range(args.points)),
        provenance=Provenance(kind="organic", generator="make_demo_data", rng_seed=args.seed),
    )
    export_jsonl(dataset, args.output)
    print(f"wrote {len(dataset)} datapoints -> {args.output}")


if __name__ == "__main__":
    main()
