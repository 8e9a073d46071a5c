#!/usr/bin/env python3
"""End-to-end demo of the pipeline against the offline mock provider.

Builds a demo organic dataset, writes a manifest, then drives the CLI through
generate -> harvest -> subset and finishes with a self-evaluation of the
compiled dataset (F1 1.0 by construction; it exercises the evaluate path).
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path

from nersynth.cli import main as nersynth_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="runs/mock-demo")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--calls", type=int, default=50)
    args = parser.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    organic_path = workdir / "organic.jsonl"
    subprocess.run(
        [sys.executable, str(Path(__file__).parent / "make_demo_data.py"),
         str(organic_path), "--points", "120", "--seed", str(args.seed)],
        check=True,
    )

    manifest = {
        "language": "Danish",
        "organic_path": "organic.jsonl",
        "provider": {
            "kind": "mock",
            "well_formatted": 0.6,
            "unequal_lengths": 0.2,
            "run_on_incomplete": 0.1,
            "empty_or_continuation": 0.1,
            "rng_seed": args.seed,
        },
        "plan": {"m": 10, "n": 20, "k": args.calls, "compile_cap": 5000, "rng_seed": args.seed},
        "ladder": {"sizes": [100, 250, 500], "rng_seed": args.seed},
        "label_space": {"entity_types": ["PER", "ORG", "LOC"]},
        "output_dir": "out",
    }
    manifest_path = workdir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")

    for step in (
        ["generate", "--manifest", str(manifest_path)],
        ["harvest", "--manifest", str(manifest_path)],
        ["subset", str(workdir / "out" / "synthetic.jsonl"), "--manifest", str(manifest_path)],
        ["evaluate", str(workdir / "out" / "synthetic.jsonl"), str(workdir / "out" / "synthetic.jsonl")],
    ):
        print(f"\n$ nersynth {' '.join(step)}")
        code = nersynth_main(step)
        if code != 0:
            return code
    print(f"\nartifacts in {workdir / 'out'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
