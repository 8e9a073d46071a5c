"""CLI: train a token classifier from a config file, or run inference."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import TrainConfig
from .predict import predict
from .train import train


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ner-trainer", description="Fine-tune and run NER token classifiers"
    )
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train per a JSON config; writes a checkpoint dir")
    p.add_argument("--config", required=True, help="TrainConfig JSON file")

    p = sub.add_parser("predict", help="tag a JSONL file with a trained checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-seq-length", type=int, default=256)
    p.add_argument("--device", default="cpu")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "train":
            out_dir = train(TrainConfig.from_file(args.config))
            print(f"checkpoint -> {out_dir}")
        else:
            out = predict(
                args.checkpoint,
                args.input,
                args.output,
                batch_size=args.batch_size,
                max_seq_length=args.max_seq_length,
                device=args.device,
            )
            print(f"predictions -> {out}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
