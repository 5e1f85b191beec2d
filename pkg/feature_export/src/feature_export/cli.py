"""Command-line tool: export image features, convert noisy-label archives."""

from __future__ import annotations

import argparse
import json
import sys

from .convert import convert_noisy_labels
from .export import export_features


def _cmd_export(args) -> int:
    manifest = export_features(
        dataset=args.dataset,
        split=args.split,
        backbone=args.backbone,
        out_dir=args.out,
        batch_size=args.batch_size,
    )
    json.dump(manifest.to_json_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_convert(args) -> int:
    result = convert_noisy_labels(
        archive=args.archive,
        label_kind=args.kind,
        out=args.out,
        expected_n=args.expected_n,
        check_noise_rate=not args.skip_noise_check,
    )
    json.dump(result.to_json_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="feature-export", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="run a frozen backbone over an image dataset")
    p.add_argument("--dataset", required=True,
                   help="cifar10 | cifar100 | image-folder:<path>")
    p.add_argument("--split", default="train", help="train | test | all")
    p.add_argument("--backbone", required=True,
                   help="patch-mean-16 | resnet50-imagenet | dinov2-vit{s,b,l,g}14")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--batch-size", type=int, default=64)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("convert-labels", help="convert a noisy-label archive")
    p.add_argument("--archive", required=True, help=".pt or .npy label dictionary")
    p.add_argument("--kind", required=True,
                   help="Clean | Aggre | Rand1 | Rand2 | Rand3 | Worst | Noisy | Clean100")
    p.add_argument("--out", required=True, help="output label file")
    p.add_argument("--expected-n", type=int, default=50000)
    p.add_argument("--skip-noise-check", action="store_true")
    p.set_defaults(func=_cmd_convert)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
