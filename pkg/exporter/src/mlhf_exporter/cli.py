"""Command-line entry point for the exporter.

Exit codes: 0 ok, 1 internal error, 2 input error (missing weights, missing
directories, frame/box count mismatch).
"""

from __future__ import annotations

import argparse
import sys

from .export import ExportError, export_sequence


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlhf-export",
        description="Export VGG19 feature maps of per-frame search windows "
                    "to .mlhf files")
    parser.add_argument("--seq", required=True,
                        help="sequence directory (img/%%04d frames)")
    parser.add_argument("--boxes", required=True,
                        help="per-frame target boxes: results.csv "
                             "(frame,x,y,w,h,...) or groundtruth_rect.txt")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--weights",
                        help="VGG19 state-dict file (torch .pth)")
    parser.add_argument("--random-init", action="store_true",
                        help="run an untrained, seeded network instead of "
                             "pretrained weights (format testing)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    progress = None
    if not args.quiet:
        progress = lambda i, n: print(f"\rframe {i}/{n}", end="",
                                      file=sys.stderr)
    try:
        written = export_sequence(args.seq, args.boxes, args.out,
                                  weights=args.weights,
                                  random_init=args.random_init,
                                  seed=args.seed, progress=progress)
    except ExportError as exc:
        print(f"\nerror: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"\nerror: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(file=sys.stderr)
    print(f"wrote {len(written)} feature files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
