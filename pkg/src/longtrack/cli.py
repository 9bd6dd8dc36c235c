"""Command-line entry points.

Subcommands:
    track  - run the tracker over an OTB-style sequence, write results.csv
    eval   - score results against ground truth, write curve CSVs
    synth  - generate a synthetic test sequence with exact ground truth

Exit codes: 0 ok, 1 internal error, 2 input error, 3 evaluation mismatch.
Config files are flat ``key=value`` lines over TrackerConfig fields; CLI
``--param key=value`` overrides take precedence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import evaluation, otb, synth
from .boxes import Box
from .errors import InputError, TrackingError
from .tracker import TrackerConfig, config_from_mapping, run_sequence

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_MISMATCH = 3


def _parse_config(config_file, params, seed=None) -> TrackerConfig:
    values: dict[str, str] = {}
    if config_file:
        path = Path(config_file)
        if not path.is_file():
            raise InputError(f"config file not found: {path}")
        for line_no, line in enumerate(path.read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{line_no}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    for item in params or []:
        if "=" not in item:
            raise InputError(f"--param needs key=value, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    if seed is not None:
        values["seed"] = str(seed)
    return config_from_mapping(values)


def _parse_init(text: str) -> Box:
    parts = text.split(",")
    if len(parts) != 4:
        raise InputError(f"--init needs x,y,w,h, got {text!r}")
    try:
        x, y, w, h = (float(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"--init needs numbers, got {text!r}") from exc
    return Box(x, y, w, h)


def cmd_track(args) -> int:
    config = _parse_config(args.config, args.param, args.seed)
    if args.init:
        init_box = _parse_init(args.init)
    else:
        rects = otb.read_rects(otb.groundtruth_path(args.seq))
        init_box = Box(*rects[0])
    frames = otb.iter_frames(args.seq)
    boxes, diags = run_sequence(frames, init_box, config,
                                deep_dir=args.deep_features)
    otb.write_results(args.out, boxes, diags)
    print(f"tracked {len(boxes)} frames -> {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    rows = otb.read_results(args.results)
    preds = otb.boxes_from_results(rows)
    gts = otb.read_rects(args.gt)
    if len(preds) != len(gts):
        print(f"error: {len(preds)} result rows vs {len(gts)} ground-truth rows",
              file=sys.stderr)
        return EXIT_MISMATCH
    result = evaluation.evaluate(preds, gts)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    evaluation.write_curve_csv(out_dir / "precision.csv",
                               result.precision_thresholds, result.precision)
    evaluation.write_curve_csv(out_dir / "success.csv",
                               result.success_thresholds, result.success)
    evaluation.write_summary_csv(out_dir / "summary.csv", result)
    print(f"precision@20={result.precision_at_20:.3f} auc={result.auc:.3f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    sequence = synth.generate(args.scenario, frames=args.frames,
                              frame_size=(args.width, args.height),
                              target_side=args.target, speed=args.speed,
                              zoom_rate=args.zoom,
                              occlusion=(args.occlude_start, args.occlude_end),
                              seed=args.seed)
    otb.save_sequence(args.out, sequence.frames, sequence.boxes)
    print(f"wrote {len(sequence.frames)} frames to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="longtrack",
        description="Long-term correlation tracking with re-detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="track a sequence")
    p_track.add_argument("--seq", required=True, help="sequence directory")
    p_track.add_argument("--init", help="initial box as x,y,w,h "
                         "(default: first ground-truth row)")
    p_track.add_argument("--out", default="results.csv")
    p_track.add_argument("--config", help="key=value config file")
    p_track.add_argument("--param", action="append",
                         help="config override key=value (repeatable)")
    p_track.add_argument("--seed", type=int)
    p_track.add_argument("--deep-features",
                         help="directory of per-frame .mlhf files")
    p_track.set_defaults(func=cmd_track)

    p_eval = sub.add_parser("eval", help="score results against ground truth")
    p_eval.add_argument("--results", required=True)
    p_eval.add_argument("--gt", required=True, help="groundtruth_rect.txt")
    p_eval.add_argument("--out-dir", default=".")
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a synthetic sequence")
    p_synth.add_argument("--scenario", required=True, choices=synth.SCENARIOS)
    p_synth.add_argument("--out", required=True, help="output sequence directory")
    p_synth.add_argument("--frames", type=int, default=100)
    p_synth.add_argument("--width", type=int, default=640)
    p_synth.add_argument("--height", type=int, default=480)
    p_synth.add_argument("--target", type=int, default=40)
    p_synth.add_argument("--speed", type=float, default=3.0)
    p_synth.add_argument("--zoom", type=float, default=1.02)
    p_synth.add_argument("--occlude-start", type=int, default=40)
    p_synth.add_argument("--occlude-end", type=int, default=60)
    p_synth.add_argument("--seed", type=int, default=7)
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TrackingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
