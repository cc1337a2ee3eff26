"""Command line entry points: run, eval, timing."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .metrics import ConfusionCounts, accumulate_confusion, compute_metrics, format_report
from .model import Params, init_model, step
from .postprocess import clean_mask
from .timing import decimate, run_update_timing, timing_table
from .video_io import (
    CdnetSequence,
    FrameSource,
    downsample,
    frame_number,
    list_frames,
    load_image,
    load_labels,
    write_gray,
    write_mask,
)


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None,
                   help="flat key-value file with defaults; flags override it")
    p.add_argument("--input", type=Path, required=True, help="frame directory")
    p.add_argument("--init-count", type=int, default=15,
                   help="number of leading frames used for initialization")
    p.add_argument("--init-dir", type=Path, default=None,
                   help="directory of initialization frames (overrides --init-count)")
    p.add_argument("--ell", type=int, default=15)
    p.add_argument("--n-star", type=int, default=30)
    p.add_argument("--eta", type=float, default=30.0)
    p.add_argument("--tau-star-factor", type=float, default=0.05)
    p.add_argument("--beta", type=int, default=6)
    p.add_argument("--nu", type=int, default=3)
    p.add_argument("--delta-t", type=int, default=6)
    p.add_argument("--s-bar", type=float, default=0.97)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--period", type=int, default=10,
                   help="blocks between forced updates, 0 disables")
    p.add_argument("--strategy", choices=("ii", "iii"), default="iii")
    p.add_argument("--stride", type=int, default=1,
                   help="consider only every k-th frame for background updates")
    p.add_argument("--downsample", type=int, default=1,
                   help="box-average window applied to every frame")
    p.add_argument("--morph-radius", type=int, default=2)
    p.add_argument("--min-blob", type=int, default=15)
    p.add_argument("--out-masks", type=Path, default=None)
    p.add_argument("--out-foregrounds", type=Path, default=None)
    p.add_argument("--out-backgrounds", type=Path, default=None)
    p.add_argument("--out-metrics", type=Path, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgsvd",
        description="Streaming low-rank background subtraction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process a frame directory and emit masks")
    _add_model_args(run)

    ev = sub.add_parser("eval", help="evaluate against CDnet-style ground truth")
    _add_model_args(ev)

    tm = sub.add_parser("timing", help="summed append/re-init time per image size")
    _add_model_args(tm)
    tm.add_argument("--divisors", type=str, default="1,2,4,8,16",
                    help="comma-separated pixel-count divisors")
    tm.add_argument("--timing-frames", type=int, default=900,
                    help="frames offered for updates at each size")
    tm.add_argument("--out-timing", type=Path, default=None)
    return parser


def read_config_file(path: Path) -> dict:
    """Flat ``key value`` or ``key = value`` lines; '#' starts a comment."""
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, val = line.partition("=")
        else:
            key, _, val = line.partition(" ")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if not key or not val:
            raise ValueError("malformed config line: %r" % raw)
        values[key] = val
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: list) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        raw = read_config_file(args.config)
        types = {}
        for action in parser._subparsers._group_actions[0].choices[args.command]._actions:
            types[action.dest] = action.type
        defaults = {}
        for key, val in raw.items():
            if key not in types:
                raise ValueError("unknown config key: %s" % key)
            cast = types[key]
            defaults[key] = cast(val) if cast else val
        parser._subparsers._group_actions[0].choices[args.command].set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _params_from_args(args) -> Params:
    return Params(
        ell=args.ell, n_star=args.n_star, eta=args.eta,
        tau_star_factor=args.tau_star_factor, beta=args.beta, nu=args.nu,
        delta_t=args.delta_t, s_bar=args.s_bar, theta=args.theta,
        period=args.period, strategy=args.strategy,
        morph_radius=args.morph_radius, min_blob_area=args.min_blob,
        downsample_window=args.downsample, update_stride=args.stride,
    )


def _load_frames(paths, window: int) -> list:
    frames = []
    for p in paths:
        img = load_image(p)
        if window > 1:
            img = downsample(img, window)
        frames.append(img)
    return frames


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _summary_lines(state, masks_written: int, elapsed: float) -> list:
    fps = state.frames_seen / elapsed if elapsed > 0 else 0.0
    work = state.append_seconds + state.reinit_seconds
    return [
        "frames_processed %d" % state.frames_seen,
        "masks_written %d" % masks_written,
        "updates_offered %d" % state.updates_offered,
        "frames_accepted %d" % state.frames_accepted,
        "frames_rejected_tau %d" % state.frames_rejected_tau,
        "frames_rejected_similarity %d" % state.frames_rejected_similarity,
        "degenerate_frames %d" % state.degenerate_frames,
        "pending_at_end %d" % len(state.pending),
        "blocks_appended %d" % state.blocks_appended,
        "reinit_count %d" % state.reinit_count,
        "append_seconds %.4f" % state.append_seconds,
        "reinit_seconds %.4f" % state.reinit_seconds,
        "update_seconds %.4f" % work,
        "fps %.2f" % fps,
    ]


def cmd_run(args) -> int:
    files = list_frames(FrameSource(args.input))
    if not files:
        print("error: no input frames in %s" % args.input, file=sys.stderr)
        return 1
    if args.init_dir is not None:
        init_paths = list_frames(FrameSource(args.init_dir))
        stream_paths = files
    else:
        init_paths = files[: args.init_count]
        stream_paths = files[args.init_count:]
    if not init_paths:
        print("error: no initialization frames", file=sys.stderr)
        return 1

    params = _params_from_args(args)
    state = init_model(_load_frames(init_paths, args.downsample), params)
    if state.basis.rank < params.ell:
        print("warning: initialization rank %d below ell=%d, cap lowered"
              % (state.basis.rank, params.ell), file=sys.stderr)

    masks_dir = _ensure_dir(args.out_masks) if args.out_masks else None
    fg_dir = _ensure_dir(args.out_foregrounds) if args.out_foregrounds else None
    bg_dir = _ensure_dir(args.out_backgrounds) if args.out_backgrounds else None

    written = 0
    t0 = time.perf_counter()
    for path in stream_paths:
        img = load_image(path)
        if args.downsample > 1:
            img = downsample(img, args.downsample)
        result = step(state, img)
        mask = clean_mask(result.mask, args.morph_radius, args.min_blob)
        if masks_dir is not None:
            write_mask(masks_dir / (path.stem + ".png"), mask)
            written += 1
        if fg_dir is not None:
            write_gray(fg_dir / (path.stem + ".png"), np.where(mask, img, 0.0))
        if bg_dir is not None:
            write_gray(bg_dir / (path.stem + ".png"), result.background)
    elapsed = time.perf_counter() - t0

    summary = "\n".join(_summary_lines(state, written, elapsed)) + "\n"
    sys.stdout.write(summary)
    if args.out_metrics:
        args.out_metrics.parent.mkdir(parents=True, exist_ok=True)
        args.out_metrics.write_text(summary)
    return 0


def _upsample_mask(mask: np.ndarray, window: int, shape) -> np.ndarray:
    if window == 1:
        return mask
    big = np.kron(mask, np.ones((window, window), dtype=bool))
    return big[: shape[0], : shape[1]]


def cmd_eval(args) -> int:
    seq = CdnetSequence.from_root(args.input)
    files = seq.input_files()
    if not files:
        print("error: no input frames in %s" % seq.input_dir, file=sys.stderr)
        return 1
    numbers = [frame_number(p) for p in files]
    pre = [p for p, n in zip(files, numbers) if n < seq.t_start]
    stream = [(p, n) for p, n in zip(files, numbers) if seq.t_start <= n <= seq.t_end]
    if not pre or not stream:
        print("error: temporal ROI leaves no initialization or evaluation frames",
              file=sys.stderr)
        return 1
    picks = np.unique(np.round(np.linspace(0, len(pre) - 1, min(args.init_count, len(pre)))).astype(int))
    init_paths = [pre[i] for i in picks]

    params = _params_from_args(args)
    state = init_model(_load_frames(init_paths, args.downsample), params)

    masks_dir = _ensure_dir(args.out_masks) if args.out_masks else None
    totals = ConfusionCounts()
    evaluated = 0
    missing = 0
    proc_seconds = 0.0
    for path, number in stream:
        img = load_image(path)
        if args.downsample > 1:
            img = downsample(img, args.downsample)
        t0 = time.perf_counter()
        result = step(state, img)
        mask = clean_mask(result.mask, args.morph_radius, args.min_blob)
        proc_seconds += time.perf_counter() - t0
        gt_path = seq.groundtruth_path(number)
        if masks_dir is not None:
            write_mask(masks_dir / ("mask%06d.png" % number), mask)
        if not gt_path.is_file():
            missing += 1
            print("warning: missing ground truth %s, frame excluded" % gt_path,
                  file=sys.stderr)
            continue
        gt = load_labels(gt_path)
        totals = totals + accumulate_confusion(_upsample_mask(mask, args.downsample, gt.shape), gt)
        evaluated += 1

    report = compute_metrics(totals)
    fps = evaluated / proc_seconds if proc_seconds > 0 else 0.0
    text = format_report(totals, report, extra={
        "sequence": seq.root.name,
        "frames_evaluated": evaluated,
        "frames_missing_gt": missing,
        "fps_processing": "%.1f" % fps,
    })
    sys.stdout.write(text)
    if args.out_metrics:
        args.out_metrics.parent.mkdir(parents=True, exist_ok=True)
        args.out_metrics.write_text(text)
    return 0


def cmd_timing(args) -> int:
    files = list_frames(FrameSource(args.input))
    if not files:
        print("error: no input frames in %s" % args.input, file=sys.stderr)
        return 1
    base = _load_frames(files, 1)
    init_count = min(args.init_count, len(base))
    divisors = sorted({int(tok) for tok in args.divisors.split(",") if tok.strip()})

    rows = []
    for divisor in divisors:
        frames = [decimate(f, divisor) for f in base]
        params = _params_from_args(args)
        row = run_update_timing(frames[:init_count], frames[init_count:] or frames,
                                params, n_update_frames=args.timing_frames)
        row["divisor"] = divisor
        rows.append(row)

    table = timing_table(rows)
    header = "%-10s %-10s %-12s %-8s %-12s %-8s" % (
        "divisor", "pixels", "append_s", "factor", "reinit_s", "factor")
    lines = [header]
    for row in sorted(table, key=lambda r: -r["pixels"]):
        lines.append("%-10d %-10d %-12.4f %-8.3f %-12.4f %-8.3f" % (
            row["divisor"], row["pixels"], row["append_seconds"],
            row["append_factor"], row["reinit_seconds"], row["reinit_factor"]))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out_timing:
        args.out_timing.parent.mkdir(parents=True, exist_ok=True)
        args.out_timing.write_text(text)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, list(sys.argv[1:] if argv is None else argv))
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    handlers = {"run": cmd_run, "eval": cmd_eval, "timing": cmd_timing}
    try:
        return handlers[args.command](args)
    except (IOError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
