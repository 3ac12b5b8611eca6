"""Command-line interface.

Exit codes: 0 ok, 2 usage error, 3 input error (missing/malformed files or
configs), 4 processing error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import DEFAULT_STATIONS, Calibration
from .colorseg import SegMethod, SegmentationConfig
from .edges import Roi
from .errors import AblatrackError, ConfigInvalid, InputError
from .frames import FlowDirection, SynthVideoConfig, generate_synthetic_video, open_frame_source
from .pipeline import ProcessingMeta, analyze, auto_configure, estimate_diameter_px, load_edges_file, process
from .timeseg import Conv1DNet, SyntheticSignalConfig, TrainConfig, save_model, train
from .version import __version__


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ablatrack", description="Plasma-tunnel test video analysis")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="extract per-frame edges into an edges JSON")
    p.add_argument("manifest", help="frame-sequence manifest JSON")
    p.add_argument("--method", choices=[m.value for m in SegMethod], default=None)
    p.add_argument("--first", type=int, default=None, metavar="N")
    p.add_argument("--last", type=int, default=None, metavar="M")
    p.add_argument("--stride", type=int, default=None, metavar="K")
    p.add_argument("--roi", default=None, metavar="X,Y,W,H")
    p.add_argument("--flow", choices=["left", "right"], default=None)
    p.add_argument("--model", default=None, help="trained time-segmentation model JSON")
    p.add_argument("--gray-threshold", type=int, default=None)
    p.add_argument("--meta", default=None, help="load a full processing-meta JSON instead of auto-configuring")
    p.add_argument("--out", default="edges.json")
    p.add_argument("--save-meta", default=None, help="also write the resolved metadata JSON here")

    p = sub.add_parser("analyze", help="build calibrated time series, fits, CSVs and a figure")
    p.add_argument("edges", nargs="+", help="one or more edges JSON files (later files win on overlap)")
    p.add_argument("--diameter-mm", type=float, required=True)
    p.add_argument("--diameter-px", type=float, default=None, help="default: sample extent on the first kept frame")
    p.add_argument("--stations", type=float, nargs="+", default=list(DEFAULT_STATIONS))
    p.add_argument("--out", required=True, metavar="PREFIX")
    p.add_argument("--no-plots", action="store_true")

    p = sub.add_parser("train-timeseg", help="train the window-of-interest model on synthetic signals")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="model.json")

    p = sub.add_parser("synth", help="generate a synthetic test video with ground truth")
    p.add_argument("--config", default=None, help="SynthVideoConfig JSON (defaults used when omitted)")
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("serve", help="run the HTTP service for the browser UI")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--static", default=None, metavar="DIR")
    p.add_argument("--host", default="127.0.0.1")
    return parser


def _parse_roi(text: str) -> Roi:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigInvalid(f"--roi expects X,Y,W,H, got {text!r}")
    return Roi(*[int(v) for v in parts])


def cmd_process(args) -> int:
    source = open_frame_source(args.manifest)
    if args.meta:
        meta = ProcessingMeta.load(args.meta)
        meta.source = str(args.manifest)
    elif args.first is not None and args.last is not None:
        meta = ProcessingMeta(source=str(args.manifest), first_frame=args.first, last_frame=args.last)
        meta.flow = FlowDirection(args.flow) if args.flow else meta.flow
    else:
        meta = auto_configure(source, model_path=args.model)

    if args.first is not None:
        meta.first_frame = args.first
    if args.last is not None:
        meta.last_frame = args.last
    if args.stride is not None:
        meta.frame_stride = args.stride
    if args.roi is not None:
        meta.roi = _parse_roi(args.roi)
    if args.flow is not None:
        meta.flow = FlowDirection(args.flow)
    if args.method is not None:
        meta.segmentation.method = SegMethod(args.method)
    if args.gray_threshold is not None:
        meta.segmentation.gray_threshold = args.gray_threshold
    if args.model is not None:
        meta.model_path = args.model

    edges = process(meta, out_path=args.out)
    if args.save_meta:
        meta.save(args.save_meta)
    kept = sum(1 for e in edges["frames"] if not e["rejected"])
    print(f"processed {len(edges['frames'])} frames ({kept} kept, {len(edges['rejected_frames'])} rejected)")
    print(f"edges written to {args.out}")
    if meta.flags:
        print(f"note: auto-configuration flags: {meta.flags}")
    return 0


def cmd_analyze(args) -> int:
    files = [load_edges_file(p) for p in args.edges]
    diameter_px = args.diameter_px if args.diameter_px else estimate_diameter_px(files[0])
    calibration = Calibration(args.diameter_mm, diameter_px)
    summary = analyze(files, calibration, tuple(args.stations), out_prefix=args.out, render=not args.no_plots)
    print(f"calibration: {calibration.mm_per_px:.6g} mm/px ({diameter_px:g} px across {args.diameter_mm:g} mm)")
    print(f"series: {summary['series_csv']}")
    print(f"fits:   {summary['fits_csv']}")
    if summary["figure"]:
        print(f"figure: {summary['figure']}")
    for name, fit in summary["fits"].items():
        print(f"  {name}: slope {fit.slope:.6g} +/- {fit.slope_stderr:.2g} per s (r2={fit.r_squared:.4f}, n={fit.n_points})")
    return 0


def cmd_train(args) -> int:
    cfg = TrainConfig(epochs=args.epochs, dataset_size=args.samples, seed=args.seed)
    net = Conv1DNet(seed=cfg.seed)
    report = train(net, cfg, SyntheticSignalConfig())
    save_model(net, args.out)
    print(f"trained {cfg.epochs} epochs on {cfg.dataset_size} synthetic signals (seed {cfg.seed})")
    print(f"final loss {report.loss_curve[-1]:.4f}, validation accuracy {report.final_val_accuracy:.4f}")
    print(f"model written to {args.out}")
    return 0


def cmd_synth(args) -> int:
    if args.config:
        try:
            cfg = SynthVideoConfig.from_json(json.loads(Path(args.config).read_text()))
        except FileNotFoundError:
            raise InputError(f"no config file at {args.config}") from None
        except (json.JSONDecodeError, TypeError) as exc:
            raise ConfigInvalid(f"bad synth config {args.config}: {exc}") from None
    else:
        cfg = SynthVideoConfig()
    source, _ = generate_synthetic_video(cfg, args.out)
    print(f"wrote {source.frame_count} frames ({source.width}x{source.height}) to {args.out}")
    print(f"manifest: {source.manifest_path}")
    print(f"ground truth: {Path(args.out) / 'gt.json'}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    serve(port=args.port, static_dir=args.static, host=args.host)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "process": cmd_process,
        "analyze": cmd_analyze,
        "train-timeseg": cmd_train,
        "synth": cmd_synth,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except AblatrackError as exc:
        print(f"processing error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
