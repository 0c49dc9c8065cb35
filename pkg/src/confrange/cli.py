"""Command line pipeline: simulate, split, calibrate, predict, evaluate.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .conformal import DEFAULT_ALPHA, DEFAULT_SIGMA_FLOOR, load_model, save_model
from .dataio import read_manifest, split_manifest, write_manifest
from .errors import ConfRangeError
from .evaluation import DEFAULT_BINS, SizeBins, build_report, emit_report, read_predictions, write_predictions
from .plots import emit_case_plot
from .synth import SimConfig, simulate_dataset


class CommandError(Exception):
    """Runtime failure reported with exit code 1."""


def _fraction(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {text}")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _edges(text: str) -> SizeBins:
    try:
        return SizeBins(tuple(float(x) for x in text.split(",")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_simulate(args) -> int:
    config = SimConfig.from_json(args.config) if args.config else SimConfig()
    overrides = {
        "n_images": args.n_images,
        "height": args.height,
        "width": args.width,
        "n_samples": args.samples,
        "seed": args.seed,
        "miscal_temperature": args.miscal_temp,
        "low_quality_fraction": args.low_quality_fraction,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    d_min, d_max = config.difficulty_range
    if args.difficulty_min is not None or args.difficulty_max is not None:
        overrides["difficulty_range"] = (
            d_min if args.difficulty_min is None else args.difficulty_min,
            d_max if args.difficulty_max is None else args.difficulty_max,
        )
    try:
        config = replace(config, **overrides)
    except ValueError as exc:
        args.parser.error(str(exc))
    simulate_dataset(config, args.out_dir)
    print(Path(args.out_dir) / "manifest.csv")
    return 0


def cmd_split(args) -> int:
    manifest = split_manifest(read_manifest(args.manifest), args.calib_fraction, args.seed)
    write_manifest(manifest, args.out or args.manifest)
    n_cal = len(manifest.subset("calibration"))
    print(f"calibration={n_cal} test={len(manifest) - n_cal}")
    return 0


def cmd_calibrate(args) -> int:
    from .pipeline import calibrate_manifest

    manifest = read_manifest(args.manifest)
    split_now = args.split_fraction is not None
    if split_now:
        manifest = split_manifest(manifest, args.split_fraction, args.seed)
    model = calibrate_manifest(
        manifest, args.alpha, args.sigma_floor, args.fit_temperature, created_from=Path(args.manifest).name
    )
    if split_now:
        write_manifest(manifest, args.manifest)
    save_model(model, args.out)
    print(f"M={model.m} q_hat={model.q_hat}")
    if model.temperature is not None:
        print(f"temperature={model.temperature:.6f}")
    return 0


def cmd_predict(args) -> int:
    from .pipeline import predict_manifest

    manifest = read_manifest(args.manifest)
    model = load_model(args.model)
    records = predict_manifest(manifest, model, args.split)
    if not records:
        raise CommandError(f"no records in split {args.split!r} of {args.manifest}")
    write_predictions(records, args.out)
    print(f"wrote {len(records)} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    records = read_predictions(args.predictions)
    if not records:
        raise CommandError(f"{args.predictions}: no predictions")
    alpha = load_model(args.model).alpha if args.model else args.alpha
    report = build_report(records, alpha, args.bins)
    emit_report(report, args.report_json, args.report_csv, records)
    if args.plot_svg:
        emit_case_plot(records, args.plot_svg)
    print(f"marginal_coverage={report.marginal_coverage:.6f}")
    print(f"mean_width={report.width_stats['mean']:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confrange", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic dataset and manifest")
    p.add_argument("--config", help="JSON SimConfig; flags override its fields")
    p.add_argument("--n-images", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--difficulty-min", type=float)
    p.add_argument("--difficulty-max", type=float)
    p.add_argument("--miscal-temp", type=_positive)
    p.add_argument("--low-quality-fraction", type=float)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate, parser=p)

    p = sub.add_parser("split", help="assign calibration/test splits")
    p.add_argument("--manifest", required=True)
    p.add_argument("--calib-fraction", type=_fraction, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output manifest (default: overwrite input)")
    p.set_defaults(func=cmd_split, parser=p)

    p = sub.add_parser("calibrate", help="fit the conformal corrective factor")
    p.add_argument("--manifest", required=True)
    p.add_argument("--alpha", type=_fraction, default=DEFAULT_ALPHA)
    p.add_argument("--sigma-floor", type=_positive, default=DEFAULT_SIGMA_FLOOR)
    p.add_argument("--split-fraction", type=_fraction, help="split an unassigned manifest in place first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fit-temperature", action="store_true", help="temperature-scale all maps first")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_calibrate, parser=p)

    p = sub.add_parser("predict", help="predict ranges for the test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split", choices=["test", "calibration", "unassigned"], default="test")
    p.add_argument("--out", required=True, help="predictions CSV path")
    p.set_defaults(func=cmd_predict, parser=p)

    p = sub.add_parser("evaluate", help="coverage report and case plot")
    p.add_argument("--predictions", required=True)
    p.add_argument("--report-json", required=True)
    p.add_argument("--report-csv")
    p.add_argument("--plot-svg")
    p.add_argument("--model", help="read alpha from this model file")
    p.add_argument("--alpha", type=_fraction, default=DEFAULT_ALPHA)
    p.add_argument("--bins", type=_edges, default=DEFAULT_BINS, help="comma-separated width bin edges")
    p.set_defaults(func=cmd_evaluate, parser=p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfRangeError, CommandError, OSError, ValueError) as exc:
        print(f"confrange {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
