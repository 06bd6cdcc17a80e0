"""Command line front end: ``fuelclean run | synth | score``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import io
from .errors import ConfigError, FuelCleanError
from .evaluation import score
from .pipeline import analyze
from .synth import NoiseProfile, corrupt, generate_clean

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2

STAGES = ("preprocessed", "clustered", "wavelet", "median", "final")


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the config status instead of argparse's 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(trace_path: str, config_path: str | None, out_dir: str) -> int:
    try:
        config = io.load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        trace = io.load_trace(trace_path)
        result = analyze(trace, config)
        out = _out_dir(out_dir)
        io.write_refill_report(result.events, None, out / "refills.csv")
        io.write_consumption(result.segments, out / "consumption.csv")
        for name in STAGES:
            io.write_series(trace.index, result.stages[name], out / f"stage_{name}.csv")
    except (FuelCleanError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"{len(result.events)} refills, {len(result.segments)} consumption segments -> {out}")
    return EXIT_OK


def cmd_synth(
    n: int, refills: int, profile: NoiseProfile, seed: int, out_dir: str, tank: float = 60.0
) -> int:
    try:
        truth = generate_clean(n, tank, refills, seed)
        trace = corrupt(truth, profile)
        out = _out_dir(out_dir)
        io.write_trace(trace, out / "trace.csv")
        io.write_truth(truth, out / "truth.csv")
    except (FuelCleanError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"{n} samples, {refills} refills -> {out}")
    return EXIT_OK


def cmd_score(report_path: str, truth_path: str, tolerance: int = 100) -> int:
    try:
        events = io.read_refill_report(report_path)
        truth = io.read_truth(truth_path)
        report = score(events, truth, tolerance)
    except (FuelCleanError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    sys.stdout.write(report.to_text())
    return EXIT_OK


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def _non_negative(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"{text} must be non-negative")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuelclean", description="Fuel level denoising and refill detection.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="denoise a trace and extract refills")
    run.add_argument("trace", help="input CSV with index,level columns")
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--out", default="out", help="output directory")

    syn = sub.add_parser("synth", help="write a labelled synthetic trace")
    syn.add_argument("--n", type=int, default=100_000)
    syn.add_argument("--refills", type=_count, default=37)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--tank", type=float, default=60.0)
    syn.add_argument("--white-sigma", type=_non_negative, default=0.0)
    syn.add_argument("--spike-prob", type=_probability, default=0.0)
    syn.add_argument("--spike-max", type=_non_negative, default=20.0)
    syn.add_argument("--stuck-prob", type=_probability, default=0.0)
    syn.add_argument("--zero-prob", type=_probability, default=0.0)
    syn.add_argument("--out", default="synth", help="output directory")

    sc = sub.add_parser("score", help="compare a refill report with truth")
    sc.add_argument("report")
    sc.add_argument("truth")
    sc.add_argument("--tolerance", type=_count, default=100)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.trace, args.config, args.out)
    if args.command == "synth":
        if args.n < 1000:
            print("error: --n must be at least 1000", file=sys.stderr)
            return EXIT_CONFIG
        profile = NoiseProfile(
            white_sigma=args.white_sigma,
            spike_prob=args.spike_prob,
            spike_max=args.spike_max,
            stuck_prob=args.stuck_prob,
            zero_prob=args.zero_prob,
            seed=args.seed,
        )
        return cmd_synth(args.n, args.refills, profile, args.seed, args.out, args.tank)
    return cmd_score(args.report, args.truth, args.tolerance)


if __name__ == "__main__":
    sys.exit(main())
