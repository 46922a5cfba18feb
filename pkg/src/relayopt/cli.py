"""Command-line Monte-Carlo driver.

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .channel import SystemDims
from .errors import RelayOptError
from .harness import MODES, RunConfig, format_table, run_monte_carlo, write_csv


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="relayopt",
        description="Monte-Carlo sum rate of robust vs. naive AF MIMO relay transceivers.",
    )
    p.add_argument("--ns", type=int, default=4, help="source antennas")
    p.add_argument("--mr", type=int, default=4, help="relay receive antennas")
    p.add_argument("--nr", type=int, default=4, help="relay transmit antennas")
    p.add_argument("--md", type=int, default=4, help="destination antennas")
    p.add_argument("--streams", type=int, default=4, help="data streams N")
    p.add_argument("--rho", type=float, default=0.5, help="training correlation coefficient")
    p.add_argument("--snr-est-db", type=float, required=True,
                   help="channel-estimation SNR in dB ('inf' for perfect estimates)")
    p.add_argument("--snr-db", type=_float_list, default=[0, 5, 10, 15, 20, 25, 30],
                   help="comma-separated data SNRs in dB (default 0,5,...,30)")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="both")
    p.add_argument("--output", required=True, help="CSV output path")
    p.add_argument("--multistart", type=int, default=0, metavar="K",
                   help="extra random starts for the power allocation")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = RunConfig(
            snr_est_db=args.snr_est_db,
            dims=SystemDims(args.ns, args.mr, args.nr, args.md, args.streams),
            rho=args.rho,
            snr_data_db_list=tuple(args.snr_db),
            trials=args.trials,
            seed=args.seed,
            mode=args.mode,
            output_path=args.output,
            multistart=args.multistart,
        )
    except ValueError as exc:
        print(f"relayopt: error: {exc}", file=sys.stderr)
        return 2
    try:
        rows = run_monte_carlo(config)
        write_csv(rows, config.output_path)
    except (OSError, RelayOptError, ArithmeticError) as exc:
        print(f"relayopt: runtime error: {exc}", file=sys.stderr)
        return 1
    print(format_table(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
