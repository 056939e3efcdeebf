"""Command-line driver: ``repeater-lnc <subcommand> ...``.

Exit codes: 0 success, 2 validation error, 3 solver or simulation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .channel import EXAMPLE_CHANNEL, ChannelSpec, is_strong_relaying, load_channel
from .coding_types import feasible_types
from .evaluation import (
    BOUNDS, GAP_MODES, REGION_ALL, build_bound_lp, gap_csv, gap_records, gap_summary, region_csv, region_points,
)
from .lp import LpError, weight_grid
from .simulator import SimulationError, simulate

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER = 0, 2, 3
BUILTIN_CHANNELS = {"example": EXAMPLE_CHANNEL}


class ValidationError(ValueError):
    pass


def _channel(arg: str | None) -> ChannelSpec:
    if arg is None or arg in BUILTIN_CHANNELS:
        return BUILTIN_CHANNELS[arg or "example"]
    path = Path(arg)
    if not path.is_file():
        raise ValidationError(f"channel file {arg!r} not found")
    return load_channel(path)


def _warn_strong(ch: ChannelSpec, what: str) -> None:
    if not is_strong_relaying(ch):
        print(f"warning: channel is not strong-relaying; {what} may not be achievable", file=sys.stderr)


def _pair(text: str, name: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"{name} must be two comma-separated numbers, got {text!r}") from exc
    return a, b


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_enumerate(args) -> int:
    lam, lam_r = feasible_types()
    _emit("".join(t.encode() + "\n" for t in lam + lam_r), args.out)
    return EXIT_OK


def cmd_region(args) -> int:
    ch = _channel(args.channel)
    if args.weights < 1:
        raise ValidationError("--weights must be a positive count")
    weights = weight_grid(args.weights)
    bounds = REGION_ALL if args.all else (args.bound,)
    if "inner-strong" in bounds:
        _warn_strong(ch, "the inner-strong region")
    curves = {b: region_points(b, ch, weights) for b in bounds}
    _emit(region_csv(curves), args.out)
    return EXIT_OK


def cmd_gap_cdf(args) -> int:
    records = gap_records(args.samples, args.mode, args.seed, args.sampling, args.workers)
    _emit(gap_csv(records), args.out)
    print(gap_summary(records, args.samples), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_dump_lp(args) -> int:
    ch = _channel(args.channel)
    lp = build_bound_lp(args.bound, ch)
    lp.maximize({"R1": 1.0, "R2": 1.0})
    _emit(lp.to_lp_format(), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    ch = _channel(args.channel)
    if args.slots < 0:
        raise ValidationError("--slots must be non-negative")
    rates = _pair(args.rates, "--rates") if args.rates else None
    if rates and min(rates) < 0:
        raise ValidationError("--rates must be non-negative")
    if args.prop == 2:
        _warn_strong(ch, "the strong-relaying scheme")
    try:
        report = simulate(
            ch, args.slots, seed=args.seed, fraction=args.fraction, prop=args.prop,
            audit_period=args.audit_period, trace_path=args.trace, rates=rates,
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    _emit(report.to_text() + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="repeater-lnc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, channel=True):
        sp.add_argument("--out", help="output file (default stdout)")
        if channel:
            sp.add_argument("--channel", help="channel YAML/JSON file or 'example' (default)")

    sp = sub.add_parser("enumerate-types", help="print the feasible and relay-feasible coding types")
    common(sp, channel=False)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("region", help="boundary points of a rate region as CSV")
    common(sp)
    sp.add_argument("--bound", choices=BOUNDS, default="outer")
    sp.add_argument("--all", action="store_true", help="outer, inner-strong and the six baselines")
    sp.add_argument("--weights", type=int, default=32, help="number of weight directions")
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("gap-cdf", help="relative sum-rate gaps over sampled channels")
    common(sp, channel=False)
    sp.add_argument("--mode", default="strong-relaying",
                    help=f"{' or '.join(GAP_MODES)} (optionally suffixed +prop2 / +prop3)")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sampling", choices=("uniform-independent", "dirichlet-joint"), default="uniform-independent")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_gap_cdf)

    sp = sub.add_parser("dump-lp", help="write an LP in CPLEX LP format (sum-rate objective)")
    common(sp)
    sp.add_argument("--bound", choices=BOUNDS, default="outer")
    sp.set_defaults(func=cmd_dump_lp)

    sp = sub.add_parser("simulate", help="run the packet-level queueing simulator")
    common(sp)
    sp.add_argument("--rates", help="R1,R2 (default: --fraction of the max sum-rate point)")
    sp.add_argument("--fraction", type=float, default=0.98)
    sp.add_argument("--slots", type=int, default=200_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--prop", type=int, choices=(2, 3), default=2,
                    help="2: strong-relaying scheme, 3: general scheme with self-mixing")
    sp.add_argument("--audit-period", type=int, default=10_000)
    sp.add_argument("--trace", help="per-slot trace CSV path")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # includes ValidationError and ChannelError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (LpError, SimulationError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
