"""Command-line front end.

Subcommands:
    trial     one seeded realization, record printed as JSON
    run       a seeded campaign -> trials.jsonl + summary.csv
    sweep     campaigns along one axis -> summary.csv
    protocol  synchronization runs -> trace.jsonl + detection stats

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 synchronization timeout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import SWEEP_AXES, load_config, parse_axis_values
from .errors import ConfigError, NumericalFailureError, SimulationError, SyncTimeoutError
from .harness import (
    _round_floats,
    fmt_float,
    mix_seed,
    run_campaign,
    run_trial,
    sweep,
)
from .protocol import run_sync, trace_to_jsonl

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SYNC = 4


def _cmd_trial(args) -> int:
    cfg = load_config(args.config)
    rec = run_trial(cfg, args.seed)
    print(json.dumps(_round_floats(rec.to_dict()), indent=2))
    if args.verbose:
        print(f"# r_d = {fmt_float(rec.r_d)} bits, baseline = {fmt_float(rec.r_d / rec.gain)} "
              f"bits, gain = {fmt_float(rec.gain)}", file=sys.stderr)
        for l, (a, s) in enumerate(zip(rec.alpha, rec.stream_snr)):
            print(f"# stream {l}: alpha = {fmt_float(a)}, post-ZF SNR = "
                  f"{fmt_float(10 * np.log10(s))} dB", file=sys.stderr)
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    summary, _ = run_campaign(cfg, args.trials, args.seed, out_dir=args.out,
                              workers=args.workers)
    print(
        f"{args.trials} trials: mean gain {fmt_float(summary.mean_gain)}, "
        f"median {fmt_float(summary.median_gain)}, "
        f"range [{fmt_float(summary.min_gain)}, {fmt_float(summary.max_gain)}]"
    )
    print(f"wrote {os.path.join(args.out, 'trials.jsonl')}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = parse_axis_values(args.axis, args.values)
    rows = sweep(cfg, args.axis, values, args.trials, args.seed, out_dir=args.out,
                 workers=args.workers)
    for value, s in rows:
        print(f"{args.axis}={value}: mean gain {fmt_float(s.mean_gain)} "
              f"(ci95 {fmt_float(s.ci95)})")
    print(f"wrote {os.path.join(args.out, 'summary.csv')}")
    return EXIT_OK


def _cmd_protocol(args) -> int:
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "trace.jsonl")
    detect = []
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for run in range(args.runs):
            rng = np.random.default_rng(mix_seed(args.seed, run))
            trace = run_sync(
                cfg.protocol(),
                rng,
                beacon_snr=cfg.beacon_snr_db,
                miss_probability=args.miss_prob,
                slot_cap=cfg.slot_cap,
            )
            fh.write(trace_to_jsonl(trace, run=run if args.runs > 1 else None))
            detect.append(trace.slots_to_detect)
    print(
        f"{args.runs} runs: mean slots-to-detect {fmt_float(float(np.mean(detect)))}, "
        f"max {max(detect)}; wrote {path}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iasim",
        description="Two-cell downlink precoding simulator with an OFDMA baseline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trial", help="run one seeded trial and print its record")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_trial)

    p = sub.add_parser("run", help="run a seeded Monte Carlo campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="campaigns along one parameter axis")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("protocol", help="run the synchronization state machine")
    p.add_argument("--config", required=True)
    p.add_argument("--miss-prob", type=float, default=0.0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_protocol)
    return parser


def _adopt_negative_values(argv: list[str]) -> list[str]:
    """Join `--values -10,...` into one token so argparse keeps the dash."""
    out = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok == "--values" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--values={argv[i + 1]}")
            skip = True
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_adopt_negative_values(list(argv)))
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SyncTimeoutError as exc:
        print(f"sync timeout: {exc}", file=sys.stderr)
        return EXIT_SYNC
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
