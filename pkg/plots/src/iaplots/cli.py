"""CLI: render figures from a simulator output directory.

    plots --in <dir> --out <dir> [--trials <list>] [--format svg|png]

--trials takes a comma-separated index list or "all"; without it only the
gain figure is produced. Exit code 2 on any input problem (missing files,
parse errors, unknown trial indices).
"""

from __future__ import annotations

import argparse
import sys

from .figures import FORMATS, PlotJob, plot_gain, plot_spectrum, plot_streams, resolve_trials
from .io import PlotInputError, read_trials


def parse_trial_list(text: str):
    if text == "all":
        return "all"
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise PlotInputError(f"bad --trials value {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render gain/spectrum/stream figures from campaign logs."
    )
    parser.add_argument("--in", dest="in_dir", required=True, help="directory with trials.jsonl")
    parser.add_argument("--out", dest="out_dir", required=True)
    parser.add_argument("--trials", default=None, help='comma-separated indices or "all"')
    parser.add_argument("--format", dest="fmt", default="svg", choices=FORMATS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        selector = parse_trial_list(args.trials) if args.trials is not None else []
        job = PlotJob(in_dir=args.in_dir, out_dir=args.out_dir, fmt=args.fmt, trials=selector)
        result = plot_gain(job)
        written = [result.path]
        if selector:
            records = read_trials(job.trials_path)
            for trial in resolve_trials(job, records):
                written.append(plot_spectrum(job, trial))
                written.append(plot_streams(job, trial))
        print(f"wrote {len(written)} figures to {args.out_dir} "
              f"(final mean gain {result.final_mean:.12g})")
        return 0
    except PlotInputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
