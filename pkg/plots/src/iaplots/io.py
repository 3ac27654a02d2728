"""Readers for the simulator's output files.

The contract is the harness's file schemas: trials.jsonl holds one JSON
trial record per line, summary.csv a header plus one row per campaign.
Errors always name the offending path, and parse failures carry the
1-based line number.
"""

from __future__ import annotations

import csv
import json
import os


class PlotInputError(Exception):
    """Missing, empty, or malformed input file."""


TRIAL_FIELDS = (
    "trial",
    "seed",
    "r_d",
    "r_ref_max_sinr",
    "r_ref_round_robin",
    "gain",
    "alpha",
    "stream_snr",
    "ofdma_sinr_summary",
    "correlations",
    "spectra",
    "sync_slots",
)


def read_trials(path: str) -> list[dict]:
    """Load trials.jsonl; raises PlotInputError with a line number on bad content."""
    if not os.path.exists(path):
        raise PlotInputError(f"missing input file: {path}")
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PlotInputError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from exc
            missing = [f for f in TRIAL_FIELDS if f not in rec]
            if missing:
                raise PlotInputError(f"{path}:{lineno}: record missing fields {missing}")
            records.append(rec)
    if not records:
        raise PlotInputError(f"empty trial log: {path}")
    return records


def read_summary(path: str) -> list[dict]:
    """Load summary.csv rows as dicts (numeric columns converted to float)."""
    if not os.path.exists(path):
        raise PlotInputError(f"missing input file: {path}")
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"axis", "mean_gain", "median_gain", "min_gain", "max_gain", "ci95"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise PlotInputError(f"{path}: unexpected header {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(
                    {
                        "axis": row["axis"],
                        **{k: float(row[k]) for k in expected - {"axis"}},
                    }
                )
            except (TypeError, ValueError) as exc:
                raise PlotInputError(f"{path}:{lineno}: bad numeric value ({exc})") from exc
    if not rows:
        raise PlotInputError(f"empty summary: {path}")
    return rows
