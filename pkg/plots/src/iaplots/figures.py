"""The three campaign displays: running gain, channel spectra, stream SNR bars.

Figures are pure views of the logs: every number shown is either read
directly from a record or is its dB conversion (10*log10), applied at
render time only. Filenames are fixed (gain.<ext>, spectrum_<t>.<ext>,
streams_<t>.<ext>), so re-running a job overwrites deterministically.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# keep SVG text as text so annotations stay machine-readable
plt.rcParams["svg.fonttype"] = "none"

from .io import PlotInputError, read_trials

FORMATS = ("svg", "png")

_DB_FLOOR = 1e-30  # keeps log10 finite for all-but-impossible zero entries


@dataclass
class PlotJob:
    """Where to read logs from, where to write figures, and which trials."""

    in_dir: str
    out_dir: str
    fmt: str = "svg"
    trials: list[int] | str = field(default_factory=list)  # indices or "all"

    def __post_init__(self):
        if self.fmt not in FORMATS:
            raise PlotInputError(f"unknown figure format {self.fmt!r}; choose from {FORMATS}")

    @property
    def trials_path(self) -> str:
        return os.path.join(self.in_dir, "trials.jsonl")

    def out_path(self, stem: str) -> str:
        return os.path.join(self.out_dir, f"{stem}.{self.fmt}")


@dataclass(frozen=True)
class GainPlotResult:
    path: str
    final_mean: float


def to_db(values) -> np.ndarray:
    return 10.0 * np.log10(np.maximum(np.asarray(values, dtype=float), _DB_FLOOR))


def _select_record(records: list[dict], trial: int) -> dict:
    for rec in records:
        if rec["trial"] == trial:
            return rec
    raise PlotInputError(f"trial {trial} not present in log (have 0..{len(records) - 1})")


def plot_gain(job: PlotJob) -> GainPlotResult:
    """Running mean of the per-trial gain, with a reference line at 1.

    The final running-mean value is annotated on the figure and returned.
    """
    records = read_trials(job.trials_path)
    gains = np.array([rec["gain"] for rec in records], dtype=float)
    running = np.cumsum(gains) / np.arange(1, len(gains) + 1)
    final = float(running[-1])

    os.makedirs(job.out_dir, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    trials = [rec["trial"] for rec in records]
    ax.plot(trials, running, lw=1.5, label="running mean gain")
    ax.axhline(1.0, color="gray", lw=0.8, ls="--", label="parity")
    ax.annotate(
        f"final mean = {final:.12g}",
        xy=(trials[-1], final),
        xytext=(0.98, 0.92),
        textcoords="axes fraction",
        ha="right",
    )
    ax.set_xlabel("trial")
    ax.set_ylabel("rate gain vs baseline")
    ax.legend(loc="lower right", fontsize=8)
    path = job.out_path("gain")
    fig.savefig(path)
    plt.close(fig)
    return GainPlotResult(path=path, final_mean=final)


def draw_spectrum(ax, rec: dict) -> None:
    """Draw one record's spectra onto an existing Axes (values pass through as logged)."""
    desired = rec["spectra"]["desired"]
    interfering = rec["spectra"]["interfering"]
    carriers = np.arange(len(desired[0]))
    for u, spec in enumerate(desired):
        ax.plot(carriers, spec, marker="o", lw=1.5, label=f"UE {u} desired")
    for u, spec in enumerate(interfering):
        ax.plot(carriers, spec, marker="x", lw=1.0, ls="--", label=f"UE {u} interfering")
    pairs = [(a, b) for a in range(len(desired)) for b in range(a + 1, len(desired))]
    corr_text = ", ".join(f"{a}-{b}: {c:.3f}" for (a, b), c in zip(pairs, rec["correlations"]))
    ax.set_title(f"trial {rec['trial']} channel spectra (corr {corr_text})", fontsize=9)
    ax.set_xlabel("subcarrier")
    ax.set_ylabel("|h|")
    ax.set_xticks(carriers)
    ax.legend(fontsize=7, ncol=2)


def plot_spectrum(job: PlotJob, trial: int) -> str:
    """Per-user channel magnitudes over subcarriers for one trial.

    Desired channels are solid, interfering ones dashed; pairwise
    correlations from the record appear in the legend.
    """
    records = read_trials(job.trials_path)
    rec = _select_record(records, trial)
    os.makedirs(job.out_dir, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    draw_spectrum(ax, rec)
    path = job.out_path(f"spectrum_{trial}")
    fig.savefig(path)
    plt.close(fig)
    return path


def stream_bar_values(rec: dict) -> tuple[np.ndarray, np.ndarray]:
    """Bar heights for one record: (stream SNRs, baseline SINRs), both in dB."""
    if len(rec["stream_snr"]) == 0:
        raise PlotInputError(f"trial {rec['trial']} has no scheduled streams to plot")
    return to_db(rec["stream_snr"]), to_db(rec["ofdma_sinr_summary"])


def plot_streams(job: PlotJob, trial: int) -> str:
    """Post-ZF stream SNRs next to the baseline's owned-subcarrier SINRs, in dB."""
    records = read_trials(job.trials_path)
    rec = _select_record(records, trial)
    ia_db, ref_db = stream_bar_values(rec)
    stream_snr = rec["stream_snr"]
    ofdma = rec["ofdma_sinr_summary"]

    os.makedirs(job.out_dir, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    xs_ia = np.arange(len(stream_snr))
    xs_ref = len(stream_snr) + 0.5 + np.arange(len(ofdma))
    ax.bar(xs_ia, ia_db, width=0.8, label="aligned streams (post-ZF SNR)")
    ax.bar(xs_ref, ref_db, width=0.8, label="baseline subcarriers (SINR)")
    ax.set_xticks(np.concatenate([xs_ia, xs_ref]))
    ax.set_xticklabels(
        [f"s{l}" for l in range(len(stream_snr))] + [f"c{q}" for q in range(len(ofdma))],
        fontsize=7,
    )
    ax.set_ylabel("dB")
    ax.set_title(f"trial {trial} per-stream SNR vs baseline SINR", fontsize=9)
    ax.legend(fontsize=7)
    path = job.out_path(f"streams_{trial}")
    fig.savefig(path)
    plt.close(fig)
    return path


def resolve_trials(job: PlotJob, records: list[dict]) -> list[int]:
    """Expand the job's trial selector against the log's actual indices."""
    if job.trials == "all":
        return [rec["trial"] for rec in records]
    indices = list(job.trials)
    have = {rec["trial"] for rec in records}
    bad = [t for t in indices if t not in have]
    if bad:
        raise PlotInputError(f"trial indices {bad} not present in log")
    return indices
