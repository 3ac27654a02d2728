"""Experiment orchestration: seeded trials, campaigns, sweeps, result files.

One trial is fully deterministic given (config, seed): channel draws,
pilot noise, sync losses, scheduling, and both rates all come from a
single Generator seeded with that value. Campaign trial i derives its
seed from mix_seed(base_seed, i) (a SplitMix64 avalanche), so trials are
independent of execution order and may run in parallel without changing
any output byte.

When channel estimation is on, precoders and scheduling decisions are
computed from the estimated channels while every logged rate and SINR is
evaluated on the true ones, so estimation error shows up as residual
interference rather than optimistic rates.

File outputs: trials.jsonl (one record per line, 12 significant digits)
and summary.csv (axis,mean_gain,median_gain,min_gain,max_gain,ci95).
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channel as chan
from . import ia_core, ofdma
from .config import SimConfig, with_axis_value
from .errors import SimulationError
from .numerics import hadamard_trunk, random_orthonormal
from .protocol import FeedbackBundle, collect_feedback, run_sync

_MASK64 = (1 << 64) - 1


def mix_seed(base_seed: int, index: int) -> int:
    """Per-trial seed: SplitMix64 avalanche of base_seed + (index+1)*golden."""
    z = (base_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class TrialRecord:
    """Everything one channel realization produced."""

    trial: int
    seed: int
    r_d: float
    r_ref_max_sinr: float
    r_ref_round_robin: float
    gain: float
    alpha: list[float]
    stream_snr: list[float]
    ofdma_sinr_summary: list[float]
    correlations: list[float]
    spectra: dict[str, list[list[float]]]
    sync_slots: int

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "r_d": self.r_d,
            "r_ref_max_sinr": self.r_ref_max_sinr,
            "r_ref_round_robin": self.r_ref_round_robin,
            "gain": self.gain,
            "alpha": self.alpha,
            "stream_snr": self.stream_snr,
            "ofdma_sinr_summary": self.ofdma_sinr_summary,
            "correlations": self.correlations,
            "spectra": self.spectra,
            "sync_slots": self.sync_slots,
        }


@dataclass(frozen=True)
class CampaignSummary:
    n_trials: int
    mean_gain: float
    median_gain: float
    min_gain: float
    max_gain: float
    ci95: float
    running_mean: list[float]


def _estimate_responses(rng, cfg: SimConfig, truths, es_tx: float):
    """Broadcast pilots at es_tx and LS-estimate each user's response.

    Pilot sequences are shared by all users (one transmitter); estimates
    average over cfg.training_symbols pilot symbols. A silent transmitter
    (es_tx == 0) yields all-zero estimates.
    """
    if es_tx <= 0.0:
        return [np.zeros(cfg.k, dtype=np.complex128) for _ in truths]
    pilots = [np.sqrt(es_tx) * chan.qpsk_pilots(rng, cfg.k) for _ in range(cfg.training_symbols)]
    noise = cfg.noise()
    out = []
    for h in truths:
        acc = np.zeros(cfg.k, dtype=np.complex128)
        for p in pilots:
            rx = chan.awgn(rng, h * p, noise)
            acc += chan.ls_estimate(rx, p)
        out.append(acc / cfg.training_symbols)
    return out


def run_trial(cfg: SimConfig, seed: int) -> TrialRecord:
    """Run the full pipeline on one channel realization."""
    rng = np.random.default_rng(seed)
    system = cfg.system()
    profile = cfg.profile()
    k, n_u = cfg.k, cfg.n_u
    es, es_i, sigma2 = cfg.es, cfg.es_interferer, cfg.sigma2

    if cfg.per_bs_trunk == "random":
        m_d = random_orthonormal(rng, k, system.n_s)
        m_i = random_orthonormal(rng, k, system.n_s)
    else:
        m_d = m_i = hadamard_trunk(k, system.n_s)

    if cfg.ue_channels == "identical":
        h_d = [chan.frequency_response(chan.draw_channel(rng, profile), k)] * n_u
        h_i = [chan.frequency_response(chan.draw_channel(rng, profile), k)] * n_u
    else:
        h_d = [chan.frequency_response(chan.draw_channel(rng, profile), k) for _ in range(n_u)]
        h_i = [chan.frequency_response(chan.draw_channel(rng, profile), k) for _ in range(n_u)]

    if cfg.perfect_csi:
        h_i_hat = [h.copy() if es_i > 0 else np.zeros(k, dtype=np.complex128) for h in h_i]
        h_d_hat = [h.copy() for h in h_d]
    else:
        # interferer trains first, then the serving cell
        h_i_hat = _estimate_responses(rng, cfg, h_i, es_i)
        h_d_hat = _estimate_responses(rng, cfg, h_d, es)

    trace = run_sync(
        cfg.protocol(),
        rng,
        beacon_snr=cfg.beacon_snr_db,
        miss_probability=cfg.miss_probability,
        slot_cap=cfg.slot_cap,
    )

    projections = []
    entries = {}
    for u in range(n_u):
        proj = ia_core.interference_null_space(ia_core.reduced_channel(h_i_hat[u], m_i))
        projections.append(proj)
        g_perp = ia_core.equivalent_channel(proj, ia_core.reduced_channel(h_d_hat[u], m_d))
        entries[u] = ia_core.ue_candidates(u, g_perp)
    candidates = collect_feedback(FeedbackBundle(n_u=n_u, entries=entries))
    selection = ia_core.schedule(candidates, system)

    # rates on the true channels, precoders from the estimates
    f_hat = ia_core.transmit_filter(selection, cfg.power_constraint)
    stream_snr = []
    for l, cand in enumerate(selection.chosen):
        proj = projections[cand.user]
        eff_true = proj.v_perp @ ia_core.reduced_channel(h_d[cand.user], m_d)
        coupling = eff_true[cand.stream] @ f_hat
        sig = es * abs(coupling[l]) ** 2
        intra = es * (float(np.sum(np.abs(coupling) ** 2)) - abs(coupling[l]) ** 2)
        leak = (proj.v_perp @ ia_core.reduced_channel(h_i[cand.user], m_i))[cand.stream]
        inter = es_i * float(np.sum(np.abs(leak) ** 2))
        stream_snr.append(sig / (intra + inter + sigma2))
    r_d = float(np.sum(np.log1p(np.asarray(stream_snr))) / np.log(2.0))

    rho_hat = ofdma.sinr_table(h_d_hat, h_i_hat, sigma2, es, es_i)
    rho_true = ofdma.sinr_table(h_d, h_i, sigma2, es, es_i)
    refs = {}
    summaries = {}
    for policy in ofdma.POLICIES:
        decided = ofdma.ofdma_schedule(rho_hat, policy)
        on_true = ofdma.OfdmaAssignment(
            owner=decided.owner, per_user_counts=decided.per_user_counts, rho=rho_true
        )
        refs[policy] = ofdma.ofdma_rate(on_true)
        summaries[policy] = rho_true[np.arange(k), decided.owner]

    r_ref = refs[cfg.baseline]
    correlations = [
        chan.correlation(h_d[a], h_d[b]) for a in range(n_u) for b in range(a + 1, n_u)
    ]
    spectra = {
        "desired": [np.abs(h).tolist() for h in h_d],
        "interfering": [np.abs(h).tolist() for h in h_i],
    }
    return TrialRecord(
        trial=0,
        seed=seed,
        r_d=r_d,
        r_ref_max_sinr=refs["max_sinr"],
        r_ref_round_robin=refs["round_robin"],
        gain=r_d / r_ref,
        alpha=[float(a) for a in selection.alpha],
        stream_snr=[float(s) for s in stream_snr],
        ofdma_sinr_summary=[float(x) for x in summaries[cfg.baseline]],
        correlations=[float(c) for c in correlations],
        spectra=spectra,
        sync_slots=trace.final_slot,
    )


def _campaign_job(args) -> TrialRecord:
    cfg, trial, base_seed = args
    seed = mix_seed(base_seed, trial)
    try:
        rec = run_trial(cfg, seed)
    except SimulationError as err:
        err.args = (f"trial {trial} (seed {seed}): {err.args[0] if err.args else ''}",)
        raise
    return dataclasses.replace(rec, trial=trial)


def summarize(records: list[TrialRecord]) -> CampaignSummary:
    gains = np.array([r.gain for r in records])
    running = np.cumsum(gains) / np.arange(1, len(gains) + 1)
    ci95 = 0.0
    if len(gains) > 1:
        ci95 = 1.96 * float(np.std(gains, ddof=1)) / math.sqrt(len(gains))
    return CampaignSummary(
        n_trials=len(gains),
        mean_gain=float(np.mean(gains)),
        median_gain=float(np.median(gains)),
        min_gain=float(np.min(gains)),
        max_gain=float(np.max(gains)),
        ci95=ci95,
        running_mean=[float(x) for x in running],
    )


def run_campaign(
    cfg: SimConfig,
    n_trials: int,
    base_seed: int,
    out_dir: str | None = None,
    workers: int = 1,
) -> tuple[CampaignSummary, list[TrialRecord]]:
    """Run n_trials independent trials; optionally write trials.jsonl + summary.csv."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    jobs = [(cfg, i, base_seed) for i in range(n_trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_campaign_job, jobs, chunksize=max(1, n_trials // (4 * workers))))
    else:
        records = [_campaign_job(j) for j in jobs]
    records.sort(key=lambda r: r.trial)
    summary = summarize(records)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_trials_jsonl(os.path.join(out_dir, "trials.jsonl"), records)
        write_summary_csv(os.path.join(out_dir, "summary.csv"), [("-", summary)])
    return summary, records


def sweep(
    cfg: SimConfig,
    axis: str,
    values: list,
    n_trials: int,
    base_seed: int,
    out_dir: str | None = None,
    workers: int = 1,
) -> list[tuple[object, CampaignSummary]]:
    """One campaign per axis value, all sharing the same base seed."""
    if not values:
        raise ValueError("empty sweep value list")
    rows = []
    for value in values:
        summary, _ = run_campaign(with_axis_value(cfg, axis, value), n_trials, base_seed,
                                  workers=workers)
        rows.append((value, summary))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_summary_csv(os.path.join(out_dir, "summary.csv"), rows)
    return rows


def fmt_float(x: float) -> str:
    """Canonical 12-significant-digit rendering used in every output file."""
    return f"{x:.12g}"


def _round_floats(obj):
    if isinstance(obj, float):
        return float(fmt_float(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def record_to_json(rec: TrialRecord) -> str:
    return json.dumps(_round_floats(rec.to_dict()), separators=(",", ":"))


def write_trials_jsonl(path: str, records: list[TrialRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(record_to_json(rec) + "\n")


def write_summary_csv(path: str, rows: list[tuple[object, CampaignSummary]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("axis,mean_gain,median_gain,min_gain,max_gain,ci95\n")
        for axis_value, s in rows:
            fh.write(
                f"{axis_value},{fmt_float(s.mean_gain)},{fmt_float(s.median_gain)},"
                f"{fmt_float(s.min_gain)},{fmt_float(s.max_gain)},{fmt_float(s.ci95)}\n"
            )
