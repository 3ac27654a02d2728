"""Null-space downlink precoding: projection, feedback candidates, ZF scheduling.

Pipeline, per channel realization:

  1. Each user forms the reduced channels G = diag(h) @ M (M is the
     orthonormal trunk restricting the interferer to n_s of the k
     dimensions), takes a full SVD of the interfering reduced channel and
     keeps the last n_f left singular vectors: projecting the received
     signal onto them removes the other cell's transmission entirely.
  2. The user's equivalent channel after projection is v_perp @ G_desired;
     each of its rows, conjugated, is one feedback candidate (a transmit
     direction that maximizes that user's projected receive power).
  3. The serving cell collects n_u * n_f candidates and selects the
     subset that maximizes the sum rate. Zero-forcing across the selected
     rows cancels intra-cell interference; the per-stream penalty
     alpha_l = 1 / (||g_l||^2 ||f_l||^2) is 1 exactly when the selected
     rows are orthogonal and shrinks as they correlate.

`symbol_oracle` replays a selection at symbol level (QPSK streams, an
actively transmitting interferer, AWGN) and measures per-stream SINR
empirically, providing an end-to-end check of the analytic rate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleSubsetError
from .numerics import as_matrix, invert, singular_value_spread, svd

# Subsets whose stacked rows exceed this singular-value spread cannot be
# zero-forced meaningfully; the scheduler scores them zero.
COND_LIMIT = 1e10

# Ratio s_min/s_max below which the interferer's reduced channel is
# treated as rank deficient (its null space is larger than n_f).
RANK_DEFICIENCY_TOL = 1e-10


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions and powers for one experiment; n_s is always k - n_f."""

    k: int = 4
    n_f: int = 1
    n_u: int = 3
    es: float = 10.0
    sigma2: float = 1.0
    n_s: int = field(init=False)

    def __post_init__(self):
        if self.k < 2 or (self.k & (self.k - 1)) != 0:
            raise ValueError(f"k must be a power of two >= 2, got {self.k}")
        if self.n_f < 1 or self.n_f >= self.k:
            raise ValueError(f"need 1 <= n_f < k, got n_f={self.n_f}")
        if self.n_u < 1:
            raise ValueError(f"n_u must be >= 1, got {self.n_u}")
        if not self.es > 0:
            raise ValueError(f"es must be > 0, got {self.es}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        object.__setattr__(self, "n_s", self.k - self.n_f)


@dataclass(frozen=True)
class NullProjection:
    """Rows span the interference-free subspace; v_perp @ G_interferer ~ 0.

    `ambiguous` marks a rank-deficient interferer channel whose null space
    is larger than n_f; the projection still keeps exactly n_f rows.
    """

    v_perp: np.ndarray
    ambiguous: bool = False


@dataclass(frozen=True)
class Candidate:
    """One fed-back precoding vector and the equivalent-channel row it came from."""

    user: int
    stream: int
    c: np.ndarray
    g_row: np.ndarray
    zero_gain: bool = False

    @property
    def gain2(self) -> float:
        """Squared norm of the equivalent-channel row."""
        return float(np.vdot(self.g_row, self.g_row).real)


@dataclass(frozen=True)
class Selection:
    """Scheduler output: chosen candidates, ZF transmit filter, penalties, rate."""

    chosen: tuple[Candidate, ...]
    indices: tuple[int, ...]
    p: np.ndarray  # n_s x L, columns are the chosen precoding vectors
    zf: np.ndarray  # n_s x L, right-inverse of the stacked rows
    alpha: np.ndarray
    sinr: np.ndarray
    rate: float


@dataclass(frozen=True)
class StreamSymbols:
    """Precoded symbols: x = C @ s in the reduced space, tx = M @ x on the air."""

    s: np.ndarray
    x: np.ndarray
    tx: np.ndarray


@dataclass(frozen=True)
class UeLink:
    """One user's physical view: reduced channels from both cells plus its projection."""

    g_md: np.ndarray
    g_mi: np.ndarray
    proj: NullProjection


def reduced_channel(h: np.ndarray, m_h: np.ndarray) -> np.ndarray:
    """diag(h) @ m_h: the per-subcarrier channel composed with the trunk."""
    h = np.asarray(h, dtype=np.complex128)
    m = as_matrix(m_h)
    if h.ndim != 1 or h.shape[0] != m.shape[0]:
        raise ValueError(f"response length {h.shape} does not match trunk rows {m.shape}")
    return h[:, None] * m


def interference_null_space(g_mi: np.ndarray) -> NullProjection:
    """Projection onto the interferer's left null space.

    Rows are the conjugate-transposed last n_f left singular vectors of
    g_mi (k x n_s, n_f = k - n_s). A rank-deficient g_mi is flagged
    `ambiguous` but still yields exactly n_f rows.
    """
    g = as_matrix(g_mi)
    k, n_s = g.shape
    if k <= n_s:
        raise ValueError(f"reduced channel must be tall, got {g.shape}")
    res = svd(g)
    ambiguous = bool(res.s[0] <= 0.0 or res.s[-1] < RANK_DEFICIENCY_TOL * res.s[0])
    return NullProjection(v_perp=res.u[:, n_s:].conj().T.copy(), ambiguous=ambiguous)


def equivalent_channel(proj: NullProjection, g_md: np.ndarray) -> np.ndarray:
    """Desired reduced channel seen through the projection: v_perp @ g_md (n_f x n_s)."""
    g = as_matrix(g_md)
    if proj.v_perp.shape[1] != g.shape[0]:
        raise ValueError(f"projection width {proj.v_perp.shape} does not match channel {g.shape}")
    return proj.v_perp @ g


def ue_candidates(user: int, g_perp: np.ndarray) -> list[Candidate]:
    """One candidate per equivalent-channel row: c is the conjugated row."""
    g = as_matrix(g_perp)
    out = []
    for stream in range(g.shape[0]):
        row = g[stream].copy()
        norm2 = float(np.vdot(row, row).real)
        out.append(
            Candidate(user=user, stream=stream, c=row.conj(), g_row=row, zero_gain=norm2 == 0.0)
        )
    return out


def zf_and_alpha(chosen: list[Candidate] | tuple[Candidate, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Zero-forcing transmit filter and per-stream penalties for a candidate subset.

    The stacked rows G (L x n_s) get their exact inverse when L == n_s and
    the minimum-norm right-inverse G^H (G G^H)^-1 when L < n_s; either way
    G @ zf = I. alpha_l = 1 / (||g_l||^2 ||f_l||^2) <= 1 by Cauchy-Schwarz,
    with equality iff the rows are orthogonal. Raises InfeasibleSubsetError
    when the rows are too close to dependent to invert.
    """
    if len(chosen) == 0:
        raise ValueError("empty candidate subset")
    rows = np.stack([c.g_row for c in chosen])
    n_rows, n_s = rows.shape
    if n_rows > n_s:
        raise ValueError(f"cannot zero-force {n_rows} streams in {n_s} dimensions")
    if singular_value_spread(rows) >= COND_LIMIT:
        raise InfeasibleSubsetError("selected rows are (near-)dependent")
    if n_rows == n_s:
        zf = invert(rows)
    else:
        zf = rows.conj().T @ invert(rows @ rows.conj().T)
    g2 = np.sum(np.abs(rows) ** 2, axis=1)
    f2 = np.sum(np.abs(zf) ** 2, axis=0)
    alpha = 1.0 / (g2 * f2)
    return zf, alpha


def stream_snrs(chosen, cfg: SystemConfig) -> np.ndarray:
    """Matched-filter SNR per candidate row: es * ||g_l||^2 / sigma2."""
    return np.array([cfg.es * c.gain2 / cfg.sigma2 for c in chosen])


def ia_rate(alpha: np.ndarray, sinr: np.ndarray) -> float:
    """Sum rate over streams: sum log2(1 + alpha_l * sinr_l), bits per channel use."""
    alpha = np.asarray(alpha, dtype=float)
    sinr = np.asarray(sinr, dtype=float)
    if alpha.shape != sinr.shape:
        raise ValueError("alpha and sinr must have equal length")
    # log1p keeps the rate strictly positive even for vanishing stream SNRs
    return float(np.sum(np.log1p(alpha * sinr)) / np.log(2.0))


def schedule(candidates: list[Candidate], cfg: SystemConfig) -> Selection:
    """Exhaustive-search selection of the rate-maximizing candidate subset.

    When the pool is no larger than n_s everything is selected (a single
    subset, no search). Otherwise every size-n_s subset is scored;
    infeasible (near-singular) subsets score zero. If no subset of the
    target size is feasible, the size is reduced until one is: fully
    correlated users then collapse to a single served stream. Ties go to
    the lexicographically smallest index tuple.
    """
    if len(candidates) == 0:
        raise ValueError("empty candidate list")
    t = len(candidates)
    for size in range(min(cfg.n_s, t), 0, -1):
        best: tuple[float, tuple[int, ...], np.ndarray, np.ndarray] | None = None
        for idx in itertools.combinations(range(t), size):
            subset = [candidates[i] for i in idx]
            try:
                zf, alpha = zf_and_alpha(subset)
            except InfeasibleSubsetError:
                continue
            rate = ia_rate(alpha, stream_snrs(subset, cfg))
            if best is None or rate > best[0]:
                best = (rate, idx, zf, alpha)
        if best is not None:
            rate, idx, zf, alpha = best
            subset = tuple(candidates[i] for i in idx)
            return Selection(
                chosen=subset,
                indices=idx,
                p=np.stack([c.c for c in subset], axis=1),
                zf=zf,
                alpha=alpha,
                sinr=stream_snrs(subset, cfg),
                rate=rate,
            )
    raise InfeasibleSubsetError("no feasible candidate subset: all candidates degenerate")


def precode_streams(c_matrix: np.ndarray, s: np.ndarray, m_h: np.ndarray) -> StreamSymbols:
    """Apply stream precoding then the trunk: x = C @ s, tx = M @ x."""
    x = as_matrix(c_matrix) @ np.asarray(s, dtype=np.complex128)
    return StreamSymbols(s=np.asarray(s, dtype=np.complex128), x=x, tx=as_matrix(m_h) @ x)


def transmit_filter(selection: Selection, power_constraint: str = "per_stream") -> np.ndarray:
    """Scale the ZF filter columns according to the power constraint.

    per_stream: each column normalized to unit norm (every stream radiates
    energy es). total: one common scale so the whole matrix radiates L*es,
    split equally across streams.
    """
    zf = selection.zf
    if power_constraint == "per_stream":
        return zf / np.sqrt(np.sum(np.abs(zf) ** 2, axis=0))
    if power_constraint == "total":
        fro = np.sqrt(np.sum(np.abs(zf) ** 2))
        return zf * (np.sqrt(zf.shape[1]) / fro)
    raise ValueError(f"unknown power constraint {power_constraint!r}")


@dataclass(frozen=True)
class OracleMeasurement:
    """Empirical per-stream powers and the SINRs they imply."""

    sinr: np.ndarray
    desired: np.ndarray
    intra: np.ndarray
    inter: np.ndarray
    noise: np.ndarray


def qpsk_symbols(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-energy QPSK symbols."""
    return np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * rng.integers(0, 4, size=shape)))


def symbol_oracle(
    rng: np.random.Generator,
    selection: Selection,
    links: list[UeLink],
    cfg: SystemConfig,
    n_symbols: int,
    es_interferer: float | None = None,
    sigma2: float | None = None,
    power_constraint: str = "per_stream",
) -> OracleMeasurement:
    """Measure per-stream SINR by transmitting QPSK symbols through the chain.

    The serving cell sends sqrt(es) * s_l over the scaled ZF columns; the
    interfering cell sends independent QPSK over its own reduced space at
    es_interferer per dimension (defaults to cfg.es). Each receiving user
    projects with its own v_perp; desired, intra-cell, inter-cell, and
    noise powers are averaged over n_symbols and returned per stream.
    sigma2 may be overridden (zero allowed) to isolate interference terms.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    es_i = cfg.es if es_interferer is None else float(es_interferer)
    sig2 = cfg.sigma2 if sigma2 is None else float(sigma2)
    n_streams = len(selection.chosen)
    f_hat = transmit_filter(selection, power_constraint)

    s = qpsk_symbols(rng, (n_streams, n_symbols))
    x_i = np.sqrt(es_i) * qpsk_symbols(rng, (cfg.n_s, n_symbols)) if es_i > 0 else None
    users = sorted({c.user for c in selection.chosen})
    noise_by_user = {}
    for u in users:
        if sig2 > 0:
            noise_by_user[u] = np.sqrt(sig2 / 2.0) * (
                rng.standard_normal((cfg.k, n_symbols))
                + 1j * rng.standard_normal((cfg.k, n_symbols))
            )
        else:
            noise_by_user[u] = np.zeros((cfg.k, n_symbols), dtype=np.complex128)

    amp = np.sqrt(cfg.es)
    desired = np.zeros(n_streams)
    intra = np.zeros(n_streams)
    inter = np.zeros(n_streams)
    noise = np.zeros(n_streams)
    for l, cand in enumerate(selection.chosen):
        link = links[cand.user]
        eff = link.proj.v_perp @ link.g_md  # true equivalent channel at this user
        row = eff[cand.stream]
        coupling = row @ f_hat  # how every transmitted stream lands on this one
        own = amp * coupling[l] * s[l]
        others = amp * (coupling @ s) - own
        desired[l] = float(np.mean(np.abs(own) ** 2))
        intra[l] = float(np.mean(np.abs(others) ** 2))
        if x_i is not None:
            leak_row = (link.proj.v_perp @ link.g_mi)[cand.stream]
            inter[l] = float(np.mean(np.abs(leak_row @ x_i) ** 2))
        w = (link.proj.v_perp @ noise_by_user[cand.user])[cand.stream]
        noise[l] = float(np.mean(np.abs(w) ** 2))

    denom = intra + inter + noise
    with np.errstate(divide="ignore"):
        sinr = np.where(denom > 0, desired / np.where(denom > 0, denom, 1.0), np.inf)
    return OracleMeasurement(sinr=sinr, desired=desired, intra=intra, inter=inter, noise=noise)
