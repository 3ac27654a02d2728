"""Classical OFDMA reference: per-subcarrier SINR, user assignment, sum rate.

Both cells reuse the whole band, so every subcarrier sees the other
cell's transmission as interference. The reference rate is what the
serving cell achieves by assigning each subcarrier to one user, either
greedily by SINR or round-robin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

POLICIES = ("max_sinr", "round_robin")


@dataclass(frozen=True)
class OfdmaAssignment:
    """Subcarrier ownership plus the SINR table it was drawn from."""

    owner: np.ndarray  # user index per subcarrier, length k
    per_user_counts: np.ndarray  # streams per user, length n_u
    rho: np.ndarray  # k x n_u SINR table

    def __post_init__(self):
        k, n_u = self.rho.shape
        if self.owner.shape != (k,):
            raise ValueError("owner length must match subcarrier count")
        if np.any(self.owner < 0) or np.any(self.owner >= n_u):
            raise ValueError("owner indices out of range")
        if int(self.per_user_counts.sum()) != k:
            raise ValueError("per-user counts must sum to the subcarrier count")


def ofdma_sinr(h_u: complex, h_i: complex, sigma2: float, es: float,
               es_interferer: float | None = None) -> float:
    """Per-subcarrier SINR es|h_u|^2 / (es_i|h_i|^2 + sigma2).

    The interferer energy defaults to es (both cells at the same
    per-subcarrier power); pass es_interferer to model a closer or
    farther interfering cell.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    es_i = es if es_interferer is None else es_interferer
    return float(es * abs(h_u) ** 2 / (es_i * abs(h_i) ** 2 + sigma2))


def sinr_table(h_users, h_interferers, sigma2: float, es: float,
               es_interferer: float | None = None) -> np.ndarray:
    """k x n_u table of ofdma_sinr values, one column per user."""
    cols = [
        [ofdma_sinr(hu, hi, sigma2, es, es_interferer) for hu, hi in zip(h_u, h_i)]
        for h_u, h_i in zip(h_users, h_interferers)
    ]
    return np.array(cols).T


def ofdma_schedule(rho: np.ndarray, policy: str = "max_sinr") -> OfdmaAssignment:
    """Assign every subcarrier to one user.

    max_sinr: argmax per subcarrier, ties to the lowest user index.
    round_robin: subcarrier q goes to user q mod n_u regardless of SINR.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or rho.shape[0] < 1 or rho.shape[1] < 1:
        raise ValueError(f"rho must be a k x n_u table, got {rho.shape}")
    if np.any(rho < 0):
        raise ValueError("SINR entries must be >= 0")
    k, n_u = rho.shape
    if policy == "max_sinr":
        owner = np.argmax(rho, axis=1)  # first max wins ties
    elif policy == "round_robin":
        owner = np.arange(k) % n_u
    else:
        raise ValueError(f"unknown policy {policy!r}")
    counts = np.bincount(owner, minlength=n_u)
    return OfdmaAssignment(owner=owner, per_user_counts=counts, rho=rho)


def ofdma_rate(assignment: OfdmaAssignment) -> float:
    """Reference sum rate: sum over owned subcarriers of log2(1 + rho)."""
    owned = assignment.rho[np.arange(len(assignment.owner)), assignment.owner]
    return float(np.sum(np.log1p(owned)) / np.log(2.0))
