"""Multipath channel generation, AWGN, and pilot-based LS estimation.

The fading model is a tapped delay line. Every tap carries a circularly
symmetric Gaussian gain (Rayleigh amplitude, uniform phase) with expected
power taken from a normalized exponential decay profile, so total
expected tap power is 1. The first tap sits at delay zero (the receiver
times itself to the first arrival); any further taps get delays uniform
in [0, max_delay] sample periods. The tap count is therefore the knob
that controls inter-user frequency-domain correlation: one tap means a
flat, fully correlated response, many spread taps approach independent
per-subcarrier fading.

OFDM is treated as ideal: the channel seen on subcarrier q is the DFT of
the tap line at q, with no cyclic prefix or ISI modeling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidPilotError, UndefinedCorrelationError


@dataclass(frozen=True)
class ChannelProfile:
    """Tapped-delay-line parameters.

    power_decay is the exponential rate per tap index: tap p carries
    expected power proportional to exp(-power_decay * p). Zero means a
    uniform profile.
    """

    num_taps: int = 4
    max_delay: float = 3.0
    power_decay: float = 0.0

    def __post_init__(self):
        if self.num_taps < 1:
            raise ValueError(f"num_taps must be >= 1, got {self.num_taps}")
        if self.max_delay < 0:
            raise ValueError(f"max_delay must be >= 0, got {self.max_delay}")
        if self.power_decay < 0:
            raise ValueError(f"power_decay must be >= 0, got {self.power_decay}")

    def tap_powers(self) -> np.ndarray:
        """Per-tap expected powers, normalized to sum to 1."""
        w = np.exp(-self.power_decay * np.arange(self.num_taps))
        return w / w.sum()


@dataclass(frozen=True)
class NoiseModel:
    """Circularly symmetric complex AWGN with total variance sigma2."""

    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")


@dataclass(frozen=True)
class MultipathChannel:
    """A realized tap line: parallel arrays of complex gains and delays."""

    gains: np.ndarray  # complex, one per tap
    delays: np.ndarray  # in sample periods, >= 0

    def __post_init__(self):
        if len(self.gains) < 1 or len(self.gains) != len(self.delays):
            raise ValueError("gains and delays must be non-empty and equally long")
        if np.any(self.delays < 0):
            raise ValueError("tap delays must be >= 0")


def draw_channel(rng: np.random.Generator, profile: ChannelProfile) -> MultipathChannel:
    """Draw one channel realization from the profile.

    Tap p gets gain sqrt(w_p / 2) * (n1 + j*n2) with n1, n2 standard
    normal (expected power w_p, uniform phase). The first tap is the
    timing reference at delay zero; later taps draw delays uniform in
    [0, max_delay].
    """
    n = profile.num_taps
    w = profile.tap_powers()
    gains = np.sqrt(w / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    delays = np.zeros(n)
    if n > 1 and profile.max_delay > 0:
        delays[1:] = rng.uniform(0.0, profile.max_delay, size=n - 1)
    return MultipathChannel(gains=gains, delays=delays)


def frequency_response(ch: MultipathChannel, k: int) -> np.ndarray:
    """Per-subcarrier gains h_q = sum_p gain_p * exp(-2j*pi*q*delay_p/k), q = 0..k-1."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q = np.arange(k)[:, None]
    return (ch.gains[None, :] * np.exp(-2j * np.pi * q * ch.delays[None, :] / k)).sum(axis=1)


def correlation(h1: np.ndarray, h2: np.ndarray) -> float:
    """Normalized magnitude correlation |h1^H h2| / (||h1|| ||h2||), in [0, 1]."""
    h1 = np.asarray(h1, dtype=np.complex128)
    h2 = np.asarray(h2, dtype=np.complex128)
    if h1.shape != h2.shape:
        raise ValueError(f"length mismatch: {h1.shape} vs {h2.shape}")
    n1 = float(np.sqrt(np.vdot(h1, h1).real))
    n2 = float(np.sqrt(np.vdot(h2, h2).real))
    if n1 == 0.0 or n2 == 0.0:
        raise UndefinedCorrelationError("correlation undefined for zero-norm response")
    return min(float(abs(np.vdot(h1, h2))) / (n1 * n2), 1.0)


def awgn(rng: np.random.Generator, x: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Add i.i.d. circularly symmetric complex Gaussian noise of variance sigma2 per entry."""
    x = np.asarray(x, dtype=np.complex128)
    std = np.sqrt(noise.sigma2 / 2.0)
    return x + std * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))


def ls_estimate(rx: np.ndarray, pilots: np.ndarray) -> np.ndarray:
    """Least-squares channel estimate rx_q / pilot_q per subcarrier."""
    rx = np.asarray(rx, dtype=np.complex128)
    pilots = np.asarray(pilots, dtype=np.complex128)
    if rx.shape != pilots.shape:
        raise ValueError(f"length mismatch: {rx.shape} vs {pilots.shape}")
    if np.any(np.abs(pilots) == 0.0):
        raise InvalidPilotError("pilot sequence contains a zero entry")
    return rx / pilots


def qpsk_pilots(rng: np.random.Generator, k: int) -> np.ndarray:
    """Unit-magnitude QPSK training symbols for one OFDM symbol."""
    return np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * rng.integers(0, 4, size=k)))
