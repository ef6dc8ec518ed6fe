"""BPSK over AWGN: modulation, noise, SNR bookkeeping and pre-FEC baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc


def ebn0_to_sigma(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for unit-energy BPSK at the given Eb/N0.

    ``sigma**2 = 1 / (2 * rate * 10**(ebn0_db / 10))``; ``+inf`` dB gives 0.
    """
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if ebn0_db == math.inf:
        return 0.0
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def sigma_to_ebn0(sigma: float, rate: float) -> float:
    if sigma <= 0:
        return math.inf
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))


@dataclass(frozen=True)
class ChannelParams:
    ebn0_db: float
    rate: float

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"rate must be in (0, 1], got {self.rate}")

    @property
    def sigma(self) -> float:
        return ebn0_to_sigma(self.ebn0_db, self.rate)

    @classmethod
    def from_sigma(cls, sigma: float, rate: float) -> "ChannelParams":
        return cls(sigma_to_ebn0(sigma, rate), rate)


@dataclass(frozen=True)
class ReceivedVector:
    r: np.ndarray
    sigma: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.r)):
            raise ValueError("received vector has non-finite entries")


def bpsk_map(c) -> np.ndarray:
    """0 -> -1, 1 -> +1."""
    return 2.0 * np.asarray(c, dtype=np.float64) - 1.0


def hard_decision(r) -> np.ndarray:
    """Bit is 1 iff r > 0; an exact zero decides 0."""
    return (np.asarray(r) > 0).astype(np.uint8)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based (Philox) generator for a key path.

    The key path, e.g. (snr_index, block_index), is hashed together with the
    master seed by ``SeedSequence``; distinct paths give unrelated streams.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def awgn(s: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    # always consume the draws so the stream position does not depend on sigma
    w = rng.standard_normal(s.shape)
    return s + sigma * w


def transmit(s, sigma: float, rng: np.random.Generator) -> ReceivedVector:
    return ReceivedVector(awgn(s, sigma, rng), sigma)


def qfunc(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def prefec_rates(sigma: float, n: int) -> dict:
    """Raw hard-decision bit and frame error rates of an n-symbol frame."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    p = float(qfunc(1.0 / sigma))
    fer = -math.expm1(n * math.log1p(-p))
    return {"ber": p, "fer": fer}
