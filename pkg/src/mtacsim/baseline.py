"""Single-pulse-per-bit time-of-arrival code with error-tolerant verification.

Each bit rides on one pulse; the verifier accepts when the Hamming distance
to the pre-shared message stays within a configured fraction. A guessing
attacker's advantage is the binomial upper tail, estimated by the Sanov
exponent 2^(-n_p * D(P||S)) and exposed exactly for desk-scale checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import binom

from .codec import ConfigError, Message

__all__ = [
    "ToleranceConfig",
    "kl_bernoulli",
    "sanov_advantage",
    "exact_guessing_advantage",
    "min_np_for_security",
    "single_pulse_vrfy",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerated bit-error fraction and frame length (bits = pulses here)."""

    t_ber: float
    n_p: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.t_ber < 0.5:
            raise ConfigError("tolerated BER must lie in [0, 0.5)")
        if self.n_p < 1:
            raise ConfigError("n_p must be >= 1")

    @property
    def max_errors(self) -> int:
        return math.floor(self.t_ber * self.n_p)


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence in bits between Bernoulli(p) and Bernoulli(q)."""
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return p * math.log2(p / q) + (1.0 - p) * math.log2((1.0 - p) / (1.0 - q))


def sanov_advantage(n_p: int, t_ber: float) -> float:
    """Sanov estimate of the guessing advantage: 2^(-n_p * D((1-t, t) || (1/2, 1/2)))."""
    if n_p == 0:
        return 1.0
    if not 0.0 < t_ber < 0.5:
        raise ValueError("tolerated BER must lie in (0, 0.5)")
    return 2.0 ** (-n_p * kl_bernoulli(1.0 - t_ber, 0.5))


def exact_guessing_advantage(n_p: int, t_ber: float) -> float:
    """Exact acceptance probability of a uniform guess: P(Bin(n_p,1/2) >= n_p - floor(t*n_p)).

    The Sanov exponent is loose at small n_p; this is the tight oracle.
    """
    if n_p < 1:
        raise ValueError("n_p must be >= 1")
    allowed = math.floor(t_ber * n_p)
    return float(binom.cdf(allowed, n_p, 0.5))


def min_np_for_security(target_bits: int, t_ber: float) -> int:
    """Smallest frame length whose Sanov exponent reaches `target_bits`."""
    if target_bits < 1:
        raise ValueError("target must be at least one bit")
    if not 0.0 < t_ber < 0.5:
        raise ValueError("tolerated BER must lie in (0, 0.5); divergence vanishes at 1/2")
    # 1e-9 guard absorbs float overshoot at near-integer ratios (KL -> 1)
    return math.ceil(target_bits / kl_bernoulli(1.0 - t_ber, 0.5) - 1e-9)


def single_pulse_vrfy(m: Message, m_received: Message, cfg: ToleranceConfig) -> int:
    """Accept iff the received bits stay within the tolerated Hamming distance.

    The reference message must be pre-shared; this scheme does not carry data.
    """
    if len(m) != cfg.n_p or len(m_received) != cfg.n_p:
        raise ConfigError("message lengths must equal the configured n_p")
    errors = sum(a != b for a, b in zip(m.bits, m_received.bits))
    return int(errors <= cfg.max_errors)
