"""Distance-reduction attacker strategies and their statistical envelopes.

An attacker can force the per-symbol means (power-increase strategy) but
cannot systematically reduce the variance of its guessing error without a
pulse-level bias. The strategies here realize the two standard envelopes:
an ideal bias (a known fraction rho of pulse polarities) and a non-ideal
bias (never wrong twice in a row), plus the unbiased guesser.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .codec import ConfigError, PulseFrame
from .montecarlo import correctness_pattern

__all__ = [
    "AttackerModel",
    "AttackTrace",
    "InterferenceCurve",
    "power_increase_symbol",
    "guess_frame",
    "continued_interference_sim",
    "over_approx_strength",
    "break_even_pulses_per_bit",
    "kl_gaussian_zero_mean",
]

_KINDS = ("unbiased", "ideal_bias", "non_ideal_bias", "power_increase")


@dataclass(frozen=True)
class AttackerModel:
    """Tagged attacker strategy descriptor.

    `rho` applies only to the ideal bias, `l` only to the non-ideal bias.
    `grant_bits` marks traces as bit-accepted regardless of realized means
    (the over-approximation used for advantage estimation).
    """

    kind: str
    rho: float = 0.0
    l: int = 1
    grant_bits: bool = True

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f"attacker kind must be one of {_KINDS}, got {self.kind!r}")
        if self.kind == "ideal_bias":
            if not 0.0 <= self.rho <= 1.0:
                raise ConfigError("rho must lie in [0, 1]")
        elif self.rho not in (0.0,):
            raise ConfigError("rho is only meaningful for the ideal bias")
        if self.kind == "non_ideal_bias":
            if self.l != 2:
                raise ConfigError("only the l=2 non-ideal bias is modeled")
        elif self.l != 1:
            raise ConfigError("l is only meaningful for the non-ideal bias")


@dataclass(frozen=True)
class AttackTrace:
    """One realized attack frame and its strategy-space coordinates."""

    attack_frame: PulseFrame
    per_symbol_mean: np.ndarray
    residual_normalized_variance: float
    interference_count: int
    bits_granted: bool = True


@dataclass(frozen=True)
class InterferenceCurve:
    """Per-interference-count statistics of continued guessing."""

    interference_count: np.ndarray
    mean: np.ndarray
    var_median: np.ndarray
    var_p001: np.ndarray


def power_increase_symbol(oracle: Callable[[int], int] | Sequence[int], n_ppb: int,
                          p0: float, rng: np.random.Generator) -> tuple[int, float]:
    """Double the per-pulse power until a polarity guess lands.

    The oracle reveals the true polarity of pulse j right after the attacker
    commits its sample (no observation delay, one-sample advancement goal).
    Returns (success, energy spent); worst-case energy is p0 * (2^n_ppb - 1).
    """
    if not p0 > 0:
        raise ConfigError("initial power must be positive")
    reveal = oracle if callable(oracle) else lambda j: oracle[j]
    energy = 0.0
    power = p0
    for j in range(n_ppb):
        guess = int(rng.integers(0, 2)) * 2 - 1
        energy += power
        truth = int(reveal(j))
        if truth not in (-1, 1):
            raise ConfigError("oracle must reveal polarities in {-1, +1}")
        if guess == truth:
            return 1, energy
        power *= 2.0
    return 0, energy


def guess_frame(model: AttackerModel, true_frame: PulseFrame, rng: np.random.Generator,
                n_ppb: int = 1) -> AttackTrace:
    """Realize one attack frame against a known-amplitude true frame.

    Ideal bias copies a uniformly random floor(rho*n_p)-subset of pulses at
    nominal amplitude and guesses the rest; the non-ideal bias guesses
    sequentially without ever erring twice in a row; the power-increase
    strategy doubles within each symbol until a pulse lands, then stops
    interfering for the rest of the symbol.
    """
    n_p = len(true_frame)
    if n_p % n_ppb:
        raise ConfigError("frame length must be a multiple of n_ppb")
    amplitude = float(np.abs(true_frame.samples).max())
    polarity = np.sign(true_frame.samples).astype(np.int8)

    if model.kind == "power_increase":
        attack = np.zeros(n_p)
        power = np.full(n_p // n_ppb, amplitude**2)
        count = 0
        for j in range(n_p):
            sym = j // n_ppb
            if power[sym] == 0.0:
                continue
            guess = int(rng.integers(0, 2)) * 2 - 1
            attack[j] = guess * math.sqrt(power[sym])
            count += 1
            if guess == polarity[j]:
                power[sym] = 0.0
            else:
                power[sym] *= 2.0
        correctness = np.where(np.sign(attack) == polarity, 1, -1)[attack != 0]
    else:
        c = correctness_pattern(model.kind, model.rho, n_p, 1, rng, shuffle=True)[0]
        attack = polarity * c * amplitude
        correctness = c.astype(np.float64)
        count = n_p

    mean = float(correctness.mean()) if correctness.size else 0.0
    rnv = float(np.mean((correctness - mean) ** 2)) if correctness.size else 0.0
    per_symbol = (attack * polarity).reshape(-1, n_ppb).mean(axis=1) / amplitude
    return AttackTrace(
        attack_frame=PulseFrame(attack),
        per_symbol_mean=per_symbol,
        residual_normalized_variance=rnv,
        interference_count=count,
        bits_granted=model.grant_bits,
    )


def continued_interference_sim(model: AttackerModel, n_p: int, trials: int,
                               rng: np.random.Generator) -> InterferenceCurve:
    """Strategy-space trajectory of guessing as interference continues.

    After k interfered pulses the symbol-aggregate mean is taken as granted
    (k normalized by n_p; the power-increase forces the bit means), while
    the normalized residual variance of the guessing errors is measured:
    v(k) = sum_{i<=k} (e_i - mean_k)^2 / n_p, with e_i the per-pulse
    correctness. Reported per count: the median and the 0.1th percentile.
    """
    if model.kind == "power_increase":
        raise ConfigError("continued interference applies to guessing strategies")
    if trials < 1:
        raise ConfigError("need at least one trial")
    e = correctness_pattern(model.kind, model.rho, n_p, trials, rng, shuffle=True)
    counts = np.arange(1, n_p + 1)
    running = np.cumsum(e.astype(np.float64), axis=1)
    v = (counts[None, :] - running**2 / counts[None, :]) / n_p
    return InterferenceCurve(
        interference_count=counts,
        mean=counts / n_p,
        var_median=np.median(v, axis=0),
        var_p001=np.percentile(v, 0.1, axis=0),
    )


def over_approx_strength(n_p: int) -> float:
    """Probability mass discarded by the never-twice-wrong concession: 0.75^(n_p/2).

    Every two interfered pulses exclude the double-mistake event of
    probability 1/4.
    """
    if n_p < 2:
        raise ConfigError("n_p must be >= 2")
    return 0.75 ** (n_p / 2.0)


def break_even_pulses_per_bit() -> float:
    """Symbol length above which the concession is stronger than 2^-1 per bit."""
    return 2.0 * math.log(0.5) / math.log(0.75)


def kl_gaussian_zero_mean(sigma1: float, sigma2: float) -> float:
    """KL divergence (nats) between zero-mean Gaussians N(0,s1^2) || N(0,s2^2)."""
    if not (sigma1 > 0 and sigma2 > 0):
        raise ValueError("standard deviations must be positive")
    return math.log(sigma2 / sigma1) + sigma1**2 / (2.0 * sigma2**2) - 0.5
