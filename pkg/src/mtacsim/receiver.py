"""Receive-side verification: bit detection, template, secure distortion test.

The verifier demodulates bits with the shared mask, rebuilds the expected
polarity sequence (template) from the detected bits, and tests whether the
centered residual power is a small enough fraction of the received power.
The threshold is calibrated per performance level so the false-negative
rate stays below the frame error rate, then maximized over the region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import (
    ConfigError,
    DegenerateFrameError,
    KeyMaterial,
    Message,
    ModulationConfig,
    PulseFrame,
    XorSequence,
    expand_xor_sequence,
)
from .channel import (
    ChannelParams,
    PerformanceLevel,
    PerformanceRegion,
    q_inv,
    required_nppb,
    snr_per_pulse,
)
from . import montecarlo

__all__ = [
    "Template",
    "DistortionReport",
    "ThresholdConfig",
    "detect_bits",
    "build_template",
    "distortion",
    "frame_error_rate",
    "legit_distortion_stats",
    "threshold_for_level",
    "effective_threshold",
    "vrfy",
]


@dataclass(frozen=True)
class Template:
    """Expected +/-1 pulse polarity sequence reconstructed at the receiver."""

    expected: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.expected, dtype=np.int8)
        if t.ndim != 1 or t.size < 2:
            raise ConfigError("template must hold at least two entries")
        if not np.all(np.abs(t) == 1):
            raise ConfigError("template values must be -1 or +1")
        t.setflags(write=False)
        object.__setattr__(self, "expected", t)

    def __len__(self) -> int:
        return self.expected.size


@dataclass(frozen=True)
class DistortionReport:
    """Distortion statistic and its ingredients for one received frame."""

    distortion: float
    residual_power: float
    total_power: float
    equivalent_pulse_mean: float


@dataclass(frozen=True)
class ThresholdConfig:
    """Per-level distortion thresholds and their region-wide maximum."""

    per_level: dict[PerformanceLevel, float]
    effective: float
    target_fnr: float


def detect_bits(received: PulseFrame, x: XorSequence, cfg: ModulationConfig) -> Message:
    """Per-bit hypothesis test on the mask-correlated symbol sums.

    Bit i is 1 iff the correlation of its n_ppb samples with the mask is
    positive; an exactly-zero statistic resolves to 0.
    """
    if len(received) != cfg.n_p or len(x) != cfg.n_p:
        raise ConfigError(
            f"expected {cfg.n_p} samples, got frame={len(received)} mask={len(x)}"
        )
    stats = (received.samples * x.mask).reshape(cfg.n_b, cfg.n_ppb).sum(axis=1)
    return Message(tuple(int(s > 0) for s in stats))


def build_template(m_prime: Message, x: XorSequence, cfg: ModulationConfig) -> Template:
    """Expected polarity sequence for the detected bits under the shared mask."""
    if len(m_prime) != cfg.n_b or len(x) != cfg.n_p:
        raise ConfigError("message/mask lengths inconsistent with configuration")
    polarity = np.repeat(np.asarray(m_prime.bits, dtype=np.int8) * 2 - 1, cfg.n_ppb)
    return Template(polarity * x.mask)


def distortion(received: PulseFrame, template: Template) -> DistortionReport:
    """Ratio of centered residual power to total received power.

    p'[i] = received[i] * template[i]; D = sum((p' - mean)^2) / sum(received^2).
    Scale-invariant and bounded in [0, 1].
    """
    if len(received) != len(template):
        raise ConfigError("frame and template lengths differ")
    if len(received) < 2:
        raise ConfigError("need at least two samples")
    total = float(np.dot(received.samples, received.samples))
    if total <= 0.0:
        raise DegenerateFrameError("received frame has no energy")
    p_equiv = received.samples * template.expected
    mu = float(p_equiv.mean())
    residual = p_equiv - mu
    res_power = float(np.dot(residual, residual))
    return DistortionReport(
        distortion=res_power / total,
        residual_power=res_power,
        total_power=total,
        equivalent_pulse_mean=mu,
    )


def frame_error_rate(ber_value: float, n_b: int) -> float:
    """Probability of at least one bit error in an n_b-bit frame."""
    return 1.0 - (1.0 - ber_value) ** n_b


def legit_distortion_stats(level: PerformanceLevel, cfg: ModulationConfig,
                           params: ChannelParams, trials: int,
                           rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo mean and standard deviation of the legitimate distortion.

    Frames are transmitted at the level's distance with the given modulation
    and verified with the template built from the detected bits.
    """
    snr = snr_per_pulse(params, level.distance_m, level.nlos_attenuation_db)
    d = montecarlo.legit_distortion_samples(cfg, snr, trials, rng)
    return float(d.mean()), float(d.std(ddof=1))


def threshold_for_level(level: PerformanceLevel, stats: tuple[float, float],
                        n_b: int) -> float:
    """Distortion threshold placing the false-negative rate at the frame error rate.

    T = mu + Qinv(FNR) * sigma with FNR = 1 - (1 - BER)^n_b, clamped to [0, 1].
    """
    mu, sigma = stats
    if sigma < 0:
        raise ConfigError("sigma must be non-negative")
    fnr = frame_error_rate(level.target_ber, n_b)
    if not 0.0 < fnr < 1.0:
        return 1.0
    return float(min(1.0, max(0.0, mu + q_inv(fnr) * sigma)))


def effective_threshold(region: PerformanceRegion, cfg_n_b: int, params: ChannelParams,
                        trials: int, rng: np.random.Generator,
                        stats_fn=None) -> ThresholdConfig:
    """Maximum of the per-level thresholds over the region grid.

    Each level is calibrated with its own required symbol length. `stats_fn`
    may replace the Monte-Carlo calibration (signature: level, cfg -> (mu, sigma)).
    """
    if not region.grid:
        raise ConfigError("region grid is empty")
    per_level: dict[PerformanceLevel, float] = {}
    worst_fnr = 0.0
    for level in region.grid:
        cfg = ModulationConfig(required_nppb(level, params), cfg_n_b)
        if stats_fn is None:
            stats = legit_distortion_stats(level, cfg, params, trials, rng)
        else:
            stats = stats_fn(level, cfg)
        per_level[level] = threshold_for_level(level, stats, cfg_n_b)
        worst_fnr = max(worst_fnr, frame_error_rate(level.target_ber, cfg_n_b))
    return ThresholdConfig(
        per_level=per_level,
        effective=max(per_level.values()),
        target_fnr=worst_fnr,
    )


def vrfy(key: KeyMaterial, m_prime: Message, received: PulseFrame,
         thr: ThresholdConfig, cfg: ModulationConfig) -> int:
    """Accept (1) iff the distortion against the m_prime template is within bound.

    Degenerate input (a frame with no energy) rejects rather than erroring.
    """
    x = expand_xor_sequence(key, cfg.n_p)
    return vrfy_with_mask(x, m_prime, received, thr.effective, cfg)


def vrfy_with_mask(x: XorSequence, m_prime: Message, received: PulseFrame,
                   threshold: float, cfg: ModulationConfig) -> int:
    """Mask-level verification core shared by `vrfy` and the game harness."""
    template = build_template(m_prime, x, cfg)
    try:
        report = distortion(received, template)
    except DegenerateFrameError:
        return 0
    return int(report.distortion <= threshold)
