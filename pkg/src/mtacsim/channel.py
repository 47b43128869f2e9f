"""Link budget, AWGN noise model, BER closed forms, and symbol-length sizing.

Internal unit is linear watts; dB conversions live here at the module
boundary. Per-pulse transmit power defaults to the 0 dBm UWB peak
constraint; the average-PSD limit is recorded for reference but does not
bind when pulses are widely spaced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .codec import ConfigError, PulseFrame

__all__ = [
    "SPEED_OF_LIGHT_M_S",
    "AVG_EIRP_DENSITY_LIMIT_DBM_PER_MHZ",
    "ChannelParams",
    "PerformanceLevel",
    "PerformanceRegion",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
    "q_func",
    "q_inv",
    "noise_variance",
    "received_power",
    "snr_per_pulse",
    "distance_for_snr",
    "ber",
    "required_nppb",
    "apply_channel",
    "awgn",
    "security_link_margin",
    "log_distance_grid",
]

SPEED_OF_LIGHT_M_S = 2.99792458e8

# Regulatory average EIRP density for licensed UWB operation. Stored for
# reference only: with pulses spaced widely enough, the 0 dBm peak limit is
# the binding constraint in this link budget.
AVG_EIRP_DENSITY_LIMIT_DBM_PER_MHZ = -41.3

REFERENCE_SECURE_DISTANCE_M = 200.0


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w) + 30.0


def q_func(x):
    """Standard normal complementary CDF Q(x)."""
    return ndtr(-np.asarray(x, dtype=np.float64)) if np.ndim(x) else float(ndtr(-x))


def q_inv(p: float) -> float:
    """Inverse of Q; defined for p in the open interval (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"q_inv requires p in (0, 1), got {p}")
    return float(-ndtri(p))


@dataclass(frozen=True)
class ChannelParams:
    """Free-space AWGN link parameters (per-pulse peak power, dB domain)."""

    tx_power_dbm: float = 0.0
    center_freq_hz: float = 6.6816e9
    bandwidth_hz: float = 6.2e8
    noise_psd_dbm_per_hz: float = -174.0
    nlos_attenuation_db: float = 0.0

    def __post_init__(self) -> None:
        if not self.bandwidth_hz > 0:
            raise ConfigError("bandwidth must be positive")
        if not self.center_freq_hz > self.bandwidth_hz / 2:
            raise ConfigError("center frequency must exceed half the bandwidth")
        if self.nlos_attenuation_db < 0:
            raise ConfigError("NLoS attenuation must be >= 0 dB")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / self.center_freq_hz

    def with_nlos(self, nlos_attenuation_db: float) -> "ChannelParams":
        return ChannelParams(
            self.tx_power_dbm,
            self.center_freq_hz,
            self.bandwidth_hz,
            self.noise_psd_dbm_per_hz,
            nlos_attenuation_db,
        )


@dataclass(frozen=True)
class PerformanceLevel:
    """One operating point: distance, target BER, NLoS attenuation."""

    distance_m: float
    target_ber: float
    nlos_attenuation_db: float = 0.0

    def __post_init__(self) -> None:
        if not self.distance_m > 0:
            raise ConfigError("distance must be positive")
        if not 0.0 < self.target_ber < 0.5:
            raise ConfigError("target BER must lie in (0, 0.5)")
        if self.nlos_attenuation_db < 0:
            raise ConfigError("NLoS attenuation must be >= 0 dB")


def log_distance_grid(max_distance_m: float, points_per_decade: int = 32,
                      min_distance_m: float = 1.0) -> np.ndarray:
    """Logarithmic distance grid over (min, max], endpoint included."""
    if not max_distance_m > min_distance_m:
        raise ConfigError("max distance must exceed min distance")
    decades = math.log10(max_distance_m / min_distance_m)
    n = max(2, int(round(decades * points_per_decade)) + 1)
    return np.logspace(math.log10(min_distance_m), math.log10(max_distance_m), n)


@dataclass(frozen=True)
class PerformanceRegion:
    """Boxed region of performance levels with a sampling grid."""

    max_ber: float
    max_distance_m: float
    max_attenuation_db: float
    grid: tuple[PerformanceLevel, ...] = field(default=())

    def __post_init__(self) -> None:
        for p in self.grid:
            if p.target_ber > self.max_ber or p.distance_m > self.max_distance_m \
                    or p.nlos_attenuation_db > self.max_attenuation_db:
                raise ConfigError(f"grid level {p} lies outside the region box")

    @classmethod
    def boxed(cls, max_ber: float, max_distance_m: float, max_attenuation_db: float,
              ber_grid: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-6),
              points_per_decade: int = 32,
              min_distance_m: float = 1.0) -> "PerformanceRegion":
        """Region sampled on a log-distance grid crossed with a BER grid."""
        bers = tuple(b for b in ber_grid if b <= max_ber)
        if not bers:
            raise ConfigError("no BER grid point lies within the region")
        grid = tuple(
            PerformanceLevel(float(d), b, max_attenuation_db)
            for b in bers
            for d in log_distance_grid(max_distance_m, points_per_decade, min_distance_m)
        )
        return cls(max_ber, max_distance_m, max_attenuation_db, grid)

    def distances(self) -> np.ndarray:
        return np.unique(np.array([p.distance_m for p in self.grid]))

    def bers(self) -> np.ndarray:
        return np.unique(np.array([p.target_ber for p in self.grid]))


def noise_variance(params: ChannelParams) -> float:
    """Thermal noise power in watts over the system bandwidth: N0 * bW."""
    return dbm_to_watts(params.noise_psd_dbm_per_hz) * params.bandwidth_hz


def received_power(params: ChannelParams, d_m: float,
                   nlos_attenuation_db: float | None = None) -> float:
    """Friis free-space received power in watts, including the NLoS loss.

    P_rx = P_tx * (lambda / 4 pi d)^2 * 10^(-Gamma/10)
    """
    if not d_m > 0:
        raise ValueError(f"distance must be positive, got {d_m}")
    gamma = params.nlos_attenuation_db if nlos_attenuation_db is None else nlos_attenuation_db
    p_tx_w = dbm_to_watts(params.tx_power_dbm)
    geometry = (params.wavelength_m / (4.0 * math.pi * d_m)) ** 2
    return p_tx_w * geometry * db_to_linear(-gamma)


def snr_per_pulse(params: ChannelParams, d_m: float,
                  nlos_attenuation_db: float | None = None) -> float:
    """Linear per-pulse SNR at distance d: P_rx / sigma_n^2."""
    return received_power(params, d_m, nlos_attenuation_db) / noise_variance(params)


def distance_for_snr(params: ChannelParams, snr_linear: float,
                     nlos_attenuation_db: float | None = None) -> float:
    """Distance at which the per-pulse SNR equals `snr_linear` (inverse Friis)."""
    if not snr_linear > 0:
        raise ValueError("SNR must be positive")
    gamma = params.nlos_attenuation_db if nlos_attenuation_db is None else nlos_attenuation_db
    p_tx_w = dbm_to_watts(params.tx_power_dbm)
    target = snr_linear * noise_variance(params)
    return (params.wavelength_m / (4.0 * math.pi)) * math.sqrt(
        p_tx_w * db_to_linear(-gamma) / target
    )


def ber(n_ppb: int, p_rx_w: float, sigma_n2_w: float) -> float:
    """Coherent BPSK bit error rate: Q(sqrt(n_ppb * P_rx / sigma_n^2))."""
    return q_func(math.sqrt(n_ppb * p_rx_w / sigma_n2_w))


def required_nppb(level: PerformanceLevel, params: ChannelParams) -> int:
    """Smallest pulses-per-bit meeting the level's target BER at its distance."""
    snr = snr_per_pulse(params, level.distance_m, level.nlos_attenuation_db)
    need = q_inv(level.target_ber) ** 2 / snr
    n = max(1, math.ceil(need))
    # Guard against roundoff at exact integer boundaries.
    while ber(n, snr, 1.0) > level.target_ber:
        n += 1
    return n


def awgn(samples: np.ndarray, rx_amplitude: float, noise_std: float,
         rng: np.random.Generator) -> np.ndarray:
    """Scale unit-amplitude samples to the receive amplitude and add noise."""
    out = samples * rx_amplitude
    if noise_std > 0:
        out = out + rng.normal(0.0, noise_std, size=samples.shape)
    return out


def apply_channel(frame: PulseFrame, level: PerformanceLevel, params: ChannelParams,
                  rng: np.random.Generator) -> PulseFrame:
    """Propagate a unit-amplitude frame to the level's distance over AWGN."""
    p_rx = received_power(params, level.distance_m, level.nlos_attenuation_db)
    sigma = math.sqrt(noise_variance(params))
    return PulseFrame(awgn(frame.samples, math.sqrt(p_rx), sigma, rng))


def security_link_margin(d_max_m: float, nlos_db: float) -> float:
    """Extra link budget (dB) needed to keep bit-equivalent security at d_max.

    max(0, 20 log10(d_max / 200 m) + Gamma_nlos)
    """
    if not d_max_m > 0:
        raise ValueError("d_max must be positive")
    return max(0.0, 20.0 * math.log10(d_max_m / REFERENCE_SECURE_DISTANCE_M) + nlos_db)
