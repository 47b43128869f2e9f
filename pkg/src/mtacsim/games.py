"""Forgery experiments and security/performance campaigns.

The advancement game feeds an attacker the challenge frame one sample at a
time behind a causal window: sample i+delta must be committed before
anything past sample i-alpha is revealed. Insecurity is maximal at
alpha=0, delta=1. The delay game superposes the attacker's output on the
challenge and asks a presence verifier whether any trace survives.

Campaign-side, attacker and legitimate distortion statistics are selected
in the attacker's favor over the region (argmin of mu-sigma against argmax
of mu+sigma) and combined into a Gaussian tail bound on the advantage,
which extrapolates below Monte-Carlo resolution.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
from scipy.special import ndtri

from . import montecarlo
from .adversary import AttackerModel
from .channel import (
    ChannelParams,
    PerformanceLevel,
    PerformanceRegion,
    log_distance_grid,
    noise_variance,
    q_func,
    q_inv,
    received_power,
    required_nppb,
    snr_per_pulse,
)
from .codec import (
    ConfigError,
    KeyMaterial,
    Message,
    ModulationConfig,
    PulseFrame,
    expand_xor_sequence,
    mtac_generate,
)
from .receiver import detect_bits, frame_error_rate, vrfy_with_mask
from .rngstream import substream

__all__ = [
    "CausalityFault",
    "InsufficientDataError",
    "GameConfig",
    "GameEnv",
    "ObservedPrefix",
    "MtacOracle",
    "AdvantageReport",
    "RegionMap",
    "QQData",
    "UnbiasedGuessAttacker",
    "MaskLeakAttacker",
    "NullDelayAttacker",
    "UnbiasedAnnihilator",
    "residual_energy_detector",
    "run_mtac_a_trial",
    "run_mtac_d_trial",
    "gaussian_advantage",
    "legit_stats_at",
    "attacker_stats_at",
    "select_attacker_params",
    "select_legit_params",
    "cell_report",
    "region_map",
    "framelen_sweep",
    "qq_data",
]


class CausalityFault(RuntimeError):
    """An attacker tried to observe samples ahead of its causal window."""


class InsufficientDataError(ValueError):
    """Too few samples for the requested statistic."""


@dataclass(frozen=True)
class GameConfig:
    """Observation delay, advancement goal, and resource budgets."""

    alpha: int = 0
    delta: int = 1
    oracle_budget_q: int = 16
    time_budget_t: int = 1_000_000

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if self.delta < 1:
            raise ConfigError("delta must be >= 1")
        if self.oracle_budget_q < 0 or self.time_budget_t < 1:
            raise ConfigError("budgets must be non-negative (t >= 1)")


class ObservedPrefix:
    """Read-only causal view of the challenge frame.

    Indexing past the currently revealed prefix raises CausalityFault; the
    harness never hands out more than the schedule allows.
    """

    __slots__ = ("_samples", "_limit")

    def __init__(self, samples: np.ndarray, limit: int):
        self._samples = samples
        self._limit = max(0, min(limit, samples.size))

    def __len__(self) -> int:
        return self._limit

    def __getitem__(self, i: int) -> float:
        if not 0 <= i < self._limit:
            raise CausalityFault(
                f"sample {i} is outside the revealed prefix of length {self._limit}"
            )
        return float(self._samples[i])

    def revealed(self) -> np.ndarray:
        return self._samples[:self._limit].copy()


class MtacOracle:
    """Chosen-message access to the code generator under the session key.

    Each query consumes one counter value; the challenge uses the next one.
    """

    def __init__(self, key: KeyMaterial, cfg: ModulationConfig, budget: int):
        self._key = key
        self._cfg = cfg
        self._budget = budget
        self._queries: list[tuple[int, ...]] = []

    @property
    def query_count(self) -> int:
        return len(self._queries)

    @property
    def queried_messages(self) -> set[tuple[int, ...]]:
        return set(self._queries)

    def query(self, m: Message) -> PulseFrame:
        if len(self._queries) >= self._budget:
            raise ConfigError("oracle budget exhausted")
        key = KeyMaterial(self._key.seed, self._key.counter + len(self._queries))
        self._queries.append(m.bits)
        return mtac_generate(key, m, self._cfg)

    def challenge_key(self) -> KeyMaterial:
        return KeyMaterial(self._key.seed, self._key.counter + len(self._queries))


class AdvanceAttacker(Protocol):
    def prepare(self, oracle: MtacOracle, cfg: ModulationConfig,
                rng: np.random.Generator) -> Message: ...

    def next_sample(self, index: int, observed: ObservedPrefix,
                    rng: np.random.Generator) -> float: ...


@dataclass
class GameEnv:
    """Channel and verification context for one game.

    `level` None plays the game noiselessly at unit scale (the distortion
    decision is scale-invariant).
    """

    cfg: ModulationConfig
    params: ChannelParams
    key: KeyMaterial
    threshold: float
    level: PerformanceLevel | None = None
    presence_verifier: Callable[[np.ndarray, float, float], int] | None = None

    def arrival(self) -> tuple[float, float]:
        """(amplitude scale on transmit-unit samples, noise std) at the receiver."""
        if self.level is None:
            return 1.0, 0.0
        p_rx = received_power(self.params, self.level.distance_m,
                              self.level.nlos_attenuation_db)
        return math.sqrt(p_rx) / self.cfg.amplitude, math.sqrt(noise_variance(self.params))


def run_mtac_a_trial(attacker: AdvanceAttacker, game: GameConfig, env: GameEnv,
                     rng: np.random.Generator) -> int:
    """One advancement-forgery experiment; 1 iff the attacker wins.

    The attacker commits sample i+delta before anything beyond sample
    i-alpha is revealed. It wins when verification accepts and the detected
    message was never queried. A schedule violation propagates as
    CausalityFault rather than counting as a win.
    """
    n_p = env.cfg.n_p
    oracle = MtacOracle(env.key, env.cfg, game.oracle_budget_q)
    m = attacker.prepare(oracle, env.cfg, rng)
    if oracle.query_count + n_p > game.time_budget_t:
        raise ConfigError("time budget too small for one frame")
    key = oracle.challenge_key()
    c = mtac_generate(key, m, env.cfg)
    mask = expand_xor_sequence(key, n_p)

    commits = np.empty(n_p)
    for j in range(n_p):
        view = ObservedPrefix(c.samples, j + 1 - game.delta - game.alpha)
        commits[j] = attacker.next_sample(j, view, rng)

    scale, sigma = env.arrival()
    received = commits * scale
    if sigma > 0:
        received = received + rng.normal(0.0, sigma, size=n_p)
    frame = PulseFrame(received)
    m_prime = detect_bits(frame, mask, env.cfg)
    accepted = vrfy_with_mask(mask, m_prime, frame, env.threshold, env.cfg)
    return int(accepted == 1 and m_prime.bits not in oracle.queried_messages)


def residual_energy_detector(band_sigmas: float = 6.0):
    """Presence verifier: flags unless total energy is noise-only consistent.

    Returns a callable(samples, rx_amplitude, noise_std) -> bit where 1
    means "some signal trace detected" (legitimate or attack). Annihilating
    with wrong polarities doubles per-sample energy, so it is flagged. The
    band width is a free tuning parameter of this placeholder.
    """

    def verifier(samples: np.ndarray, rx_amplitude: float, noise_std: float) -> int:
        n = samples.size
        energy = float(np.dot(samples, samples))
        noise_floor = n * noise_std**2
        slack = band_sigmas * math.sqrt(2.0 * n) * noise_std**2
        slack = max(slack, 1e-9 * n * rx_amplitude**2)
        return int(energy > noise_floor + slack)

    return verifier


def run_mtac_d_trial(attacker: AdvanceAttacker, alpha: int, env: GameEnv,
                     rng: np.random.Generator) -> int:
    """One delay-forgery experiment; 1 iff all traces of the signal are erased.

    The attacker's output superposes sample-wise on the challenge under the
    same one-step-behind schedule; it wins when the presence verifier finds
    neither the legitimate signal nor the attacker's own.
    """
    if alpha < 0:
        raise ConfigError("alpha must be >= 0")
    n_p = env.cfg.n_p
    oracle = MtacOracle(env.key, env.cfg, 16)
    m = attacker.prepare(oracle, env.cfg, rng)
    key = oracle.challenge_key()
    c = mtac_generate(key, m, env.cfg)

    commits = np.empty(n_p)
    for j in range(n_p):
        view = ObservedPrefix(c.samples, j - alpha)
        commits[j] = attacker.next_sample(j, view, rng)

    scale, sigma = env.arrival()
    superposed = (c.samples + commits) * scale
    if sigma > 0:
        superposed = superposed + rng.normal(0.0, sigma, size=n_p)
    verifier = env.presence_verifier or residual_energy_detector()
    detected = verifier(superposed, env.cfg.amplitude * scale, sigma)
    return int(detected == 0)


class UnbiasedGuessAttacker:
    """Commits a fresh +/-amplitude coin flip for every sample."""

    def __init__(self, amplitude: float = 1.0):
        self.amplitude = amplitude

    def prepare(self, oracle, cfg, rng) -> Message:
        return Message.random(cfg.n_b, rng)

    def next_sample(self, index, observed, rng) -> float:
        return float((int(rng.integers(0, 2)) * 2 - 1) * self.amplitude)


class MaskLeakAttacker:
    """Knows the mask (e.g. a compromised expansion) but not the message.

    Infers each symbol's bit from the first causally observable sample of
    that symbol; until one is visible it sticks to a per-symbol coin flip.
    Its success decays as the causal window widens, which exhibits the
    (alpha, delta) monotonicity of the games.
    """

    def __init__(self, mask: np.ndarray, cfg: ModulationConfig):
        self.mask = np.asarray(mask, dtype=np.float64)
        self.cfg = cfg
        self._guess: dict[int, int] = {}

    def prepare(self, oracle, cfg, rng) -> Message:
        self._guess = {}
        return Message.random(cfg.n_b, rng)

    def next_sample(self, index, observed, rng) -> float:
        sym = index // self.cfg.n_ppb
        start = sym * self.cfg.n_ppb
        if len(observed) > start:
            bit_sign = 1.0 if observed[start] * self.mask[start] > 0 else -1.0
        else:
            if sym not in self._guess:
                self._guess[sym] = int(rng.integers(0, 2)) * 2 - 1
            bit_sign = float(self._guess[sym])
        return float(self.mask[index] * bit_sign * self.cfg.amplitude)


class NullDelayAttacker:
    """Stays silent; the legitimate signal passes through untouched."""

    def prepare(self, oracle, cfg, rng) -> Message:
        return Message.random(cfg.n_b, rng)

    def next_sample(self, index, observed, rng) -> float:
        return 0.0


class UnbiasedAnnihilator:
    """Transmits the negative of a polarity guess at nominal amplitude.

    Wrong guesses double the sample energy instead of erasing it.
    """

    def __init__(self, amplitude: float = 1.0):
        self.amplitude = amplitude

    def prepare(self, oracle, cfg, rng) -> Message:
        return Message.random(cfg.n_b, rng)

    def next_sample(self, index, observed, rng) -> float:
        return float(-(int(rng.integers(0, 2)) * 2 - 1) * self.amplitude)


def gaussian_advantage(report_inputs: tuple[float, float, float, float],
                       fnr: float) -> float:
    """Tail bound Q((mu_att - (mu_lgt + Qinv(FNR) sigma_lgt)) / sigma_att)."""
    mu_att, sigma_att, mu_lgt, sigma_lgt = report_inputs
    if sigma_att < 0 or sigma_lgt < 0:
        raise ConfigError("standard deviations must be non-negative")
    threshold = mu_lgt + q_inv(fnr) * sigma_lgt
    if sigma_att == 0.0:
        return 1.0 if mu_att <= threshold else 0.0
    return float(q_func((mu_att - threshold) / sigma_att))


def legit_stats_at(cfg: ModulationConfig, params: ChannelParams, distance_m: float,
                   nlos_db: float, trials: int, rng: np.random.Generator) -> tuple[float, float]:
    """(mu, sigma) of the legitimate distortion at a given distance."""
    snr = snr_per_pulse(params, distance_m, nlos_db)
    d = montecarlo.legit_distortion_samples(cfg, snr, trials, rng)
    return float(d.mean()), float(d.std(ddof=1))


def attacker_stats_at(cfg: ModulationConfig, params: ChannelParams, distance_m: float,
                      nlos_db: float, model: AttackerModel, trials: int,
                      rng: np.random.Generator) -> tuple[float, float]:
    """(mu, sigma) of the attack distortion when the guess arrives from `distance_m`.

    The attack signal rides the same noise floor as a legitimate signal
    received from that distance; the bit level is granted when the model
    says so.
    """
    snr = snr_per_pulse(params, distance_m, nlos_db)
    d = montecarlo.attack_distortion_samples(cfg, snr, model.kind, model.rho, trials,
                                             rng, granted=model.grant_bits)
    return float(d.mean()), float(d.std(ddof=1))


def select_attacker_params(region: PerformanceRegion,
                           stats_fn: Callable[[PerformanceLevel], tuple[float, float]],
                           ) -> tuple[float, float, float]:
    """Grid-argmin of mu - sigma over the region, ties toward smaller distance."""
    if not region.grid:
        raise ConfigError("region grid is empty")
    best: tuple[float, float, float] | None = None
    best_score = math.inf
    for level in region.grid:
        mu, sigma = stats_fn(level)
        score = mu - sigma
        if score < best_score or (score == best_score and best is not None
                                  and level.distance_m < best[2]):
            best_score = score
            best = (mu, sigma, level.distance_m)
    return best


def select_legit_params(region: PerformanceRegion,
                        stats_fn: Callable[[PerformanceLevel], tuple[float, float]],
                        ) -> tuple[float, float, float]:
    """Grid-argmax of mu + sigma over the region, ties toward larger distance."""
    if not region.grid:
        raise ConfigError("region grid is empty")
    best: tuple[float, float, float] | None = None
    best_score = -math.inf
    for level in region.grid:
        mu, sigma = stats_fn(level)
        score = mu + sigma
        if score > best_score or (score == best_score and best is not None
                                  and level.distance_m > best[2]):
            best_score = score
            best = (mu, sigma, level.distance_m)
    return best


@dataclass(frozen=True)
class AdvantageReport:
    """Worst-case Gaussian advantage for one performance level."""

    mu_att: float
    sigma_att: float
    mu_lgt: float
    sigma_lgt: float
    fnr_target: float
    advantage: float
    bit_equivalent: bool


@dataclass(frozen=True)
class RegionMap:
    """Advantage reports over a (distance, target BER) grid."""

    entries: dict[tuple[float, float], AdvantageReport]
    boundary_m: float
    distances: tuple[float, ...]
    bers: tuple[float, ...]
    n_b: int
    nlos_db: float = 0.0


@dataclass(frozen=True)
class QQData:
    """Standardized order statistics against normal plotting quantiles."""

    pairs: np.ndarray
    central_correlation: float


def _subgrid(d_max: float, points: int, d_min: float = 1.0) -> np.ndarray:
    if d_max <= d_min:
        return np.array([d_max])
    return np.geomspace(d_min, d_max, points)


def cell_report(params: ChannelParams, distance_m: float, target_ber: float,
                nlos_db: float, n_b: int, model: AttackerModel, trials: int,
                seed: int, cell_index: int, attacker_points: int = 4,
                legit_points: int = 3) -> AdvantageReport:
    """Advantage at one performance level (distance, target BER).

    The symbol length is sized for the level; legitimate statistics are
    maximized and attacker statistics minimized over log-spaced distance
    candidates up to the level distance.
    """
    level = PerformanceLevel(distance_m, target_ber, nlos_db)
    cfg = ModulationConfig(required_nppb(level, params), n_b)
    fnr = frame_error_rate(target_ber, n_b)

    legit_grid = _subgrid(distance_m, legit_points, d_min=max(1.0, distance_m / 8.0))
    legit_levels = PerformanceRegion(
        target_ber, distance_m, nlos_db,
        tuple(PerformanceLevel(float(d), target_ber, nlos_db) for d in legit_grid),
    )
    legit_cache: dict[float, tuple[float, float]] = {}

    def legit_fn(lv: PerformanceLevel) -> tuple[float, float]:
        if lv.distance_m not in legit_cache:
            rng = substream(seed, cell_index, len(legit_cache), 0)
            legit_cache[lv.distance_m] = legit_stats_at(
                cfg, params, lv.distance_m, nlos_db, trials, rng)
        return legit_cache[lv.distance_m]

    mu_l, sig_l, _ = select_legit_params(legit_levels, legit_fn)

    att_grid = _subgrid(distance_m, attacker_points, d_min=1.0)
    att_levels = PerformanceRegion(
        target_ber, distance_m, nlos_db,
        tuple(PerformanceLevel(float(d), target_ber, nlos_db) for d in att_grid),
    )
    att_cache: dict[float, tuple[float, float]] = {}

    def att_fn(lv: PerformanceLevel) -> tuple[float, float]:
        if lv.distance_m not in att_cache:
            rng = substream(seed, cell_index, len(att_cache), 1)
            att_cache[lv.distance_m] = attacker_stats_at(
                cfg, params, lv.distance_m, nlos_db, model, trials, rng)
        return att_cache[lv.distance_m]

    mu_a, sig_a, _ = select_attacker_params(att_levels, att_fn)

    adv = gaussian_advantage((mu_a, sig_a, mu_l, sig_l), fnr)
    return AdvantageReport(
        mu_att=mu_a, sigma_att=sig_a, mu_lgt=mu_l, sigma_lgt=sig_l,
        fnr_target=fnr, advantage=adv, bit_equivalent=bool(adv <= 2.0 ** (-n_b)),
    )


def _region_cell(args) -> tuple[int, AdvantageReport]:
    index, params, d, ber, nlos, n_b, model, trials, seed, ap, lp = args
    return index, cell_report(params, d, ber, nlos, n_b, model, trials, seed,
                              index, ap, lp)


def region_map(params: ChannelParams, n_b: int, model: AttackerModel, *,
               max_distance_m: float, nlos_db: float = 0.0,
               ber_grid: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-6),
               points_per_decade: int = 32, trials: int = 1500, seed: int = 1,
               threads: int = 1, attacker_points: int = 4,
               legit_points: int = 3) -> RegionMap:
    """Advantage map over the performance region and its security boundary.

    boundary_m is the largest grid distance at which every BER column still
    holds bit-equivalent security (advantage <= 2^-n_b); 0 when none does.
    """
    distances = log_distance_grid(max_distance_m, points_per_decade)
    cells = [
        (i, params, float(d), float(b), nlos_db, n_b, model, trials, seed,
         attacker_points, legit_points)
        for i, (b, d) in enumerate((b, d) for b in ber_grid for d in distances)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(_region_cell, cells, chunksize=4))
    else:
        results = dict(map(_region_cell, cells))

    entries: dict[tuple[float, float], AdvantageReport] = {}
    for i, args in enumerate(cells):
        _, _, d, b = args[0], args[1], args[2], args[3]
        entries[(d, b)] = results[i]

    boundary = 0.0
    for d in distances:
        if all(entries[(float(d), float(b))].bit_equivalent for b in ber_grid):
            boundary = max(boundary, float(d))
    return RegionMap(
        entries=entries, boundary_m=boundary,
        distances=tuple(float(d) for d in distances),
        bers=tuple(float(b) for b in ber_grid), n_b=n_b, nlos_db=nlos_db,
    )


def framelen_sweep(distance_m: float, n_b_list: list[int], params: ChannelParams,
                   target_ber: float, model: AttackerModel, *, nlos_db: float = 0.0,
                   trials: int = 2000, seed: int = 1) -> list[tuple[int, float]]:
    """Advantage as a function of frame length at a fixed distance."""
    if list(n_b_list) != sorted(n_b_list):
        raise ConfigError("frame lengths must be increasing")
    out = []
    for i, n_b in enumerate(n_b_list):
        rep = cell_report(params, distance_m, target_ber, nlos_db, int(n_b), model,
                          trials, seed, cell_index=10_000 + i)
        out.append((int(n_b), rep.advantage))
    return out


def qq_data(samples: np.ndarray) -> QQData:
    """Order statistics paired with standard normal quantiles.

    Samples are standardized by their own mean and SD; the correlation is
    computed over the 5th-95th percentile band of plotting positions
    (i - 0.5)/n.
    """
    s = np.asarray(samples, dtype=np.float64)
    if s.size < 1000:
        raise InsufficientDataError(f"need >= 1000 samples, got {s.size}")
    n = s.size
    emp = np.sort(s)
    emp = (emp - emp.mean()) / emp.std(ddof=1)
    positions = (np.arange(1, n + 1) - 0.5) / n
    theo = ndtri(positions)
    central = (positions >= 0.05) & (positions <= 0.95)
    corr = float(np.corrcoef(theo[central], emp[central])[0, 1])
    return QQData(pairs=np.column_stack([theo, emp]), central_correlation=corr)
