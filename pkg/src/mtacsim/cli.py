"""Campaign driver: one subcommand per experiment, deterministic CSV output.

Precedence is flags > config file > defaults. Every run writes one CSV plus
a sidecar metadata file (config hash, seed, tool version); identical
(config, seed) pairs produce byte-identical CSVs. Files appear atomically
via write-then-rename. Exit codes: 0 ok, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import AttackerModel, continued_interference_sim
from .baseline import exact_guessing_advantage, kl_bernoulli, min_np_for_security, sanov_advantage
from .channel import (
    ChannelParams,
    PerformanceLevel,
    distance_for_snr,
    log_distance_grid,
    required_nppb,
    snr_per_pulse,
)
from .codec import ConfigError, KeyMaterial, ModulationConfig
from .games import (
    GameConfig,
    GameEnv,
    UnbiasedAnnihilator,
    UnbiasedGuessAttacker,
    attacker_stats_at,
    framelen_sweep,
    gaussian_advantage,
    legit_stats_at,
    qq_data,
    region_map,
    run_mtac_a_trial,
    run_mtac_d_trial,
)
from .montecarlo import attack_distortion_samples, legit_distortion_samples
from .projection import pwin_sim
from .receiver import frame_error_rate, threshold_for_level
from .rngstream import substream
from .pipeline import pipeline_ber

THREADS_ENV_VAR = "MTACSIM_THREADS"

SUBCOMMANDS = (
    "ber-sweep",
    "nppb-map",
    "distortion-stats",
    "region",
    "game-a",
    "game-d",
    "framelen",
    "qq",
    "sanov",
    "projection",
    "continued-interference",
)


@dataclass(frozen=True)
class CampaignConfig:
    """Fully resolved configuration of one campaign run."""

    channel: ChannelParams = field(default_factory=ChannelParams)
    modulation: ModulationConfig = field(default_factory=lambda: ModulationConfig(16, 32))
    attacker: AttackerModel = field(default_factory=lambda: AttackerModel("ideal_bias", rho=0.2))
    max_ber: float = 1e-2
    max_distance_m: float = 400.0
    max_attenuation_db: float = 0.0
    ber_grid: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-6)
    points_per_decade: int = 32
    trials: int = 2000
    seed: int = 1
    output_dir: str = "out"
    threads: int = 1
    # per-subcommand scalars, overridable by flags
    distance_m: float = 200.0
    target_ber: float = 1e-3
    bits: int = 32
    rho: float = 0.2
    t_ber: float = 0.2
    n_proj: int = 128
    mode: str = "unmatched"
    snr_db: float = 0.0
    samples: int = 10_000

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def _config_from_dict(raw: dict) -> CampaignConfig:
    kwargs: dict = {}
    if "channel" in raw:
        kwargs["channel"] = ChannelParams(**raw["channel"])
    if "modulation" in raw:
        kwargs["modulation"] = ModulationConfig(**raw["modulation"])
    if "attacker" in raw:
        kwargs["attacker"] = AttackerModel(**raw["attacker"])
    for key in ("max_ber", "max_distance_m", "max_attenuation_db", "points_per_decade",
                "trials", "seed", "output_dir", "threads", "distance_m", "target_ber",
                "bits", "rho", "t_ber", "n_proj", "mode", "snr_db", "samples"):
        if key in raw:
            kwargs[key] = raw[key]
    if "ber_grid" in raw:
        kwargs["ber_grid"] = tuple(raw["ber_grid"])
    unknown = set(raw) - set(kwargs) - {"channel", "modulation", "attacker", "ber_grid"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    return CampaignConfig(**kwargs)


def load_config(path: str | None, overrides: dict) -> CampaignConfig:
    raw: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    cfg = _config_from_dict(raw)
    clean = {k: v for k, v in overrides.items() if v is not None}
    if clean:
        cfg = replace(cfg, **clean)
    return cfg


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _config_hash(config: CampaignConfig) -> str:
    canon = json.dumps(asdict(config), sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ConfigError(f"row width {len(row)} does not match header {len(header)}")
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_sidecar(path: Path, subcommand: str, config: CampaignConfig) -> None:
    meta = {
        "subcommand": subcommand,
        "config_hash": _config_hash(config),
        "seed": config.seed,
        "tool_version": __version__,
    }
    _atomic_write(path, json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _log2_floor(p: float) -> float:
    return math.log2(max(p, 1e-300))


# --- subcommand implementations -------------------------------------------

CSV_SCHEMAS = {
    "ber-sweep": ["n_ppb", "snr_per_pulse_db", "bits", "errors", "ber_mc", "ber_model"],
    "nppb-map": ["distance_m", "target_ber", "nlos_db", "n_ppb"],
    "distortion-stats": ["distance_m", "target_ber", "n_ppb", "mu_lgt", "sigma_lgt",
                         "threshold", "mu_att", "sigma_att"],
    "region": ["distance_m", "target_ber", "mu_att", "sigma_att", "mu_lgt",
               "sigma_lgt", "fnr", "advantage_log2", "bit_equivalent"],
    "game-a": ["trials", "wins", "win_rate", "alpha", "delta", "n_ppb", "n_b",
               "threshold", "estimable"],
    "game-d": ["trials", "wins", "win_rate", "alpha", "n_ppb", "n_b"],
    "framelen": ["n_b", "distance_m", "target_ber", "advantage_log2"],
    "qq": ["kind", "distance_m", "theoretical_quantile", "empirical_quantile",
           "central_correlation"],
    "sanov": ["target_bits", "t_ber", "n_p", "kl_bits", "sanov_advantage_log2",
              "exact_advantage_log2"],
    "projection": ["n_b", "mode", "n_proj", "snr_db", "p_win", "fpr"],
    "continued-interference": ["interference_count", "mean", "var_median", "var_p001"],
}


def _cmd_ber_sweep(config: CampaignConfig):
    header = CSV_SCHEMAS["ber-sweep"]
    rows = []
    for i, n_ppb in enumerate((1, 4, 16, 64)):
        for j, snr_db in enumerate((-9.0, 0.0, 6.0)):
            errors, bits, model = pipeline_ber(
                config.channel, n_ppb, snr_db, max(config.trials, 100_000),
                seed=config.seed, stream_key=(i, j))
            rows.append((n_ppb, snr_db, bits, errors, errors / bits, model))
    return header, rows, None


def _cmd_nppb_map(config: CampaignConfig):
    header = CSV_SCHEMAS["nppb-map"]
    rows = []
    for ber in config.ber_grid:
        for d in log_distance_grid(config.max_distance_m, config.points_per_decade):
            level = PerformanceLevel(float(d), float(ber), config.max_attenuation_db)
            rows.append((float(d), float(ber), config.max_attenuation_db,
                         required_nppb(level, config.channel)))
    return header, rows, None


def _cmd_distortion_stats(config: CampaignConfig):
    header = CSV_SCHEMAS["distortion-stats"]
    rows = []
    nlos = config.max_attenuation_db
    for i, d in enumerate(log_distance_grid(config.max_distance_m, 8)):
        level = PerformanceLevel(float(d), config.target_ber, nlos)
        mod = ModulationConfig(required_nppb(level, config.channel), config.bits)
        mu_l, sig_l = legit_stats_at(mod, config.channel, float(d), nlos,
                                     config.trials, substream(config.seed, i, 0))
        thr = threshold_for_level(level, (mu_l, sig_l), config.bits)
        mu_a, sig_a = attacker_stats_at(mod, config.channel, float(d), nlos,
                                        config.attacker, config.trials,
                                        substream(config.seed, i, 1))
        rows.append((float(d), config.target_ber, mod.n_ppb, mu_l, sig_l, thr,
                     mu_a, sig_a))
    return header, rows, None


def _cmd_region(config: CampaignConfig):
    header = CSV_SCHEMAS["region"]
    rmap = region_map(
        config.channel, config.bits, config.attacker,
        max_distance_m=config.max_distance_m, nlos_db=config.max_attenuation_db,
        ber_grid=config.ber_grid, points_per_decade=config.points_per_decade,
        trials=config.trials, seed=config.seed, threads=config.threads,
    )
    rows = []
    for ber in rmap.bers:
        for d in rmap.distances:
            r = rmap.entries[(d, ber)]
            rows.append((d, ber, r.mu_att, r.sigma_att, r.mu_lgt, r.sigma_lgt,
                         r.fnr_target, _log2_floor(r.advantage), r.bit_equivalent))
    return header, rows, f"boundary_m={rmap.boundary_m:.17g}"


def _game_env(config: CampaignConfig, noiseless: bool) -> GameEnv:
    level = None
    if not noiseless:
        level = PerformanceLevel(config.distance_m, config.target_ber,
                                 config.max_attenuation_db)
    mod = config.modulation
    key = KeyMaterial(hashlib.sha256(str(config.seed).encode()).digest()[:16])
    if level is not None:
        mu, sigma = legit_stats_at(mod, config.channel, level.distance_m,
                                   level.nlos_attenuation_db, config.trials,
                                   substream(config.seed, 90))
        thr = threshold_for_level(level, (mu, sigma), mod.n_b)
    else:
        thr = 0.5
    return GameEnv(cfg=mod, params=config.channel, key=key, threshold=thr, level=level)


def _cmd_game_a(config: CampaignConfig):
    header = CSV_SCHEMAS["game-a"]
    env = _game_env(config, noiseless=True)
    game = GameConfig()
    attacker = UnbiasedGuessAttacker(env.cfg.amplitude)
    rng = substream(config.seed, 91)
    wins = sum(run_mtac_a_trial(attacker, game, env, rng) for _ in range(config.trials))
    rate = wins / config.trials
    rows = [(config.trials, wins, rate, game.alpha, game.delta, env.cfg.n_ppb,
             env.cfg.n_b, env.threshold, int(wins >= 10))]
    return header, rows, f"win_rate={rate:.6g}"


def _cmd_game_d(config: CampaignConfig):
    header = CSV_SCHEMAS["game-d"]
    env = _game_env(config, noiseless=True)
    attacker = UnbiasedAnnihilator(env.cfg.amplitude)
    rng = substream(config.seed, 92)
    wins = sum(run_mtac_d_trial(attacker, 0, env, rng) for _ in range(config.trials))
    rate = wins / config.trials
    rows = [(config.trials, wins, rate, 0, env.cfg.n_ppb, env.cfg.n_b)]
    return header, rows, f"win_rate={rate:.6g}"


def _cmd_framelen(config: CampaignConfig):
    header = CSV_SCHEMAS["framelen"]
    curve = framelen_sweep(config.distance_m, [8, 16, 32, 64], config.channel,
                           config.target_ber, config.attacker,
                           nlos_db=config.max_attenuation_db,
                           trials=config.trials, seed=config.seed)
    rows = [(n_b, config.distance_m, config.target_ber, _log2_floor(adv))
            for n_b, adv in curve]
    return header, rows, None


def _cmd_qq(config: CampaignConfig):
    header = CSV_SCHEMAS["qq"]
    nlos = config.max_attenuation_db
    level = PerformanceLevel(config.distance_m, config.target_ber, nlos)
    mod = ModulationConfig(required_nppb(level, config.channel), config.bits)
    n = max(config.samples, 1000)

    snr_l = snr_per_pulse(config.channel, level.distance_m, nlos)
    d_lgt = legit_distortion_samples(mod, snr_l, n, substream(config.seed, 93))
    snr_a = snr_per_pulse(config.channel, level.distance_m / 2.0, nlos)
    d_att = attack_distortion_samples(mod, snr_a, config.attacker.kind,
                                      config.attacker.rho, n,
                                      substream(config.seed, 94),
                                      granted=config.attacker.grant_bits)
    rows = []
    for kind, dist, samples in (("lgt", level.distance_m, d_lgt),
                                ("att", level.distance_m / 2.0, d_att)):
        qq = qq_data(samples)
        for theo, emp in qq.pairs:
            rows.append((kind, dist, theo, emp, qq.central_correlation))
    return header, rows, None


def _cmd_sanov(config: CampaignConfig):
    header = CSV_SCHEMAS["sanov"]
    n_p = min_np_for_security(config.bits, config.t_ber)
    kl = kl_bernoulli(1.0 - config.t_ber, 0.5)
    rows = [(config.bits, config.t_ber, n_p, kl,
             _log2_floor(sanov_advantage(n_p, config.t_ber)),
             _log2_floor(exact_guessing_advantage(n_p, config.t_ber)))]
    return header, rows, str(n_p)


def _cmd_projection(config: CampaignConfig):
    header = CSV_SCHEMAS["projection"]
    modes = [config.mode] if config.mode in ("matched", "unmatched") else \
        ["matched", "unmatched"]
    rows = []
    for k, mode in enumerate(modes):
        points = pwin_sim([2, 4, 8, 16, 32], config.n_proj, mode, config.snr_db,
                          config.trials, substream(config.seed, 95, k))
        rows.extend((p.n_b, p.mode, p.n_proj, p.snr_db, p.p_win, p.fpr)
                    for p in points)
    return header, rows, None


def _cmd_continued_interference(config: CampaignConfig):
    header = CSV_SCHEMAS["continued-interference"]
    curve = continued_interference_sim(config.attacker, config.modulation.n_p,
                                       max(config.trials, 10_000),
                                       substream(config.seed, 96))
    rows = [
        (int(k), float(m), float(v), float(p))
        for k, m, v, p in zip(curve.interference_count, curve.mean,
                              curve.var_median, curve.var_p001)
    ]
    return header, rows, None


_DISPATCH = {
    "ber-sweep": _cmd_ber_sweep,
    "nppb-map": _cmd_nppb_map,
    "distortion-stats": _cmd_distortion_stats,
    "region": _cmd_region,
    "game-a": _cmd_game_a,
    "game-d": _cmd_game_d,
    "framelen": _cmd_framelen,
    "qq": _cmd_qq,
    "sanov": _cmd_sanov,
    "projection": _cmd_projection,
    "continued-interference": _cmd_continued_interference,
}


def run_subcommand(name: str, config: CampaignConfig) -> Path:
    """Run one experiment and write its CSV + metadata; returns the CSV path."""
    if name not in _DISPATCH:
        raise ConfigError(f"unknown subcommand {name!r}")
    header, rows, message = _DISPATCH[name](config)
    out_dir = Path(config.output_dir)
    csv_path = out_dir / f"{name.replace('-', '_')}.csv"
    write_csv(csv_path, header, rows)
    write_sidecar(csv_path.with_suffix(".meta.json"), name, config)
    if message is not None:
        print(message)
    return csv_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtacsim",
        description="Pulse-level time-of-arrival code simulation campaigns",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    default_threads = os.environ.get(THREADS_ENV_VAR)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--out", type=str, default=None, dest="output_dir")
        p.add_argument("--threads", type=int,
                       default=int(default_threads) if default_threads else None)
        p.add_argument("--distance", type=float, default=None, dest="distance_m")
        p.add_argument("--ber", type=float, default=None, dest="target_ber")
        p.add_argument("--bits", type=int, default=None)
        p.add_argument("--rho", type=float, default=None)
        p.add_argument("--tber", type=float, default=None, dest="t_ber")
        p.add_argument("--nproj", type=int, default=None, dest="n_proj")
        p.add_argument("--mode", type=str, default=None,
                       choices=("matched", "unmatched", "both"))
        p.add_argument("--max-distance", type=float, default=None, dest="max_distance_m")
        p.add_argument("--nlos", type=float, default=None, dest="max_attenuation_db")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {
        k: v for k, v in vars(args).items()
        if k not in ("subcommand", "config") and v is not None
    }
    try:
        config = load_config(args.config, overrides)
        if args.subcommand in ("game-a", "game-d", "continued-interference") \
                and overrides.get("rho") is not None:
            config = replace(config, attacker=AttackerModel("ideal_bias", rho=args.rho))
        run_subcommand(args.subcommand, config)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
