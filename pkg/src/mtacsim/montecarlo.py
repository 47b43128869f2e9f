"""Vectorized Monte-Carlo samplers for distortion statistics.

The samplers exploit two exact symmetries of the masked modulation so that
campaigns run on (trials x n_p) matrices instead of per-frame objects:

* mask symmetry: with an i.i.d. +/-1 mask and symmetric noise, the joint
  distribution of (detected bits vs truth, equivalent pulse train) is the
  same as for the all-ones message under the all-ones mask;
* rectification: summing the equivalent pulse train within a symbol and
  flipping it by the detected bit is the same as taking |symbol sum|.

Noise is normalized to unit variance; signals carry sqrt(SNR) amplitude.
Unit tests pin these kernels against the per-frame receiver operations.
"""

from __future__ import annotations

import numpy as np

from .codec import ModulationConfig

__all__ = [
    "legit_distortion_samples",
    "attack_distortion_samples",
    "correctness_pattern",
    "nonideal_chain",
]

_CHUNK_ELEMENTS = 1 << 24


def _chunks(trials: int, n_p: int):
    step = max(1, _CHUNK_ELEMENTS // max(1, n_p))
    done = 0
    while done < trials:
        take = min(step, trials - done)
        yield take
        done += take


def _distortion_detected(w: np.ndarray, n_ppb: int) -> np.ndarray:
    """D for pulse matrices verified against the detected-bit template."""
    trials, n_p = w.shape
    n_b = n_p // n_ppb
    sym = w.reshape(trials, n_b, n_ppb).sum(axis=2)
    mean = np.abs(sym).sum(axis=1) / n_p
    total = np.einsum("ij,ij->i", w, w)
    return 1.0 - n_p * mean**2 / total


def _distortion_granted(w: np.ndarray) -> np.ndarray:
    """D for pulse matrices verified against the true template."""
    n_p = w.shape[1]
    mean = w.mean(axis=1)
    total = np.einsum("ij,ij->i", w, w)
    return 1.0 - n_p * mean**2 / total


def legit_distortion_samples(cfg: ModulationConfig, snr: float, trials: int,
                             rng: np.random.Generator) -> np.ndarray:
    """Distortion of legitimate frames at per-pulse SNR `snr` (linear)."""
    a = np.sqrt(snr)
    out = np.empty(trials)
    pos = 0
    for take in _chunks(trials, cfg.n_p):
        w = rng.standard_normal((take, cfg.n_p))
        w += a
        out[pos:pos + take] = _distortion_detected(w, cfg.n_ppb)
        pos += take
    return out


def nonideal_chain(trials: int, n_p: int, rng: np.random.Generator) -> np.ndarray:
    """Correctness of a guesser that is never wrong twice in a row.

    A raw fair guess that would repeat a mistake is resampled, which makes
    the realized mistakes the odd positions inside each run of raw
    would-be mistakes.
    """
    wants_wrong = rng.integers(0, 2, size=(trials, n_p), dtype=np.int8)
    idx = np.arange(n_p)
    last_ok = np.maximum.accumulate(np.where(wants_wrong == 0, idx, -1), axis=1)
    pos_in_run = idx - last_ok
    wrong = (wants_wrong == 1) & (pos_in_run % 2 == 1)
    return np.where(wrong, -1, 1).astype(np.int8)


def correctness_pattern(kind: str, rho: float, n_p: int, trials: int,
                        rng: np.random.Generator, shuffle: bool) -> np.ndarray:
    """Per-pulse correctness (+1 match / -1 mismatch) for a guessing strategy."""
    if kind == "unbiased":
        return (rng.integers(0, 2, size=(trials, n_p), dtype=np.int8) * 2 - 1)
    if kind == "ideal_bias":
        known = int(np.floor(rho * n_p))
        c = np.empty((trials, n_p), dtype=np.int8)
        c[:, :known] = 1
        c[:, known:] = rng.integers(0, 2, size=(trials, n_p - known), dtype=np.int8) * 2 - 1
        if shuffle and 0 < known < n_p:
            c = rng.permuted(c, axis=1)
        return c
    if kind == "non_ideal_bias":
        return nonideal_chain(trials, n_p, rng)
    raise ValueError(f"unknown guessing strategy {kind!r}")


def attack_distortion_samples(cfg: ModulationConfig, snr: float, kind: str, rho: float,
                              trials: int, rng: np.random.Generator,
                              granted: bool = True) -> np.ndarray:
    """Distortion of attack frames arriving at per-pulse SNR `snr`.

    `granted` verifies against the true template (bit level conceded to the
    attacker); otherwise the detected-bit template is used.
    """
    a = np.sqrt(snr)
    out = np.empty(trials)
    pos = 0
    for take in _chunks(trials, cfg.n_p):
        c = correctness_pattern(kind, rho, cfg.n_p, take, rng, shuffle=not granted)
        w = rng.standard_normal((take, cfg.n_p))
        w += a * c
        if granted:
            out[pos:pos + take] = _distortion_granted(w)
        else:
            out[pos:pos + take] = _distortion_detected(w, cfg.n_ppb)
        pos += take
    return out
