"""Key generation and code generation for the variance-based scheme.

A message is repetition-coded into a polarity frame (bit 1 -> +1 symbol,
bit 0 -> -1 symbol, each repeated `n_ppb` times) and masked pulse-by-pulse
with a secret +/-1 sequence. The mask alphabet makes XOR an elementwise
sign multiplication, so amplitudes stay physical (sqrt-watts) end to end.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigError",
    "DegenerateFrameError",
    "KeyMaterial",
    "Message",
    "ModulationConfig",
    "PulseFrame",
    "XorSequence",
    "gen_key",
    "expand_xor_sequence",
    "random_xor_sequence",
    "encode_frame",
    "mtac_generate",
]

SUPPORTED_SECURITY_BITS = (128, 256)


class ConfigError(ValueError):
    """Invalid configuration or mismatched dimensions."""


class DegenerateFrameError(ValueError):
    """Input frame carries no energy; statistics are undefined."""


@dataclass(frozen=True)
class KeyMaterial:
    """Secret seed plus a per-frame freshness counter.

    The counter must strictly increase across frames under one key; use
    `next_frame()` rather than mutating.
    """

    seed: bytes
    counter: int = 0

    def __post_init__(self) -> None:
        if len(self.seed) * 8 not in SUPPORTED_SECURITY_BITS:
            raise ConfigError(f"seed must be 16 or 32 bytes, got {len(self.seed)}")
        if self.counter < 0:
            raise ConfigError("counter must be non-negative")

    @property
    def security_bits(self) -> int:
        return len(self.seed) * 8

    def next_frame(self) -> "KeyMaterial":
        return KeyMaterial(self.seed, self.counter + 1)


@dataclass(frozen=True)
class Message:
    """A frame payload of n_b bits, each 0 or 1."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) < 1:
            raise ConfigError("message must carry at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ConfigError("message bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    @classmethod
    def random(cls, n_b: int, rng: np.random.Generator) -> "Message":
        return cls(tuple(int(b) for b in rng.integers(0, 2, size=n_b)))


@dataclass(frozen=True)
class ModulationConfig:
    """Pulses per bit, bits per frame, nominal transmit amplitude (sqrt-watts)."""

    n_ppb: int
    n_b: int
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.n_ppb < 1:
            raise ConfigError("n_ppb must be >= 1")
        if self.n_b < 1:
            raise ConfigError("n_b must be >= 1")
        if not self.amplitude > 0:
            raise ConfigError("amplitude must be positive")

    @property
    def n_p(self) -> int:
        return self.n_ppb * self.n_b


@dataclass(frozen=True)
class XorSequence:
    """Secret polarity mask of length n_p with values in {-1, +1}."""

    mask: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mask, dtype=np.int8)
        if m.ndim != 1 or m.size < 1:
            raise ConfigError("mask must be a non-empty 1-D sequence")
        if not np.all(np.abs(m) == 1):
            raise ConfigError("mask values must be -1 or +1")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    def __len__(self) -> int:
        return self.mask.size


@dataclass(frozen=True)
class PulseFrame:
    """Sample amplitudes of one frame at the point of measurement.

    Transmit-side frames have every sample at exactly +/- the nominal
    amplitude (equal-power pulses); received frames are real-valued.
    """

    samples: np.ndarray
    amplitude_unit: str = field(default="sqrt_watt")

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.size < 1:
            raise ConfigError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(s)):
            raise ConfigError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def energy(self) -> float:
        return float(np.dot(self.samples, self.samples))


def gen_key(security_param_bits: int, entropy: bytes) -> KeyMaterial:
    """Derive key material from caller-supplied entropy.

    Deterministic in `entropy`; distinct entropy gives distinct keys.
    """
    if security_param_bits not in SUPPORTED_SECURITY_BITS:
        raise ConfigError(
            f"security parameter must be one of {SUPPORTED_SECURITY_BITS}, "
            f"got {security_param_bits}"
        )
    n_bytes = security_param_bits // 8
    if len(entropy) < n_bytes:
        raise ConfigError(f"need at least {n_bytes} bytes of entropy, got {len(entropy)}")
    return KeyMaterial(seed=bytes(entropy[:n_bytes]), counter=0)


def expand_xor_sequence(key: KeyMaterial, n_p: int) -> XorSequence:
    """Expand (seed, counter) into the +/-1 mask of length n_p.

    SHAKE-256 over seed || counter acts as the keyed stream expansion; the
    counter gives per-frame domain separation.
    """
    if n_p < 1:
        raise ConfigError("n_p must be >= 1")
    shake = hashlib.shake_256()
    shake.update(key.seed)
    shake.update(key.counter.to_bytes(8, "big"))
    raw = np.frombuffer(shake.digest((n_p + 7) // 8), dtype=np.uint8)
    bits = np.unpackbits(raw)[:n_p]
    return XorSequence(bits.astype(np.int8) * 2 - 1)


def random_xor_sequence(n_p: int, rng: np.random.Generator) -> XorSequence:
    """Ideal-randomness mask drawn from the trial RNG (idealized key sharing)."""
    if n_p < 1:
        raise ConfigError("n_p must be >= 1")
    return XorSequence(rng.integers(0, 2, size=n_p, dtype=np.int8) * 2 - 1)


def encode_frame(m: Message, cfg: ModulationConfig) -> PulseFrame:
    """Repetition-code a message into the unmasked polarity frame.

    Symbol i is constant across its n_ppb samples with sign 2*bit-1, scaled
    by the nominal amplitude.
    """
    if len(m) != cfg.n_b:
        raise ConfigError(f"message has {len(m)} bits, config expects {cfg.n_b}")
    polarity = np.asarray(m.bits, dtype=np.float64) * 2.0 - 1.0
    samples = np.repeat(polarity, cfg.n_ppb) * cfg.amplitude
    return PulseFrame(samples)


def mtac_generate(key: KeyMaterial, m: Message, cfg: ModulationConfig) -> PulseFrame:
    """Generate the masked code frame c = b (x) mask.

    XOR on the {-1,+1} alphabet is elementwise multiplication; applying the
    same mask again recovers the unmasked frame exactly.
    """
    b = encode_frame(m, cfg)
    x = expand_xor_sequence(key, cfg.n_p)
    return PulseFrame(b.samples * x.mask)
