import itertools
import math

import numpy as np
import pytest

from mtacsim.baseline import (
    ToleranceConfig,
    exact_guessing_advantage,
    kl_bernoulli,
    min_np_for_security,
    sanov_advantage,
    single_pulse_vrfy,
)
from mtacsim.codec import ConfigError, Message
from mtacsim.rngstream import substream


def test_kl_bernoulli_values():
    assert kl_bernoulli(0.5, 0.5) == 0.0
    # 1 - H2(0.2) = 0.278072 bits
    assert kl_bernoulli(0.8, 0.5) == pytest.approx(0.2781, abs=1e-4)
    rng = substream(30, 0)
    for _ in range(25):
        q = float(rng.uniform(0.01, 0.99))
        assert kl_bernoulli(q, q) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        kl_bernoulli(0.0, 0.5)
    with pytest.raises(ValueError):
        kl_bernoulli(0.5, 1.0)


def test_sanov_example_32_bits_with_116_pulses():
    assert min_np_for_security(32, 0.2) == 116
    assert sanov_advantage(116, 0.2) <= 2.0**-32
    assert math.log2(sanov_advantage(116, 0.2)) == pytest.approx(-32.26, abs=0.01)


def test_sanov_empty_code():
    assert sanov_advantage(0, 0.2) == 1.0


def test_sanov_exponent_linearity():
    for n, t in ((10, 0.1), (40, 0.25), (64, 0.3)):
        assert sanov_advantage(2 * n, t) == pytest.approx(sanov_advantage(n, t) ** 2,
                                                          rel=1e-9)


def test_min_np_limits_and_monotonicity():
    # KL -> 1 bit as tolerance -> 0, so n_p -> target
    assert min_np_for_security(32, 1e-15) == 32
    values = [min_np_for_security(32, t) for t in (0.05, 0.1, 0.2, 0.3, 0.4)]
    assert values == sorted(values)
    with pytest.raises(ValueError):
        min_np_for_security(32, 0.5)


def test_min_np_round_trip_bound():
    for b in (8, 16, 32, 64):
        for t in (0.1, 0.2, 0.3):
            n = min_np_for_security(b, t)
            assert sanov_advantage(n, t) <= 2.0**-b


def test_single_pulse_vrfy_identity():
    cfg = ToleranceConfig(0.2, 16)
    m = Message((0, 1) * 8)
    assert single_pulse_vrfy(m, m, cfg) == 1


def test_single_pulse_vrfy_boundary():
    # floor(0.2 * 116) = 23 errors accepted, 24 rejected
    cfg = ToleranceConfig(0.2, 116)
    m = Message((0,) * 116)
    accept = Message((1,) * 23 + (0,) * 93)
    reject = Message((1,) * 24 + (0,) * 92)
    assert single_pulse_vrfy(m, accept, cfg) == 1
    assert single_pulse_vrfy(m, reject, cfg) == 0


def test_single_pulse_vrfy_length_mismatch():
    cfg = ToleranceConfig(0.2, 8)
    with pytest.raises(ConfigError):
        single_pulse_vrfy(Message((0,) * 8), Message((0,) * 7), cfg)


def test_single_pulse_guessing_never_accepted_at_116():
    # acceptance probability is below 2^-32, so 1e6 uniform guesses all fail
    cfg = ToleranceConfig(0.2, 116)
    rng = substream(31, 0)
    m_bits = rng.integers(0, 2, 116)
    guesses = rng.integers(0, 2, size=(1_000_000, 116))
    errors = (guesses != m_bits[None, :]).sum(axis=1)
    assert int((errors <= cfg.max_errors).sum()) == 0


@pytest.mark.parametrize("n_p", [8, 12, 16, 20, 24])
@pytest.mark.parametrize("t_ber", [0.1, 0.2, 0.3])
def test_exhaustive_guessing_mass_below_sanov_times_np(n_p, t_ber):
    # exact enumeration over all 2^n_p outcomes: acceptance mass never
    # exceeds the Sanov estimate by more than the polynomial factor n_p
    allowed = math.floor(t_ber * n_p)
    mass = sum(math.comb(n_p, j) for j in range(allowed + 1)) / 2.0**n_p
    assert mass == pytest.approx(exact_guessing_advantage(n_p, t_ber), rel=1e-12)
    assert mass <= sanov_advantage(n_p, t_ber) * n_p


def test_exact_advantage_matches_direct_enumeration_small():
    # brute force over every guess for a tiny code
    n_p, t_ber = 10, 0.2
    cfg = ToleranceConfig(t_ber, n_p)
    m = Message((0,) * n_p)
    accepted = sum(
        single_pulse_vrfy(m, Message(bits), cfg)
        for bits in itertools.product((0, 1), repeat=n_p)
    )
    assert accepted / 2.0**n_p == pytest.approx(exact_guessing_advantage(n_p, t_ber),
                                                rel=1e-12)


def test_tolerance_config_validation():
    with pytest.raises(ConfigError):
        ToleranceConfig(0.5, 10)
    with pytest.raises(ConfigError):
        ToleranceConfig(0.2, 0)
