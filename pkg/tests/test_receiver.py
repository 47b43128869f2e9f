import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtacsim.channel import (
    ChannelParams,
    PerformanceLevel,
    PerformanceRegion,
    apply_channel,
    distance_for_snr,
    q_func,
    required_nppb,
    snr_per_pulse,
)
from mtacsim.codec import (
    ConfigError,
    DegenerateFrameError,
    KeyMaterial,
    Message,
    ModulationConfig,
    PulseFrame,
    XorSequence,
    encode_frame,
    expand_xor_sequence,
    gen_key,
    mtac_generate,
    random_xor_sequence,
)
from mtacsim.receiver import (
    Template,
    build_template,
    detect_bits,
    distortion,
    effective_threshold,
    frame_error_rate,
    legit_distortion_stats,
    threshold_for_level,
    vrfy,
    vrfy_with_mask,
)
from mtacsim.rngstream import substream

PARAMS = ChannelParams()


def _legit_frame_pipeline(level, cfg, key, m, rng):
    tx = mtac_generate(key, m, cfg)
    return apply_channel(tx, level, PARAMS, rng)


def test_detect_bits_noiseless_identity():
    cfg = ModulationConfig(8, 16)
    key = gen_key(128, b"r" * 16)
    m = Message.random(16, substream(2, 0))
    c = mtac_generate(key, m, cfg)
    assert detect_bits(c, expand_xor_sequence(key, cfg.n_p), cfg) == m


def test_detect_bits_negated_frame_complements():
    cfg = ModulationConfig(4, 8)
    key = gen_key(128, b"s" * 16)
    m = Message.random(8, substream(2, 1))
    c = mtac_generate(key, m, cfg)
    flipped = detect_bits(PulseFrame(-c.samples), expand_xor_sequence(key, cfg.n_p), cfg)
    assert flipped.bits == tuple(1 - b for b in m.bits)


def test_detect_bits_tie_resolves_to_zero():
    cfg = ModulationConfig(2, 1)
    x = XorSequence(np.array([1, 1], dtype=np.int8))
    frame = PulseFrame(np.array([1.0, -1.0]))
    assert detect_bits(frame, x, cfg).bits == (0,)


def test_detect_bits_mc_ber_matches_closed_form():
    # symbol SNR 9.55 (the 1e-3 operating point) over 1e5 bits, 3 binomial SE
    cfg = ModulationConfig(1, 1000)
    snr = 9.549
    d = distance_for_snr(PARAMS, snr)
    level = PerformanceLevel(d, 0.49)
    rng = substream(77, 0)
    errors = 0
    bits = 0
    for i in range(100):
        key = KeyMaterial(b"berpoint12345678", i)
        m = Message.random(cfg.n_b, rng)
        rx = _legit_frame_pipeline(level, cfg, key, m, rng)
        got = detect_bits(rx, expand_xor_sequence(key, cfg.n_p), cfg)
        errors += sum(a != b for a, b in zip(m.bits, got.bits))
        bits += cfg.n_b
    p = q_func(math.sqrt(snr))
    se = math.sqrt(p * (1 - p) / bits)
    assert abs(errors / bits - p) <= 3 * se


def test_build_template_matches_transmitted_polarities():
    cfg = ModulationConfig(8, 4)
    key = gen_key(128, b"t" * 16)
    m = Message.random(4, substream(3, 0))
    c = mtac_generate(key, m, cfg)
    t = build_template(m, expand_xor_sequence(key, cfg.n_p), cfg)
    assert np.array_equal(t.expected.astype(float), np.sign(c.samples))


def test_build_template_identity_mask():
    cfg = ModulationConfig(2, 3)
    x = XorSequence(np.ones(6, dtype=np.int8))
    m = Message((1, 0, 1))
    t = build_template(m, x, cfg)
    assert np.array_equal(t.expected.astype(float), encode_frame(m, cfg).samples)


def test_build_template_single_bit_flip_locality():
    cfg = ModulationConfig(8, 4)
    x = random_xor_sequence(cfg.n_p, substream(3, 1))
    m = Message((0, 1, 1, 0))
    m2 = Message((0, 1, 0, 0))
    t1 = build_template(m, x, cfg)
    t2 = build_template(m2, x, cfg)
    assert int((t1.expected != t2.expected).sum()) == cfg.n_ppb


def test_distortion_zero_for_noiseless_legit():
    cfg = ModulationConfig(8, 8)
    key = gen_key(128, b"u" * 16)
    m = Message.random(8, substream(4, 0))
    c = mtac_generate(key, m, cfg)
    t = build_template(m, expand_xor_sequence(key, cfg.n_p), cfg)
    assert distortion(c, t).distortion == pytest.approx(0.0, abs=1e-15)


def test_distortion_pure_noise_near_one():
    rng = substream(4, 1)
    n_p = 512
    frame = PulseFrame(rng.standard_normal(n_p))
    t = Template(np.where(rng.integers(0, 2, n_p) > 0, 1, -1).astype(np.int8))
    d = distortion(frame, t).distortion
    assert 1 - 5 / math.sqrt(n_p) <= d <= 1.0


def test_distortion_half_flipped_polarities_is_one():
    # balanced +/-a equivalent pulse train: mean 0, residual power = total
    n_p = 64
    samples = np.ones(n_p)
    t = Template(np.array([1, -1] * (n_p // 2), dtype=np.int8))
    assert distortion(PulseFrame(samples), t).distortion == pytest.approx(1.0, abs=1e-12)


def test_distortion_scale_invariance():
    rng = substream(4, 2)
    frame = rng.standard_normal(256) + 1.2
    t = Template(np.where(rng.integers(0, 2, 256) > 0, 1, -1).astype(np.int8))
    base = distortion(PulseFrame(frame), t).distortion
    for alpha in (0.01, 3.0, 1e4):
        assert distortion(PulseFrame(alpha * frame), t).distortion == pytest.approx(base, rel=1e-12)


def test_distortion_rejects_degenerate_frame():
    t = Template(np.ones(4, dtype=np.int8))
    with pytest.raises(DegenerateFrameError):
        distortion(PulseFrame(np.zeros(4)), t)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 10.0))
def test_distortion_bounded_unit_interval(seed, scale):
    rng = substream(seed, 5)
    frame = PulseFrame(scale * rng.standard_normal(128) + rng.normal())
    t = Template(np.where(rng.integers(0, 2, 128) > 0, 1, -1).astype(np.int8))
    d = distortion(frame, t).distortion
    assert -1e-9 <= d <= 1.0 + 1e-9


def test_distortion_report_consistency():
    rng = substream(4, 3)
    frame = PulseFrame(rng.standard_normal(100) + 2.0)
    t = Template(np.ones(100, dtype=np.int8))
    rep = distortion(frame, t)
    assert rep.distortion == pytest.approx(rep.residual_power / rep.total_power, rel=1e-12)
    assert rep.equivalent_pulse_mean == pytest.approx(frame.samples.mean(), rel=1e-12)


def test_legit_stats_noiseless_limit():
    params = ChannelParams(noise_psd_dbm_per_hz=-1000.0)
    level = PerformanceLevel(10.0, 1e-3)
    cfg = ModulationConfig(4, 8)
    snr = snr_per_pulse(params, 10.0)
    assert snr > 1e20
    mu, sigma = legit_distortion_stats(level, cfg, params, 1000, substream(5, 0))
    assert mu == pytest.approx(0.0, abs=1e-12)
    assert sigma == pytest.approx(0.0, abs=1e-12)


def test_legit_stats_match_full_object_pipeline():
    # kernel-based stats against the per-frame operation pipeline (independent route)
    level = PerformanceLevel(distance_for_snr(PARAMS, 1.0), 1e-3)
    cfg = ModulationConfig(16, 32)
    mu, sigma = legit_distortion_stats(level, cfg, PARAMS, 4000, substream(5, 1))

    rng = substream(5, 2)
    samples = []
    for i in range(800):
        key = KeyMaterial(b"oracle-route-keyA"[:16], i)
        m = Message.random(cfg.n_b, rng)
        rx = _legit_frame_pipeline(level, cfg, key, m, rng)
        x = expand_xor_sequence(key, cfg.n_p)
        m_prime = detect_bits(rx, x, cfg)
        samples.append(distortion(rx, build_template(m_prime, x, cfg)).distortion)
    mu_oracle = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
    assert abs(mu - mu_oracle) <= 4 * se
    # noise-fraction first-order model at SNR/pulse = 0 dB
    assert mu == pytest.approx(0.5, rel=0.05)


def test_legit_stats_standard_error_scaling():
    level = PerformanceLevel(100.0, 1e-3)
    cfg = ModulationConfig(19, 32)
    reps_small = [legit_distortion_stats(level, cfg, PARAMS, 250, substream(6, i))[0]
                  for i in range(40)]
    reps_big = [legit_distortion_stats(level, cfg, PARAMS, 1000, substream(7, i))[0]
                for i in range(40)]
    ratio = np.std(reps_small, ddof=1) / np.std(reps_big, ddof=1)
    assert ratio == pytest.approx(2.0, rel=0.35)


def test_threshold_for_level_quantile_arithmetic():
    level = PerformanceLevel(200.0, 1e-3)
    # FNR = 1 - 0.999^32 = 0.0315089, Qinv(FNR) = 1.85907
    assert frame_error_rate(1e-3, 32) == pytest.approx(0.0315089, abs=1e-6)
    t = threshold_for_level(level, (0.5, 0.1), 32)
    assert t == pytest.approx(0.5 + 1.8590655 * 0.1, abs=1e-6)


def test_threshold_for_level_degenerate_cases():
    level = PerformanceLevel(200.0, 1e-3)
    assert threshold_for_level(level, (0.4, 0.0), 32) == pytest.approx(0.4)
    half = PerformanceLevel(200.0, 0.499999999)
    # FNR -> 1 gives a degenerate threshold of 1
    assert threshold_for_level(half, (0.4, 0.1), 64) == 1.0


def test_threshold_fnr_half_is_mean():
    # FNR exactly 0.5 puts the threshold at the mean
    level = PerformanceLevel(10.0, 0.02142793791229991)  # 1-(1-ber)^32 = 0.5
    assert frame_error_rate(level.target_ber, 32) == pytest.approx(0.5, abs=1e-12)
    assert threshold_for_level(level, (0.37, 0.2), 32) == pytest.approx(0.37, abs=1e-9)


def test_effective_threshold_single_point():
    region = PerformanceRegion(1e-3, 200.0, 0.0,
                               (PerformanceLevel(200.0, 1e-3),))
    cfgd = effective_threshold(region, 32, PARAMS, 2000, substream(8, 0))
    assert cfgd.effective == list(cfgd.per_level.values())[0]


def test_effective_threshold_monotone_in_region():
    near = PerformanceRegion(1e-3, 100.0, 0.0,
                             (PerformanceLevel(50.0, 1e-3), PerformanceLevel(100.0, 1e-3)))
    far = PerformanceRegion(1e-3, 200.0, 0.0,
                            near.grid + (PerformanceLevel(200.0, 1e-3),))
    stats = {50.0: (0.2, 0.01), 100.0: (0.45, 0.012), 200.0: (0.8, 0.013)}

    def stats_fn(level, cfg):
        return stats[level.distance_m]

    t_near = effective_threshold(near, 32, PARAMS, 10, substream(8, 1), stats_fn=stats_fn)
    t_far = effective_threshold(far, 32, PARAMS, 10, substream(8, 2), stats_fn=stats_fn)
    assert t_far.effective >= t_near.effective


def test_effective_threshold_grid_refinement_stability():
    # refining the grid moves the maximum by less than the local spread of
    # neighboring per-level thresholds
    def smooth_stats(level, cfg):
        mu = 1.0 - 1.0 / (1.0 + snr_per_pulse(PARAMS, level.distance_m) / 4)
        return mu, 0.01

    coarse_d = np.geomspace(10, 200, 8)
    fine_d = np.geomspace(10, 200, 15)
    mk = lambda ds: PerformanceRegion(
        1e-3, 200.0, 0.0, tuple(PerformanceLevel(float(d), 1e-3) for d in ds))
    t_coarse = effective_threshold(mk(coarse_d), 32, PARAMS, 10, substream(8, 3),
                                   stats_fn=smooth_stats)
    t_fine = effective_threshold(mk(fine_d), 32, PARAMS, 10, substream(8, 4),
                                 stats_fn=smooth_stats)
    per = [t_coarse.per_level[lv] for lv in mk(coarse_d).grid]
    lipschitz = max(abs(a - b) for a, b in zip(per[1:], per[:-1]))
    assert abs(t_fine.effective - t_coarse.effective) < lipschitz


def test_vrfy_accepts_noiseless_legit():
    cfg = ModulationConfig(8, 8)
    key = gen_key(128, b"v" * 16)
    m = Message.random(8, substream(9, 0))
    c = mtac_generate(key, m, cfg)
    thr = _thr(0.25)
    assert vrfy(key, m, c, thr, cfg) == 1


def _thr(value):
    from mtacsim.receiver import ThresholdConfig
    return ThresholdConfig(per_level={}, effective=value, target_fnr=0.03)


def test_vrfy_rejects_pure_noise():
    cfg = ModulationConfig(16, 32)
    key = gen_key(128, b"w" * 16)
    rng = substream(9, 1)
    frame = PulseFrame(rng.standard_normal(cfg.n_p))
    m_prime = detect_bits(frame, expand_xor_sequence(key, cfg.n_p), cfg)
    thr = _thr(1 - 5 / math.sqrt(cfg.n_p) - 0.05)
    assert vrfy(key, m_prime, frame, thr, cfg) == 0


def test_vrfy_scale_invariance_of_decision():
    cfg = ModulationConfig(8, 16)
    key = gen_key(128, b"x" * 16)
    m = Message.random(16, substream(9, 2))
    level = PerformanceLevel(100.0, 1e-3)
    rx = _legit_frame_pipeline(level, cfg, key, m, substream(9, 3))
    x = expand_xor_sequence(key, cfg.n_p)
    m_prime = detect_bits(rx, x, cfg)
    thr = _thr(0.9)
    base = vrfy(key, m_prime, rx, thr, cfg)
    for alpha in (0.03, 12.0, 4096.0):
        scaled = PulseFrame(alpha * rx.samples)
        assert vrfy(key, m_prime, scaled, thr, cfg) == base


def test_vrfy_degenerate_input_rejects():
    cfg = ModulationConfig(2, 2)
    key = gen_key(128, b"y" * 16)
    thr = _thr(0.5)
    assert vrfy(key, Message((0, 1)), PulseFrame(np.zeros(4)), thr, cfg) == 0


def test_vrfy_robustness_at_calibration_level():
    # acceptance rate >= 1 - FNR - 3 SE at the calibrated level
    level = PerformanceLevel(150.0, 1e-3)
    cfg = ModulationConfig(required_nppb(level, PARAMS), 32)
    mu, sigma = legit_distortion_stats(level, cfg, PARAMS, 10_000, substream(10, 0))
    thr_value = threshold_for_level(level, (mu, sigma), cfg.n_b)
    fnr_bound = frame_error_rate(level.target_ber, cfg.n_b)

    rng = substream(10, 1)
    x = random_xor_sequence(cfg.n_p, rng)
    accept = 0
    trials = 10_000
    from mtacsim.montecarlo import legit_distortion_samples
    d = legit_distortion_samples(cfg, snr_per_pulse(PARAMS, level.distance_m), trials,
                                 substream(10, 2))
    accept = int((d <= thr_value).sum())
    se = math.sqrt(fnr_bound * (1 - fnr_bound) / trials)
    assert accept / trials >= 1 - fnr_bound - 3 * se


def test_single_bit_flip_strictly_increases_distortion():
    cfg = ModulationConfig(8, 16)
    key = gen_key(128, b"z" * 16)
    m = Message.random(16, substream(11, 0))
    level = PerformanceLevel(100.0, 1e-3)
    x = expand_xor_sequence(key, cfg.n_p)
    t_good = build_template(m, x, cfg)
    flipped_bits = list(m.bits)
    flipped_bits[5] ^= 1
    t_bad = build_template(Message(tuple(flipped_bits)), x, cfg)
    rng = substream(11, 1)
    gap = []
    for _ in range(200):
        rx = _legit_frame_pipeline(level, cfg, key, m, rng)
        gap.append(distortion(rx, t_bad).distortion - distortion(rx, t_good).distortion)
    assert np.mean(gap) > 0
    assert np.mean(gap) > 3 * np.std(gap, ddof=1) / math.sqrt(len(gap))


def test_kernel_matches_ops_exactly_on_crafted_frame():
    # all-ones message under the all-ones mask makes the kernel's reduced
    # form coincide with the object pipeline sample for sample
    from mtacsim import montecarlo
    cfg = ModulationConfig(4, 8)
    rng = substream(12, 0)
    noise = substream(12, 1).standard_normal(cfg.n_p)
    a = 1.3
    w = a + noise

    x = XorSequence(np.ones(cfg.n_p, dtype=np.int8))
    frame = PulseFrame(w)
    m_prime = detect_bits(frame, x, cfg)
    rep = distortion(frame, build_template(m_prime, x, cfg))

    d_kernel = montecarlo._distortion_detected(w[None, :], cfg.n_ppb)[0]
    assert rep.distortion == pytest.approx(float(d_kernel), rel=1e-12)
