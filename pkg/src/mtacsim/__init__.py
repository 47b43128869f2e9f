"""Pulse-level simulation of message time-of-arrival codes.

Signal generation, free-space AWGN link model, variance-based verification,
attacker strategies, and security-game evaluation for keyed time-of-arrival
protection of impulse-radio ranging frames.
"""

__version__ = "0.1.0"

from .codec import (
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
from .channel import (
    ChannelParams,
    PerformanceLevel,
    PerformanceRegion,
    apply_channel,
    ber,
    distance_for_snr,
    log_distance_grid,
    noise_variance,
    q_func,
    q_inv,
    received_power,
    required_nppb,
    security_link_margin,
    snr_per_pulse,
)
from .receiver import (
    DistortionReport,
    Template,
    ThresholdConfig,
    build_template,
    detect_bits,
    distortion,
    effective_threshold,
    frame_error_rate,
    legit_distortion_stats,
    threshold_for_level,
    vrfy,
)
from .adversary import (
    AttackerModel,
    AttackTrace,
    break_even_pulses_per_bit,
    continued_interference_sim,
    guess_frame,
    kl_gaussian_zero_mean,
    over_approx_strength,
    power_increase_symbol,
)
from .baseline import (
    ToleranceConfig,
    exact_guessing_advantage,
    kl_bernoulli,
    min_np_for_security,
    sanov_advantage,
    single_pulse_vrfy,
)
from .projection import (
    ProjectionMatrix,
    ProjectionStats,
    folded_normal_moments,
    projection_stat,
    pwin_sim,
    s_diff_decide,
    sample_projection_matrix,
)
from .games import (
    AdvantageReport,
    CausalityFault,
    GameConfig,
    GameEnv,
    InsufficientDataError,
    MtacOracle,
    ObservedPrefix,
    QQData,
    RegionMap,
    cell_report,
    framelen_sweep,
    gaussian_advantage,
    qq_data,
    region_map,
    run_mtac_a_trial,
    run_mtac_d_trial,
    select_attacker_params,
    select_legit_params,
)
from .pipeline import pipeline_ber
from .rngstream import substream
