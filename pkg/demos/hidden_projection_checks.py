"""Hidden redundant checks: attacker win probability vs frame length.

Secret random +/-1 projections of the received pulse train are compared
against their expected values; the aggregate deviation test gets harder to
fool as frames grow. Matched projections anchor the statistic and decay
faster.

    python3 demos/hidden_projection_checks.py
"""

import math

from mtacsim import pwin_sim, substream

for mode in ("matched", "unmatched"):
    points = pwin_sim([2, 4, 8, 16, 32], 128, mode, snr_db=0.0, trials=2000,
                      rng=substream(99, hash(mode) % 1000))
    print(f"{mode} projections (128 checks, SNR 0 dB):")
    for p in points:
        print(f"  n_b={p.n_b:>3}  log10(p_win)={math.log10(max(p.p_win, 1e-300)):>8.2f}"
              f"  fpr={p.fpr:.2e}")
