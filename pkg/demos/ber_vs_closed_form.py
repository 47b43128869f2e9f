"""Measured vs. modeled bit error rate of the masked repetition code.

Frames run through the full transmit/receive chain (key expansion,
repetition coding, masking, free-space AWGN, mask-correlated detection) and
the error counts are compared against Q(sqrt(n_ppb * SNR)).

    python3 demos/ber_vs_closed_form.py
"""

import math

from mtacsim import ChannelParams, pipeline_ber

params = ChannelParams()

print(f"{'n_ppb':>6} {'SNR/pulse':>10} {'bits':>8} {'measured':>12} {'model':>12} {'z':>6}")
for n_ppb in (1, 4, 16, 64):
    for snr_db in (-9.0, -3.0, 0.0, 6.0):
        errors, bits, model = pipeline_ber(params, n_ppb, snr_db, 50_000, seed=1,
                                           stream_key=(n_ppb, int(snr_db)))
        measured = errors / bits
        se = math.sqrt(max(model * (1 - model), 1e-12) / bits)
        z = (measured - model) / se if se > 0 else 0.0
        print(f"{n_ppb:>6} {snr_db:>9.1f}dB {bits:>8} {measured:>12.3e} "
              f"{model:>12.3e} {z:>6.2f}")
