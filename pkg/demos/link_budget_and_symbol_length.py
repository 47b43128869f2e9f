"""Symbol length required over distance, and the security link margin.

Shows how many pulses per bit the free-space link budget demands for a
target bit error rate, in line-of-sight and through 20 dB of extra loss,
plus the link margin needed to push the secure range beyond 200 m.

    python3 demos/link_budget_and_symbol_length.py
"""

import numpy as np

from mtacsim import (
    ChannelParams,
    PerformanceLevel,
    required_nppb,
    security_link_margin,
    snr_per_pulse,
)

los = ChannelParams()
nlos = ChannelParams(nlos_attenuation_db=20.0)

print(f"{'distance':>9} {'SNR/pulse':>10} {'n_ppb (LoS)':>12} {'n_ppb (NLoS)':>13}")
for d in (10, 25, 50, 100, 200, 400):
    snr_db = 10 * np.log10(snr_per_pulse(los, d))
    row = [required_nppb(PerformanceLevel(d, b), los) for b in (1e-3,)]
    row_nlos = [required_nppb(PerformanceLevel(d, b, 20.0), nlos) for b in (1e-3,)]
    print(f"{d:>8}m {snr_db:>9.2f}dB {row[0]:>12} {row_nlos[0]:>13}")

print("\nsecurity link margin to extend the bit-equivalent range:")
for d_max, gamma in ((200, 0.0), (400, 0.0), (2000, 0.0), (200, 20.0)):
    print(f"  d_max={d_max:>5} m, extra loss {gamma:>4.1f} dB "
          f"-> margin {security_link_margin(d_max, gamma):6.2f} dB")
