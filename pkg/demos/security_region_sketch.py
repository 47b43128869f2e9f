"""Coarse sketch of the bit-equivalent security region.

A reduced-resolution version of the full region campaign: advantage of the
20-percent-biased attacker over distance for one target BER column, with
the 2^-32 bit-equivalence line. The full map is the `region` subcommand.

    python3 demos/security_region_sketch.py
"""

import math

from mtacsim import AttackerModel, ChannelParams, cell_report

params = ChannelParams()
model = AttackerModel("ideal_bias", rho=0.2)
n_b = 32

print(f"{'distance':>9} {'mu_lgt':>8} {'mu_att':>8} {'log2(adv)':>10} {'bit-equivalent':>15}")
for i, d in enumerate((50.0, 100.0, 150.0, 200.0, 250.0, 300.0)):
    rep = cell_report(params, d, 1e-3, 0.0, n_b, model, trials=800, seed=7, cell_index=i)
    log2adv = math.log2(max(rep.advantage, 1e-300))
    marker = "yes" if rep.bit_equivalent else "no"
    print(f"{d:>8.0f}m {rep.mu_lgt:>8.4f} {rep.mu_att:>8.4f} {log2adv:>10.1f} {marker:>15}")
print(f"\n(bit-equivalent means advantage <= 2^-{n_b})")
