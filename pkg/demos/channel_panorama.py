"""Walk one receiver away from a base station and watch both tiers decay.

The sub-6GHz link fades polynomially with distance, while the THz link is
also eaten by molecular absorption: received power falls like
exp(-K_a r) / r^2 and the re-radiated absorption noise saturates, so the
THz tier wins hugely up close and collapses past a crossover range. The
second section shows why THz interference is an alignment lottery: the
expected-mode rate sits between the sampled extremes.

Run: python demos/channel_panorama.py
"""

import numpy as np

from vnetsim import (
    RfParams, ThzParams, LinkGeometry, ChannelDraw,
    rf_sinr, thz_sinr, link_rate, sample_alignment,
)

W_RBS = 4.0e7    # Hz
W_TBS = 5.0e8

rf = RfParams()
thz = ThzParams()

print("=== rate vs distance, single interference-free link ===")
print(f"{'d [m]':>7} {'RF [Mb/s]':>12} {'THz [Mb/s]':>12}")
crossover = None
prev = None
for d in (5, 10, 20, 35, 50, 75, 100, 150, 200, 300, 450):
    g = LinkGeometry(float(d))
    r_rf = link_rate(W_RBS, rf_sinr(rf, g, ChannelDraw()))
    r_thz = link_rate(W_TBS, thz_sinr(thz, g, ChannelDraw()))
    print(f"{d:7d} {r_rf/1e6:12.1f} {r_thz/1e6:12.1f}")
    if prev is not None and (prev >= 0) != (r_thz - r_rf >= 0):
        crossover = d
    prev = r_thz - r_rf
if crossover:
    print(f"\nTHz loses its edge somewhere below {crossover} m on these defaults.")

print("\n=== THz interference: expected alignment vs sampled draws ===")
# one interfering TBS at 60 m; its beam only hurts when both ends point at us
g = LinkGeometry(25.0, (60.0,))
expected = link_rate(W_TBS, thz_sinr(thz, g, ChannelDraw()))
print(f"expected-mode rate     : {expected/1e9:7.3f} Gb/s  "
      f"(misalignment prob {1 - thz.align_prob_tx * thz.align_prob_rx:.2f} folded in)")

rng = np.random.default_rng(7)
draws = []
for k in range(8):
    d = ChannelDraw(interferer_alignments=(sample_alignment(thz, rng),))
    draws.append(link_rate(W_TBS, thz_sinr(thz, g, d)))
for k, r in enumerate(draws):
    hit = "beam hit" if r < 0.9 * max(draws) else "missed us"
    print(f"  draw {k}: {r/1e9:7.3f} Gb/s   ({hit})")
print(f"sampled mean over 8 draws: {np.mean(draws)/1e9:7.3f} Gb/s")
