"""
Cutoff threshold and load shedding
==================================

The load shedder turns arrival rate and capacity into a discard fraction;
the score CDF of the previous period turns that fraction into a cutoff.
"""

import numpy as np

from packetscore import LoadShedInput, ScoreCdf, cdf_insert, compute_threshold, load_shed
from packetscore.control import replay_discard_fraction

for rate in (800.0, 1000.0, 2000.0, 5000.0):
    phi = load_shed(LoadShedInput(arrival_rate=rate, target_capacity=1000.0))
    print(f"arrivals {rate:6.0f} pps against 1000 pps capacity -> discard {phi:.2f}")

# a 90% utilization ceiling sheds more
print("with a 0.9 ceiling:", round(load_shed(LoadShedInput(5000.0, 1000.0, max_utilization=0.9)), 3))

rng = np.random.default_rng(0)
scores = np.concatenate([rng.normal(4, 2, 2000), rng.normal(-10, 3, 8000)])
cdf = ScoreCdf.for_scores(n_features=6, epsilon=1e-6)
for s in scores:
    cdf_insert(cdf, float(s))
print("bins:", cdf.bins, " largest bin mass:", round(cdf.max_bin_mass(), 4))

for phi in (0.2, 0.5, 0.8, 0.95):
    t = compute_threshold(cdf, phi)
    got = replay_discard_fraction(t, scores.tolist())
    print(f"phi={phi:.2f} cutoff={t.thd:7.3f} realized={got:.4f}")

# phi 0 and 1 are sentinels, not bin edges
print(compute_threshold(cdf, 0.0).thd, compute_threshold(cdf, 1.0).thd)
