"""
Profiles and scorebooks
=======================

Learn a nominal profile from legitimate traffic, measure a period under
attack and look at what the scorebook says about the attacked TTL.
"""

import numpy as np

from packetscore import (AttackModel, AttackType, AttributeKind, BucketConfig, LegitModel,
                         PeriodConfig, build_nominal, build_scorebook, generate, measure,
                         measure_periods, score_packet)

cfg = BucketConfig()
legit = LegitModel.default(rate=1000.0)

# 50k legitimate packets, five periods of 10k; the nominal profile keeps the
# per-bucket maximum over the periods
train = generate(legit, [], 60.0, seed=11, max_packets=50_000)
nominal = build_nominal(measure_periods(train, cfg, PeriodConfig.count(10_000)), cfg)
print("training periods:", nominal.source_period_count)
print("nominal packets per period:", nominal.nominal_rate)
print("TTL ratios sum to", round(float(nominal.ratios[AttributeKind.TTL].sum()), 3),
      "(above 1 because of the maximum rule)")

# one period of traffic with a 4000 pps flood pinned to TTL 116
flood = AttackModel(AttackType.FIXED_ATTRIBUTE, 4000.0, pinned={AttributeKind.TTL: 116})
now = generate(legit, [flood], 2.0, seed=3, max_packets=10_000)
measured = measure(now, cfg)
book = build_scorebook(nominal, measured, cfg)

ttl = book.entries[AttributeKind.TTL]
attacked = 116 // cfg.ttl_bucket_width
print("log prior:", round(book.log_prior, 3))
print("TTL entry for the attacked bucket:", round(float(ttl[attacked]), 3))
print("most favourable TTL entry:", round(float(ttl.max()), 3))

scores = np.array([score_packet(book, p, cfg) for p in now])
truth = np.array([p.ground_truth.value for p in now])
print("mean score, legitimate packets:", round(float(scores[truth == "L"].mean()), 2))
print("mean score, attack packets:    ", round(float(scores[truth == "A"].mean()), 2))
