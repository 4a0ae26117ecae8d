"""
Attacks that look legitimate
============================

A MimicBlend attack sends a legitimate-looking packet with probability
lambda and a fixed-attribute packet otherwise. The closer the attack gets to
the legitimate profile, the higher its packets score and the more of them
get through. The discard fraction stays at 0.8 regardless, so legitimate
packets take the hits the attack no longer does.
"""

import numpy as np

from packetscore import (AttackModel, AttackType, AttributeKind, BucketConfig, GroundTruth,
                         LegitModel, PacketScoreFilter, PeriodConfig, build_nominal,
                         compute_metrics, generate)
from packetscore.pipeline import measure_periods

cfg = BucketConfig()
legit = LegitModel.default(1000.0)
train = generate(legit, [], 60.0, seed=11, max_packets=50_000)
nominal = build_nominal(measure_periods(train, cfg, PeriodConfig.count(10_000)), cfg)
pins = {AttributeKind.TTL: 116, AttributeKind.PROTOCOL: 6, AttributeKind.SERVER_PORT: 80}

for lam in (0.0, 0.25, 0.5, 0.75, 0.95):
    atk = AttackModel(AttackType.MIMIC_BLEND, 4000.0, pinned=pins, mimic_fraction=lam, seed=1)
    packets = generate(legit, [atk], 14.0, seed=12, max_packets=60_000)
    filt = PacketScoreFilter(nominal, PeriodConfig.count(10_000), target_capacity=1000.0)
    verdicts = list(filt.run(packets))
    keep = [i for i, v in enumerate(verdicts) if v.period >= 2]
    m = compute_metrics([verdicts[i] for i in keep], [packets[i].ground_truth for i in keep])[-1]
    attack = [verdicts[i].score for i in keep if packets[i].ground_truth is GroundTruth.ATTACK]
    print(f"lambda={lam:.2f} attack mean score={np.mean(attack):7.2f} "
          f"FNR={m.false_negative_rate:.3f} FPR={m.false_positive_rate:.3f}")
