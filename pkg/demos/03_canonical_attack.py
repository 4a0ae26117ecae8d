"""
Filtering a flood
=================

The canonical scenario: 1000 pps of legitimate traffic, a 4000 pps flood
with a fixed TTL, protocol and port, and a victim that absorbs 1000 pps.
Periods are 10k packets. Period 0 runs on an all-zero scorebook and period 1
fails open, so filtering starts in period 2.
"""

from pathlib import Path

from packetscore import PacketScoreFilter, build_nominal, build_report, generate
from packetscore.config import load_config
from packetscore.pipeline import measure_periods

configs = Path(__file__).resolve().parents[1] / "configs"

training = load_config(configs / "training.conf")
train = generate(training.legit(), [], training.duration, seed=training.seed,
                 max_packets=training.max_packets)
nominal = build_nominal(measure_periods(train, training.bucket, training.period), training.bucket)

scenario = load_config(configs / "canonical_attack.conf")
packets = generate(scenario.legit(), scenario.attacks, scenario.duration, seed=scenario.seed,
                   max_packets=scenario.max_packets)
filt = PacketScoreFilter(nominal, scenario.period, target_capacity=scenario.capacity)
verdicts = list(filt.run(packets))
report = build_report(filt.history, verdicts, packets, scenario.echo(), scenario.seed)

print("period   phi    thd      discarded   FPR     FNR")
for row in report.periods:
    thd = row["thd"] if isinstance(row["thd"], str) else f"{row['thd']:.2f}"
    print(f"{row['period_id']:>6} {row['phi']:5.2f} {thd:>8} {row['realized_discard']:10.4f}"
          f" {row['false_positive_rate']:7.4f} {row['false_negative_rate']:7.4f}")
print("run totals:", {k: round(v, 4) if isinstance(v, float) else v
                      for k, v in report.totals.items()})
