"""
Traces, profiles and reports on disk
====================================

The batch commands work on files: a CSV trace, a JSON nominal profile, a
JSON run report and a per-period CSV. The same functions back the
``packetscore`` command.
"""

import json
import tempfile
from pathlib import Path

from packetscore import LegitModel, generate, read_trace, write_trace
from packetscore.cli import cmd_profile, cmd_replay, main, timeseries_path

work = Path(tempfile.mkdtemp(prefix="packetscore-"))
conf = work / "run.conf"
conf.write_text("period_length = 2000\ncapacity = 1000\nseed = 3\nduration = 8\n"
                "attack.type = fixed\nattack.rate = 3000\nattack.pin.ttl = 116\n")

train = generate(LegitModel.default(1000.0), [], 12.0, seed=1, max_packets=10_000)
write_trace(work / "train.csv", train)
print((work / "train.csv").read_text().splitlines()[:3])
print("packets read back:", sum(1 for _ in read_trace(work / "train.csv")))

nominal = cmd_profile(work / "train.csv", conf, work / "nominal.json")
print("profile periods:", nominal.source_period_count)

# the command-line route, exit code 0 on success
code = main(["generate", "--config", str(conf), "--out", str(work / "attack.csv")])
print("generate exit code:", code)
report = cmd_replay(work / "nominal.json", work / "attack.csv", conf, work / "report.json",
                    verdicts_path=work / "verdicts.csv")
print(json.dumps(report.totals, indent=1))
print(timeseries_path(work / "report.json").read_text())

# a missing profile is a data error
print("missing profile exit code:",
      main(["replay", "--profile", str(work / "nope.json"), "--trace", str(work / "attack.csv"),
            "--out", str(work / "r.json")]))
