"""Run metrics and report files."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from .control import Cutoff
from .packet_model import GroundTruth, PacketRecord
from .pipeline import PacketVerdict, PeriodRecord


@dataclass
class Metrics:
    total: int = 0
    discarded: int = 0
    legit_total: int = 0
    legit_discarded: int = 0
    attack_total: int = 0
    attack_passed: int = 0

    def add(self, verdict: PacketVerdict, truth: GroundTruth) -> None:
        self.total += 1
        self.discarded += verdict.discarded
        if truth is GroundTruth.LEGITIMATE:
            self.legit_total += 1
            self.legit_discarded += verdict.discarded
        elif truth is GroundTruth.ATTACK:
            self.attack_total += 1
            self.attack_passed += not verdict.discarded

    @property
    def labeled(self) -> bool:
        return self.legit_total + self.attack_total > 0

    @property
    def discard_fraction(self) -> float:
        return self.discarded / self.total if self.total else 0.0

    @property
    def false_positive_rate(self) -> Optional[float]:
        return self.legit_discarded / self.legit_total if self.legit_total else None

    @property
    def false_negative_rate(self) -> Optional[float]:
        return self.attack_passed / self.attack_total if self.attack_total else None


def compute_metrics(
    verdicts: Iterable[PacketVerdict], truths: Iterable[GroundTruth]
) -> Dict[int, Metrics]:
    """Exact per-period counts; key -1 holds the run totals."""
    out: Dict[int, Metrics] = {-1: Metrics()}
    for v, t in zip(verdicts, truths, strict=True):
        m = out.get(v.period)
        if m is None:
            m = out[v.period] = Metrics()
        m.add(v, t)
        out[-1].add(v, t)
    return out


def _thd_value(thd: Union[float, Cutoff]) -> Union[float, str]:
    return thd.value if isinstance(thd, Cutoff) else thd


def _rates(m: Metrics, labeled: bool) -> Dict[str, Any]:
    if not labeled:
        return {}
    return {
        "false_positive_rate": m.false_positive_rate,
        "false_negative_rate": m.false_negative_rate,
        "legit_total": m.legit_total,
        "legit_discarded": m.legit_discarded,
        "attack_total": m.attack_total,
        "attack_passed": m.attack_passed,
    }


@dataclass
class RunReport:
    periods: List[Dict[str, Any]]
    totals: Dict[str, Any]
    config: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    wall_clock: float = 0.0

    @property
    def labeled(self) -> bool:
        return "false_positive_rate" in self.totals

    def to_dict(self) -> dict:
        return {
            "format": "packetscore.run_report/1",
            "seed": self.seed,
            "config": self.config,
            "totals": self.totals,
            "periods": self.periods,
            "wall_clock": self.wall_clock,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def write_timeseries(self, path: Union[str, Path]) -> None:
        """Plot-ready CSV: one row per period."""
        cols = ["period_id", "packets", "phi", "thd", "realized_discard", "passed_pps"]
        if self.labeled:
            cols += ["false_positive_rate", "false_negative_rate"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for rec in self.periods:
                w.writerow(["" if rec.get(c) is None else rec.get(c) for c in cols])


def build_report(
    history: Sequence[PeriodRecord],
    verdicts: Sequence[PacketVerdict],
    packets: Sequence[PacketRecord],
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    wall_clock: float = 0.0,
) -> RunReport:
    metrics = compute_metrics(verdicts, (p.ground_truth for p in packets))
    labeled = metrics[-1].labeled
    periods = []
    for rec in history:
        m = metrics.get(rec.period_id, Metrics())
        row = {
            "period_id": rec.period_id,
            "packets": rec.packet_count,
            "discarded": rec.discarded,
            "phi": rec.phi,
            "thd": _thd_value(rec.thd),
            "realized_discard": rec.realized_discard,
            "arrival_rate": rec.arrival_rate,
            "passed_pps": rec.passed_pps,
            "utilization": rec.utilization,
            "next_phi": rec.next_phi,
            "start": rec.start,
            "end": rec.end,
        }
        row.update(_rates(m, labeled))
        periods.append(row)
    t = metrics[-1]
    duration = (history[-1].end - history[0].start) if history else 0.0
    totals = {
        "packets": t.total,
        "discarded": t.discarded,
        "realized_discard": t.discard_fraction,
        "passed_pps": (t.total - t.discarded) / duration if duration > 0 else 0.0,
        "periods": len(history),
    }
    totals.update(_rates(t, labeled))
    return RunReport(periods, totals, config or {}, seed, wall_clock)


def write_verdicts(path: Union[str, Path], verdicts: Iterable[PacketVerdict],
                   packets: Optional[Iterable[PacketRecord]] = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if packets is None:
            w.writerow(["packet_id", "period", "score", "discarded"])
            for v in verdicts:
                w.writerow([v.packet_id, v.period, repr(v.score), int(v.discarded)])
            return
        w.writerow(["packet_id", "period", "score", "discarded", "ground_truth"])
        for v, p in zip(verdicts, packets):
            w.writerow([v.packet_id, v.period, repr(v.score), int(v.discarded),
                        p.ground_truth.value])
