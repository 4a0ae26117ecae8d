"""Batch entry points: ``profile``, ``simulate``, ``replay`` (and ``generate``).

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

from .config import ConfigError, RunConfig, load_config
from .errors import EmptyTrainingSet, PacketScoreError
from .packet_model import GroundTruth, PacketRecord
from .pipeline import PacketScoreFilter, measure_periods
from .profiling import NominalProfile, build_nominal
from .reporting import RunReport, build_report, write_verdicts
from .traffic import generate, read_trace, write_trace

log = logging.getLogger("packetscore")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


def cmd_profile(trace_path, config_path, out_profile_path) -> NominalProfile:
    cfg = load_config(config_path)
    packets = list(read_trace(trace_path))
    if not packets:
        raise EmptyTrainingSet(f"{trace_path}: trace holds no packets")
    attacks = sum(p.ground_truth is GroundTruth.ATTACK for p in packets)
    if attacks:
        log.warning("%s: %d packets are labeled as attack traffic; "
                    "labels are ignored and every packet is profiled", trace_path, attacks)
    profiles = measure_periods(packets, cfg.bucket, cfg.period)
    nominal = build_nominal(profiles, cfg.bucket)
    nominal.save(out_profile_path)
    log.info("profiled %d packets over %d periods -> %s",
             len(packets), len(profiles), out_profile_path)
    return nominal


def timeseries_path(report_path) -> Path:
    p = Path(report_path)
    return p.with_name(p.stem + ".periods.csv")


def _run(nominal: NominalProfile, cfg: RunConfig, packets: List[PacketRecord],
         out_report_path, verdicts_path, seed) -> RunReport:
    if nominal.cfg != cfg.bucket:
        log.warning("config binning differs from the profile's; using the profile's")
    started = time.perf_counter()
    filt = PacketScoreFilter(
        nominal,
        cfg.period,
        target_capacity=cfg.capacity,
        max_utilization=cfg.max_utilization,
        epsilon=cfg.epsilon,
        bins=cfg.cdf_bins,
    )
    verdicts = list(filt.run(packets))
    report = build_report(filt.history, verdicts, packets, cfg.echo(), seed,
                          wall_clock=time.perf_counter() - started)
    report.write(out_report_path)
    report.write_timeseries(timeseries_path(out_report_path))
    if verdicts_path is not None:
        write_verdicts(verdicts_path, verdicts, packets)
    return report


def _generated(cfg: RunConfig, seed: Optional[int]) -> List[PacketRecord]:
    s = cfg.seed if seed is None else seed
    return generate(cfg.legit(), cfg.attacks, cfg.duration, seed=s, max_packets=cfg.max_packets)


def cmd_simulate(profile_path, scenario_config, out_report_path, verdicts_path=None,
                 seed: Optional[int] = None) -> RunReport:
    nominal = NominalProfile.load(profile_path)
    cfg = load_config(scenario_config)
    packets = _generated(cfg, seed)
    return _run(nominal, cfg, packets, out_report_path, verdicts_path,
                cfg.seed if seed is None else seed)


def cmd_replay(profile_path, trace_path, config_path, out_report_path,
               verdicts_path=None) -> RunReport:
    nominal = NominalProfile.load(profile_path)
    cfg = load_config(config_path)
    packets = list(read_trace(trace_path))
    return _run(nominal, cfg, packets, out_report_path, verdicts_path, None)


def cmd_generate(config_path, out_trace_path, seed: Optional[int] = None) -> int:
    cfg = load_config(config_path)
    return write_trace(out_trace_path, _generated(cfg, seed))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="packetscore", description="Score-based DDoS packet filter.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("profile", help="learn a nominal profile from a legitimate trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="generate a scenario and filter it")
    p.add_argument("--profile", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verdicts")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("replay", help="filter a recorded trace")
    p.add_argument("--profile", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--verdicts")

    p = sub.add_parser("generate", help="write a synthetic scenario trace")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    return parser


def _summary(report: RunReport) -> str:
    t = report.totals
    parts = [f"packets={t['packets']}", f"discarded={t['discarded']}",
             f"discard_fraction={t['realized_discard']:.4f}"]
    if report.labeled:
        for key in ("false_positive_rate", "false_negative_rate"):
            if t[key] is not None:
                parts.append(f"{key}={t[key]:.4f}")
    return " ".join(parts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "profile":
            cmd_profile(args.trace, args.config, args.out)
        elif args.command == "simulate":
            print(_summary(cmd_simulate(args.profile, args.config, args.out,
                                        args.verdicts, args.seed)))
        elif args.command == "replay":
            print(_summary(cmd_replay(args.profile, args.trace, args.config,
                                      args.out, args.verdicts)))
        elif args.command == "generate":
            n = cmd_generate(args.config, args.out, args.seed)
            log.info("wrote %d packets to %s", n, args.out)
    except ConfigError as e:
        print(f"packetscore: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PacketScoreError, OSError, ValueError, KeyError) as e:
        print(f"packetscore: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
