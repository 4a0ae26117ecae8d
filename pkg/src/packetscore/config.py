"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Attack sources are grouped by a
prefix (``attack.``, ``attack2.``, ...); see ``configs/canonical_attack.conf``
for every recognised key.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from .control import DEFAULT_BINS
from .packet_model import AttributeKind, BucketConfig, parse_ipv4
from .pipeline import PeriodConfig, PeriodMode
from .scoring import DEFAULT_EPSILON
from .traffic import AttackModel, AttackType, LegitModel


class ConfigError(ValueError):
    pass


_ATTACK_KEY = re.compile(r"^(attack\d*)\.(.+)$")


def parse_config_text(text: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {n}: empty key")
        out[key] = value
    return out


def _kind(name: str) -> AttributeKind:
    try:
        return AttributeKind[name.strip().upper()]
    except KeyError:
        raise ConfigError(f"unknown attribute {name!r}") from None


def _int_value(text: str) -> int:
    return int(text, 0)


@dataclass
class RunConfig:
    bucket: BucketConfig = field(default_factory=BucketConfig)
    period: PeriodConfig = field(default_factory=PeriodConfig)
    epsilon: float = DEFAULT_EPSILON
    cdf_bins: int = DEFAULT_BINS
    capacity: float = math.inf
    max_utilization: float = 1.0
    seed: int = 0
    duration: float = 60.0
    max_packets: Optional[int] = None
    legit_rate: float = 1000.0
    legit_model: str = "default"
    legit_model_seed: int = 7
    attacks: List[AttackModel] = field(default_factory=list)
    raw: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, kv: Dict[str, str]) -> "RunConfig":
        known = {
            "size_bucket_edges", "ttl_bucket_width", "src_prefix_len", "joint_pair",
            "period_mode", "period_length", "epsilon", "cdf_bins", "capacity",
            "max_utilization", "seed", "duration", "max_packets", "legit_rate",
            "legit_model", "legit_model_seed",
        }
        attack_groups: Dict[str, Dict[str, str]] = {}
        for k, v in kv.items():
            m = _ATTACK_KEY.match(k)
            if m:
                attack_groups.setdefault(m.group(1), {})[m.group(2)] = v
            elif k not in known:
                raise ConfigError(f"unknown config key {k!r}")
        try:
            bucket_kw = {}
            if "size_bucket_edges" in kv:
                bucket_kw["size_bucket_edges"] = tuple(
                    int(x) for x in kv["size_bucket_edges"].split(","))
            if "ttl_bucket_width" in kv:
                bucket_kw["ttl_bucket_width"] = int(kv["ttl_bucket_width"])
            if "src_prefix_len" in kv:
                bucket_kw["src_prefix_len"] = int(kv["src_prefix_len"])
            if kv.get("joint_pair", "none").lower() not in ("", "none"):
                a, b = kv["joint_pair"].split(",")
                bucket_kw["joint_pair"] = (_kind(a), _kind(b))
            mode = PeriodMode(kv.get("period_mode", "count"))
            default_len = 10_000 if mode is PeriodMode.COUNT else 10.0
            length = float(kv.get("period_length", default_len))
            period = PeriodConfig(mode, int(length) if mode is PeriodMode.COUNT else length)
            cfg = cls(
                bucket=BucketConfig(**bucket_kw),
                period=period,
                epsilon=float(kv.get("epsilon", DEFAULT_EPSILON)),
                cdf_bins=int(kv.get("cdf_bins", DEFAULT_BINS)),
                capacity=float(kv.get("capacity", "inf")),
                max_utilization=float(kv.get("max_utilization", 1.0)),
                seed=int(kv.get("seed", 0)),
                duration=float(kv.get("duration", 60.0)),
                max_packets=int(kv["max_packets"]) if "max_packets" in kv else None,
                legit_rate=float(kv.get("legit_rate", 1000.0)),
                legit_model=kv.get("legit_model", "default"),
                legit_model_seed=int(kv.get("legit_model_seed", 7)),
                raw=dict(kv),
            )
            cfg.attacks = [_attack(g, attack_groups[g]) for g in sorted(attack_groups)]
        except ConfigError:
            raise
        except KeyError as e:
            raise ConfigError(f"missing config key {e.args[0]!r}") from e
        except (ValueError, TypeError) as e:
            raise ConfigError(str(e)) from e
        if not 0 < cfg.max_utilization <= 1:
            raise ConfigError("max_utilization must be in (0, 1]")
        if cfg.capacity <= 0:
            raise ConfigError("capacity must be positive")
        return cfg

    def legit(self) -> LegitModel:
        if self.legit_model == "default":
            return LegitModel.default(self.legit_rate, self.legit_model_seed)
        model = LegitModel.from_dict(json.loads(Path(self.legit_model).read_text()))
        model.rate = self.legit_rate
        return model

    def echo(self) -> Dict[str, str]:
        return dict(sorted(self.raw.items()))


def _attack(group: str, kv: Dict[str, str]) -> AttackModel:
    pinned = {}
    for k, v in kv.items():
        if k.startswith("pin."):
            kind = _kind(k[4:])
            pinned[kind] = _pin_value(kind, v)
    spoofed = [_kind(x) for x in kv.get("spoof", "").split(",") if x.strip()]
    try:
        type_ = AttackType(kv.get("type", "fixed"))
    except ValueError:
        raise ConfigError(f"{group}.type must be one of fixed, spoof, mimic") from None
    unknown = set(kv) - {"type", "rate", "start", "stop", "spoof", "mimic_fraction", "seed"} \
        - {k for k in kv if k.startswith("pin.")}
    if unknown:
        raise ConfigError(f"unknown keys for {group}: {sorted(unknown)}")
    return AttackModel(
        type=type_,
        rate=float(kv["rate"]),
        start=float(kv.get("start", 0.0)),
        stop=float(kv.get("stop", "inf")),
        pinned=pinned,
        spoofed=spoofed,
        mimic_fraction=float(kv.get("mimic_fraction", 0.0)),
        seed=int(kv.get("seed", 0)),
    )


def _pin_value(kind: AttributeKind, text: str) -> int:
    if kind is AttributeKind.SRC_PREFIX and "." in text:
        return parse_ipv4(text)
    return _int_value(text)


def load_config(path: Union[str, Path, None]) -> RunConfig:
    if path is None:
        return RunConfig()
    return RunConfig.from_mapping(parse_config_text(Path(path).read_text()))
