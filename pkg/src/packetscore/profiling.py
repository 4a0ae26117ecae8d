"""Per-period attribute histograms and the nominal (legitimate) profile.

A nominal profile stores, for every bucket, the highest ratio seen across the
training periods. The maximum is deliberately left unnormalized so values
that surge occasionally in legitimate traffic keep their headroom; scores are
only ever used ordinally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import EmptyTrainingSet, ProfileConfigMismatch
from .packet_model import (
    AttributeKind,
    BucketConfig,
    Feature,
    PacketRecord,
    bucket_count,
    bucketize,
    packet_buckets,
)


def _feature_key(feature: Feature) -> str:
    if isinstance(feature, tuple):
        return "+".join(k.name for k in feature)
    return feature.name


def _parse_feature_key(key: str) -> Feature:
    if "+" in key:
        a, b = key.split("+")
        return (AttributeKind[a], AttributeKind[b])
    return AttributeKind[key]


@dataclass
class AttributeHistogram:
    kind: Feature
    counts: np.ndarray
    total: int = 0

    @classmethod
    def empty(cls, kind: Feature, cfg: BucketConfig) -> "AttributeHistogram":
        return cls(kind, np.zeros(bucket_count(kind, cfg), dtype=np.int64))

    def ratio(self, bucket: int) -> float:
        if self.total == 0:
            return 0.0
        return int(self.counts[bucket]) / self.total

    def ratios(self) -> np.ndarray:
        if self.total == 0:
            return np.zeros(len(self.counts))
        return self.counts / self.total


def histogram_update(
    hist: AttributeHistogram, packet: PacketRecord, cfg: BucketConfig
) -> AttributeHistogram:
    """Count one packet into ``hist`` in place and return it."""
    hist.counts[bucketize(packet, hist.kind, cfg)] += 1
    hist.total += 1
    return hist


@dataclass
class MeasuredProfile:
    """Attribute distributions of all packets seen in one period.

    ``start`` and ``end`` bound the period in trace time; ``duration`` is
    what arrival rates and the legitimate-count estimate are scaled by.
    """

    period_id: int
    cfg: BucketConfig
    histograms: Dict[AttributeKind, AttributeHistogram] = field(default_factory=dict)
    joint: Optional[AttributeHistogram] = None
    packet_count: int = 0
    start: float = 0.0
    end: float = 0.0

    def __post_init__(self):
        if not self.histograms:
            self.histograms = {k: AttributeHistogram.empty(k, self.cfg) for k in AttributeKind}
        if self.joint is None and self.cfg.joint_pair is not None:
            self.joint = AttributeHistogram.empty(self.cfg.joint_pair, self.cfg)
        # Plain list for the per-packet path; avoids dict hashing of enums.
        self._hists = [self.histograms[k] for k in AttributeKind]

    @property
    def duration(self) -> float:
        return self.end - self.start

    def observe(self, packet: PacketRecord) -> None:
        self.observe_buckets(packet_buckets(packet, self.cfg))

    def observe_buckets(self, buckets) -> None:
        for h, b in zip(self._hists, buckets):
            h.counts[b] += 1
            h.total += 1
        if self.joint is not None:
            a, b = self.cfg.joint_pair
            self.joint.counts[buckets[a] * bucket_count(b, self.cfg) + buckets[b]] += 1
            self.joint.total += 1
        self.packet_count += 1

    def histogram(self, feature: Feature) -> AttributeHistogram:
        if isinstance(feature, tuple):
            if self.joint is None or self.joint.kind != feature:
                raise KeyError(f"no joint histogram for {feature}")
            return self.joint
        return self.histograms[feature]

    def features(self) -> Dict[Feature, AttributeHistogram]:
        out: Dict[Feature, AttributeHistogram] = dict(self.histograms)
        if self.joint is not None:
            out[self.joint.kind] = self.joint
        return out

    def ratios(self, feature: Feature) -> np.ndarray:
        if self.packet_count == 0:
            return np.zeros(bucket_count(feature, self.cfg))
        return self.histogram(feature).counts / self.packet_count


def measure(
    packets: Iterable[PacketRecord],
    cfg: BucketConfig,
    period_id: int = 0,
    start: Optional[float] = None,
    end: Optional[float] = None,
) -> MeasuredProfile:
    """Build a measured profile from a finite batch of packets."""
    prof = MeasuredProfile(period_id, cfg)
    first = last = None
    for p in packets:
        if first is None:
            first = p.timestamp
        last = p.timestamp
        prof.observe(p)
    prof.start = start if start is not None else (first or 0.0)
    prof.end = end if end is not None else (last if last is not None else prof.start)
    return prof


@dataclass
class NominalProfile:
    """Safety-margin ratios of legitimate traffic.

    ``nominal_rate`` is the mean packets per training period and
    ``period_duration`` the mean training period length in seconds; together
    they give the expected legitimate count for a period of any length.
    """

    cfg: BucketConfig
    ratios: Dict[Feature, np.ndarray]
    nominal_rate: float
    period_duration: float = 0.0
    source_period_count: int = 1

    def expected_legitimate(self, duration: Optional[float] = None) -> float:
        """Estimate of N_n for a period lasting ``duration`` seconds."""
        if duration is None or self.period_duration <= 0 or duration <= 0:
            return self.nominal_rate
        return self.nominal_rate * duration / self.period_duration

    def to_dict(self) -> dict:
        return {
            "format": "packetscore.nominal_profile/1",
            "config": self.cfg.to_dict(),
            "nominal_rate": self.nominal_rate,
            "period_duration": self.period_duration,
            "source_period_count": self.source_period_count,
            "ratios": {_feature_key(f): r.tolist() for f, r in self.ratios.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NominalProfile":
        cfg = BucketConfig.from_dict(d["config"])
        ratios = {}
        for key, values in d["ratios"].items():
            feature = _parse_feature_key(key)
            arr = np.asarray(values, dtype=float)
            if len(arr) != bucket_count(feature, cfg):
                raise ValueError(
                    f"{key}: expected {bucket_count(feature, cfg)} ratios, got {len(arr)}"
                )
            ratios[feature] = arr
        missing = [k.name for k in AttributeKind if k not in ratios]
        if missing:
            raise ValueError(f"profile lacks ratios for {', '.join(missing)}")
        return cls(
            cfg=cfg,
            ratios=ratios,
            nominal_rate=float(d["nominal_rate"]),
            period_duration=float(d.get("period_duration", 0.0)),
            source_period_count=int(d.get("source_period_count", 1)),
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NominalProfile":
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_nominal(profiles: Sequence[MeasuredProfile], cfg: BucketConfig) -> NominalProfile:
    """Per-bucket maximum of the periodic ratios, with no renormalization."""
    if not profiles:
        raise EmptyTrainingSet("cannot build a nominal profile from zero periods")
    for p in profiles:
        if p.cfg != cfg:
            raise ProfileConfigMismatch(
                f"period {p.period_id} was measured with {p.cfg}, expected {cfg}"
            )
    features = list(AttributeKind)
    if cfg.joint_pair is not None:
        features.append(cfg.joint_pair)
    ratios = {f: np.max([p.ratios(f) for p in profiles], axis=0) for f in features}
    return NominalProfile(
        cfg=cfg,
        ratios=ratios,
        nominal_rate=float(np.mean([p.packet_count for p in profiles])),
        period_duration=float(np.mean([p.duration for p in profiles])),
        source_period_count=len(profiles),
    )


def profile_ratio(
    profile: Union[MeasuredProfile, NominalProfile], kind: Feature, bucket: int
) -> float:
    if isinstance(profile, NominalProfile):
        return float(profile.ratios[kind][bucket])
    if profile.packet_count == 0:
        return 0.0
    return int(profile.histogram(kind).counts[bucket]) / profile.packet_count
