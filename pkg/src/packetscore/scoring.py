"""Log-domain scorebooks and per-packet scoring.

A packet's score is the natural log of its conditional legitimate
probability::

    score = ln(N_n / N_m) + sum_f ln(P'_n(f = v_f) / P_m(f = v_f))

Each ratio is floored at ``epsilon`` on both sides so unseen values give a
large but finite contribution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from .errors import ProfileConfigMismatch
from .packet_model import (
    BucketConfig,
    Feature,
    PacketRecord,
    bucket_count,
    bucketize,
    feature_indices,
    packet_buckets,
    scoring_features,
)
from .profiling import (
    MeasuredProfile,
    NominalProfile,
    _feature_key,
    _parse_feature_key,
    profile_ratio,
)

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True, eq=False)
class Scorebook:
    period_id: int
    cfg: BucketConfig
    entries: Dict[Feature, np.ndarray]
    log_prior: float
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        features = scoring_features(self.cfg)
        missing = [f for f in features if f not in self.entries]
        if missing:
            raise ValueError(f"scorebook lacks entries for {missing}")

    @cached_property
    def _tables(self):
        # Lookup tables in summation order, as Python lists for scalar access.
        return tuple(self.entries[f].tolist() for f in scoring_features(self.cfg))

    @classmethod
    def identity(cls, cfg: BucketConfig, period_id: int = -1,
                 epsilon: float = DEFAULT_EPSILON) -> "Scorebook":
        """All-zero book used before any period has been measured."""
        entries = {f: np.zeros(bucket_count(f, cfg)) for f in scoring_features(cfg)}
        return cls(period_id, cfg, entries, 0.0, epsilon)

    def score_indices(self, indices) -> float:
        s = self.log_prior
        for table, i in zip(self._tables, indices):
            s += table[i]
        return s

    def to_dict(self) -> dict:
        return {
            "format": "packetscore.scorebook/1",
            "period_id": self.period_id,
            "config": self.cfg.to_dict(),
            "log_prior": self.log_prior,
            "epsilon": self.epsilon,
            "entries": {_feature_key(f): e.tolist() for f, e in self.entries.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scorebook":
        return cls(
            period_id=int(d["period_id"]),
            cfg=BucketConfig.from_dict(d["config"]),
            entries={_parse_feature_key(k): np.asarray(v, dtype=float)
                     for k, v in d["entries"].items()},
            log_prior=float(d["log_prior"]),
            epsilon=float(d["epsilon"]),
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Scorebook":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _check_configs(nominal: NominalProfile, measured: MeasuredProfile, cfg: BucketConfig):
    if nominal.cfg != cfg or measured.cfg != cfg:
        raise ProfileConfigMismatch(
            f"nominal={nominal.cfg}, measured={measured.cfg}, requested={cfg}"
        )


def build_scorebook(
    nominal: NominalProfile,
    measured: MeasuredProfile,
    cfg: BucketConfig,
    epsilon: float = DEFAULT_EPSILON,
    legitimate_estimate: Optional[float] = None,
) -> Scorebook:
    """Scorebook for scoring the period after ``measured``.

    ``legitimate_estimate`` overrides the N_n estimate, which otherwise is
    the nominal rate scaled to the measured period's duration.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    _check_configs(nominal, measured, cfg)
    entries = {}
    for f in scoring_features(cfg):
        num = np.maximum(nominal.ratios[f], epsilon)
        den = np.maximum(measured.ratios(f), epsilon)
        entries[f] = np.log(num / den)
    n_n = nominal.expected_legitimate(measured.duration) if legitimate_estimate is None \
        else legitimate_estimate
    log_prior = math.log(max(n_n, 1.0) / max(measured.packet_count, 1))
    return Scorebook(measured.period_id, cfg, entries, log_prior, epsilon)


def score_packet(book: Scorebook, packet: PacketRecord, cfg: BucketConfig) -> float:
    # Same summation order as score_indices, without building the lookup lists.
    s = book.log_prior
    for f, i in zip(scoring_features(cfg), feature_indices(packet_buckets(packet, cfg), cfg)):
        s += float(book.entries[f][i])
    return s


def clp_direct(
    packet: PacketRecord,
    nominal: NominalProfile,
    measured: MeasuredProfile,
    cfg: BucketConfig,
    epsilon: float = DEFAULT_EPSILON,
    legitimate_estimate: Optional[float] = None,
) -> float:
    """Product-form CLP straight from the profiles, without a scorebook."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    _check_configs(nominal, measured, cfg)
    n_n = nominal.expected_legitimate(measured.duration) if legitimate_estimate is None \
        else legitimate_estimate
    numerator = max(n_n, 1.0)
    denominator = float(max(measured.packet_count, 1))
    for f in scoring_features(cfg):
        b = bucketize(packet, f, cfg)
        numerator *= max(profile_ratio(nominal, f, b), epsilon)
        denominator *= max(profile_ratio(measured, f, b), epsilon)
    return numerator / denominator
