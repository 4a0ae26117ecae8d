"""Score CDF, cutoff threshold and the load shedder that sets the discard fraction."""

from __future__ import annotations

import enum
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import List, Sequence, Union

import numpy as np

from .errors import InvalidFraction

DEFAULT_BINS = 1024


class Cutoff(enum.Enum):
    NONE = "none"  # discard nothing
    ALL = "all"  # discard everything


@dataclass
class ScoreCdf:
    """Fixed-bin histogram of the scores seen in one period.

    ``edges`` holds B+1 ascending boundaries. ``counts`` has B+2 slots:
    slot 0 collects scores below ``edges[0]``, slot k in 1..B collects
    ``[edges[k-1], edges[k])`` and slot B+1 collects scores at or above
    ``edges[-1]``. A cold CDF holds scores from the warm-up identity book
    and never produces a cutoff.
    """

    edges: np.ndarray
    period_id: int = 0
    counts: List[int] = field(default_factory=list)
    total: int = 0
    cold: bool = False

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        if self.edges.ndim != 1 or len(self.edges) < 2:
            raise ValueError("need at least two bin edges")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("bin edges must be strictly ascending")
        if not self.counts:
            self.counts = [0] * (len(self.edges) + 1)
        self._edge_list = self.edges.tolist()

    @classmethod
    def for_scores(cls, n_features: int, epsilon: float, bins: int = DEFAULT_BINS,
                   period_id: int = 0, cold: bool = False) -> "ScoreCdf":
        """CDF spanning every finite score a book over ``n_features`` can emit."""
        half = (n_features + 1) * abs(math.log(epsilon))
        return cls(np.linspace(-half, half, bins + 1), period_id=period_id, cold=cold)

    @property
    def bins(self) -> int:
        return len(self.edges) - 1

    def upper_edge(self, slot: int) -> float:
        return self._edge_list[slot] if slot <= self.bins else math.inf

    def cumulative(self) -> np.ndarray:
        """Fraction of scores strictly below ``upper_edge(slot)`` for every slot."""
        c = np.cumsum(self.counts)
        return c / self.total if self.total else np.zeros(len(c))

    def max_bin_mass(self) -> float:
        return max(self.counts) / self.total if self.total else 0.0


def cdf_insert(cdf: ScoreCdf, score: float) -> ScoreCdf:
    cdf.counts[bisect_right(cdf._edge_list, score)] += 1
    cdf.total += 1
    return cdf


@dataclass(frozen=True)
class ThresholdState:
    thd: Union[float, Cutoff]
    phi: float
    source_period: int = -1

    @classmethod
    def none(cls, source_period: int = -1) -> "ThresholdState":
        return cls(Cutoff.NONE, 0.0, source_period)


def compute_threshold(cdf: ScoreCdf, phi: float) -> ThresholdState:
    """Cutoff whose previous-period CDF value first reaches ``phi``.

    An empty or cold CDF fails open: nothing is discarded unless ``phi`` is 1.
    """
    if not 0.0 <= phi <= 1.0 or math.isnan(phi):
        raise InvalidFraction(f"discard fraction must lie in [0, 1], got {phi}")
    if phi == 0.0:
        return ThresholdState(Cutoff.NONE, 0.0, cdf.period_id)
    if phi == 1.0:
        return ThresholdState(Cutoff.ALL, 1.0, cdf.period_id)
    if cdf.total == 0 or cdf.cold:
        return ThresholdState(Cutoff.NONE, phi, cdf.period_id)
    cum = np.cumsum(cdf.counts)
    # Relative slack so phi * total landing a hair above an integer count
    # (0.3 * 10 = 3.0000000000000004) still selects that count.
    slot = int(np.searchsorted(cum, phi * cdf.total * (1 - 1e-12), side="left"))
    return ThresholdState(cdf.upper_edge(slot), phi, cdf.period_id)


def should_discard(thd: ThresholdState, score: float) -> bool:
    t = thd.thd
    if t is Cutoff.NONE:
        return False
    if t is Cutoff.ALL:
        return True
    return score < t


@dataclass(frozen=True)
class LoadShedInput:
    arrival_rate: float
    target_capacity: float
    current_utilization: float = 0.0
    max_utilization: float = 1.0

    def __post_init__(self):
        if not self.target_capacity > 0:
            raise ValueError(f"target_capacity must be positive, got {self.target_capacity}")
        if self.arrival_rate < 0:
            raise ValueError(f"arrival_rate must be non-negative, got {self.arrival_rate}")
        if not 0 < self.max_utilization <= 1:
            raise ValueError(f"max_utilization must be in (0, 1], got {self.max_utilization}")


def load_shed(shed: LoadShedInput) -> float:
    """Fraction of arriving traffic to drop so the victim stays at its ceiling.

    One-shot proportional rule: pass ``capacity * max_utilization`` packets per
    second and drop the rest. ``current_utilization`` is reported but not fed
    back; a closed-loop controller can replace this function.
    """
    if shed.arrival_rate <= 0:
        return 0.0
    allowed = shed.target_capacity * shed.max_utilization
    return min(max(1.0 - allowed / shed.arrival_rate, 0.0), 1.0)


def replay_discard_fraction(thd: ThresholdState, scores: Sequence[float]) -> float:
    if not len(scores):
        return 0.0
    return sum(should_discard(thd, s) for s in scores) / len(scores)
