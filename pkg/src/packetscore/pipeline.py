"""Period-pipelined profiling, scoring and discarding.

Within period i every packet is (1) counted into the period's measured
profile, (2) scored with the scorebook frozen at the end of period i-1 and
inserted into the period's score CDF, and (3) discarded if its score falls
below the cutoff frozen at the end of period i-1. At the boundary the
finished profile and CDF become the next scorebook and cutoff in a single
swap, so nothing observed in a period can influence a verdict in the same
period.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Union

from .control import (
    DEFAULT_BINS,
    Cutoff,
    LoadShedInput,
    ScoreCdf,
    ThresholdState,
    cdf_insert,
    compute_threshold,
    load_shed,
    should_discard,
)
from .packet_model import PacketRecord, feature_indices, packet_buckets, scoring_features
from .profiling import MeasuredProfile, NominalProfile
from .scoring import DEFAULT_EPSILON, Scorebook, build_scorebook


class PeriodMode(enum.Enum):
    TIME = "time"
    COUNT = "count"


@dataclass(frozen=True)
class PeriodConfig:
    mode: PeriodMode = PeriodMode.COUNT
    length: float = 10_000

    def __post_init__(self):
        object.__setattr__(self, "mode", PeriodMode(self.mode))
        if not self.length > 0:
            raise ValueError(f"period length must be positive, got {self.length}")
        if self.mode is PeriodMode.COUNT and int(self.length) != self.length:
            raise ValueError("count-based period length must be an integer")

    @classmethod
    def time(cls, seconds: float) -> "PeriodConfig":
        return cls(PeriodMode.TIME, float(seconds))

    @classmethod
    def count(cls, packets: int) -> "PeriodConfig":
        return cls(PeriodMode.COUNT, int(packets))


@dataclass(frozen=True, slots=True)
class PacketVerdict:
    packet_id: int
    score: float
    discarded: bool
    period: int


@dataclass
class PeriodRecord:
    """What happened in one finished period.

    ``phi`` and ``thd`` are the cutoff that was applied during the period;
    ``next_phi`` is the discard fraction computed at its end.
    """

    period_id: int
    packet_count: int
    discarded: int
    start: float
    end: float
    phi: float
    thd: Union[float, Cutoff]
    arrival_rate: float
    utilization: float
    next_phi: float

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def realized_discard(self) -> float:
        return self.discarded / self.packet_count if self.packet_count else 0.0

    @property
    def passed_pps(self) -> float:
        d = self.duration
        return (self.packet_count - self.discarded) / d if d > 0 else 0.0


class PacketScoreFilter:
    """Pipeline state plus the per-packet and per-boundary operations.

    ``target_capacity`` is the victim's capacity in packets per second and
    ``max_utilization`` the ceiling the load shedder aims for.
    """

    def __init__(
        self,
        nominal: NominalProfile,
        period: PeriodConfig = PeriodConfig(),
        target_capacity: float = math.inf,
        max_utilization: float = 1.0,
        epsilon: float = DEFAULT_EPSILON,
        bins: int = DEFAULT_BINS,
    ):
        self.nominal = nominal
        self.cfg = nominal.cfg
        self.period = period
        self.target_capacity = target_capacity
        self.max_utilization = max_utilization
        self.epsilon = epsilon
        self.bins = bins
        self._n_features = len(scoring_features(self.cfg))

        self.current_period = 0
        self.active_scorebook = Scorebook.identity(self.cfg, -1, epsilon)
        self.active_threshold = ThresholdState.none(-1)
        self.in_progress_profile = MeasuredProfile(0, self.cfg)
        self.in_progress_cdf = self._new_cdf()
        self.discarded_in_period = 0
        self.history: List[PeriodRecord] = []
        self._next_id = 0
        self._period_start: Optional[float] = None
        self._last_timestamp = 0.0

    def _new_cdf(self) -> ScoreCdf:
        return ScoreCdf.for_scores(
            self._n_features, self.epsilon, self.bins,
            period_id=self.current_period,
            cold=self.active_scorebook.period_id < 0,
        )

    # -- per packet ---------------------------------------------------------

    def process_packet(self, packet: PacketRecord) -> PacketVerdict:
        """Profile, score and judge one packet without crossing a boundary."""
        buckets = packet_buckets(packet, self.cfg)
        self.in_progress_profile.observe_buckets(buckets)
        score = self.active_scorebook.score_indices(feature_indices(buckets, self.cfg))
        cdf_insert(self.in_progress_cdf, score)
        discarded = should_discard(self.active_threshold, score)
        if discarded:
            self.discarded_in_period += 1
        if self._period_start is None:
            self._period_start = packet.timestamp
        self._last_timestamp = packet.timestamp
        verdict = PacketVerdict(self._next_id, score, discarded, self.current_period)
        self._next_id += 1
        return verdict

    # -- period boundary ----------------------------------------------------

    def shed_input(self, end: float) -> LoadShedInput:
        """Load-shedder input observed over the in-progress period."""
        start = self._period_start if self._period_start is not None else end
        duration = end - start
        n = self.in_progress_profile.packet_count
        rate = n / duration if duration > 0 else 0.0
        capacity = self.target_capacity
        if math.isinf(capacity):
            util = 0.0
        else:
            passed = n - self.discarded_in_period
            util = (passed / duration) / capacity if duration > 0 else 0.0
        return LoadShedInput(
            arrival_rate=rate,
            target_capacity=capacity if capacity > 0 else math.inf,
            current_utilization=util,
            max_utilization=self.max_utilization,
        )

    def rotate_period(self, end: Optional[float] = None,
                      shed: Optional[LoadShedInput] = None) -> PeriodRecord:
        """Freeze the finished period into the next scorebook and cutoff."""
        if end is None:
            end = self._last_timestamp
        start = self._period_start if self._period_start is not None else end
        if shed is None:
            shed = self.shed_input(end)
        finished = self.in_progress_profile
        finished.start, finished.end = start, end
        phi = load_shed(shed)
        new_book = build_scorebook(self.nominal, finished, self.cfg, self.epsilon)
        new_threshold = compute_threshold(self.in_progress_cdf, phi)
        record = PeriodRecord(
            period_id=self.current_period,
            packet_count=finished.packet_count,
            discarded=self.discarded_in_period,
            start=start,
            end=end,
            phi=self.active_threshold.phi,
            thd=self.active_threshold.thd,
            arrival_rate=shed.arrival_rate,
            utilization=shed.current_utilization,
            next_phi=phi,
        )
        self.history.append(record)

        self.current_period += 1
        self.active_scorebook = new_book
        self.active_threshold = new_threshold
        self.in_progress_profile = MeasuredProfile(self.current_period, self.cfg)
        self.in_progress_cdf = self._new_cdf()
        self.discarded_in_period = 0
        self._period_start = end
        return record

    # -- driver -------------------------------------------------------------

    def run(self, packets: Iterable[PacketRecord], flush: bool = True) -> Iterator[PacketVerdict]:
        """Drive the pipeline over a packet stream, rotating at boundaries.

        With ``flush`` the final partial period is closed as well so that its
        record appears in ``history``.
        """
        count_mode = self.period.mode is PeriodMode.COUNT
        length = self.period.length
        period_end = None
        for p in packets:
            if count_mode:
                v = self.process_packet(p)
                yield v
                if self.in_progress_profile.packet_count >= length:
                    self.rotate_period(p.timestamp)
                continue
            if period_end is None:
                period_end = p.timestamp + length
                self._period_start = p.timestamp
            while p.timestamp >= period_end:
                self.rotate_period(period_end)
                period_end += length
            yield self.process_packet(p)
        if flush and self.in_progress_profile.packet_count:
            if count_mode:
                self.rotate_period(self._last_timestamp)
            else:
                self.rotate_period(period_end)


def process_packet(state: PacketScoreFilter, packet: PacketRecord) -> PacketVerdict:
    return state.process_packet(packet)


def rotate_period(state: PacketScoreFilter, shed: LoadShedInput,
                  end: Optional[float] = None) -> PeriodRecord:
    return state.rotate_period(end, shed)


def measure_periods(
    packets: Iterable[PacketRecord],
    cfg,
    period: PeriodConfig = PeriodConfig(),
    keep_partial: bool = False,
) -> List[MeasuredProfile]:
    """Split a stream into periods and measure each one.

    Period boundaries follow the same rules as ``PacketScoreFilter.run``. A
    trailing partial period is dropped unless it is the only one or
    ``keep_partial`` is set.
    """
    profiles: List[MeasuredProfile] = []
    current: Optional[MeasuredProfile] = None
    start = last = None
    period_end = None
    count_mode = period.mode is PeriodMode.COUNT
    for p in packets:
        if start is None:
            start = p.timestamp
            period_end = p.timestamp + period.length
        if not count_mode:
            while p.timestamp >= period_end:
                if current is None:
                    current = MeasuredProfile(len(profiles), cfg)
                current.start, current.end = start, period_end
                profiles.append(current)
                current = None
                start = period_end
                period_end += period.length
        if current is None:
            current = MeasuredProfile(len(profiles), cfg)
        current.observe(p)
        last = p.timestamp
        if count_mode and current.packet_count >= period.length:
            current.start, current.end = start, last
            profiles.append(current)
            current = None
            start = last
    if current is not None and current.packet_count:
        if keep_partial or not profiles:
            current.start = start
            current.end = last if count_mode else max(last, start)
            profiles.append(current)
    return profiles
