"""Score-based DDoS packet filtering.

Packets are scored by the log of their conditional legitimate probability,
computed from a nominal traffic profile and the measured profile of the
previous period, and discarded below a cutoff that tracks the fraction of
traffic the victim cannot absorb.
"""

from .control import (
    Cutoff,
    LoadShedInput,
    ScoreCdf,
    ThresholdState,
    cdf_insert,
    compute_threshold,
    load_shed,
    should_discard,
)
from .errors import (
    EmptyTrainingSet,
    InvalidFraction,
    NonMonotoneTrace,
    PacketScoreError,
    ProfileConfigMismatch,
    TraceFormatError,
)
from .packet_model import (
    NOT_APPLICABLE,
    AttributeKind,
    BucketConfig,
    GroundTruth,
    PacketRecord,
    bucket_count,
    bucketize,
    parse_ipv4,
)
from .pipeline import (
    PacketScoreFilter,
    PacketVerdict,
    PeriodConfig,
    PeriodMode,
    PeriodRecord,
    measure_periods,
    process_packet,
    rotate_period,
)
from .profiling import (
    AttributeHistogram,
    MeasuredProfile,
    NominalProfile,
    build_nominal,
    histogram_update,
    measure,
    profile_ratio,
)
from .reporting import Metrics, RunReport, build_report, compute_metrics
from .scoring import Scorebook, build_scorebook, clp_direct, score_packet
from .traffic import AttackModel, AttackType, LegitModel, generate, read_trace, write_trace

__version__ = "0.1.0"
