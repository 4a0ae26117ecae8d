"""Shared strategies and small builders for the test suite."""

from hypothesis import strategies as st

from packetscore import GroundTruth, PacketRecord, PacketScoreFilter, PeriodConfig, parse_ipv4
from packetscore.packet_model import TCP, UDP
from packetscore.traffic import LegitModel


@st.composite
def packets(draw, truth=st.sampled_from(list(GroundTruth))):
    proto = draw(st.sampled_from([TCP, UDP, 1, 47]) | st.integers(0, 255))
    flags = draw(st.integers(0, 255)) if proto == TCP else None
    port = draw(st.integers(0, 65535)) if proto in (TCP, UDP) else None
    return PacketRecord(
        timestamp=draw(st.floats(0, 1e6, allow_nan=False)),
        src_ip=draw(st.integers(0, 2**32 - 1)),
        protocol=proto,
        packet_size=draw(st.integers(20, 65535)),
        ttl=draw(st.integers(0, 255)),
        tcp_flags=flags,
        dst_port=port,
        ground_truth=draw(truth),
    )


def compact_model(rate=1000.0) -> LegitModel:
    """Few categories, each with a large share; converges fast."""
    return LegitModel(
        rate=rate,
        protocol={TCP: 0.8, UDP: 0.2},
        packet_size={40: 0.4, 576: 0.3, 1500: 0.3},
        ttl={50: 0.5, 113: 0.5},
        src_prefixes={(10 << 24) | (1 << 16): 0.5, (10 << 24) | (2 << 16): 0.3,
                      (10 << 24) | (3 << 16): 0.2},
        tcp_flags={0x10: 0.6, 0x18: 0.4},
        tcp_ports={80: 0.7, 443: 0.3},
        udp_ports={53: 1.0},
    )


def pkt(ts=0.0, src="10.1.2.3", proto=TCP, size=100, ttl=64, flags=0x10, port=80,
        truth=GroundTruth.UNKNOWN):
    if proto != TCP:
        flags = None
    if proto not in (TCP, UDP):
        port = None
    return PacketRecord(ts, parse_ipv4(src), proto, size, ttl, flags, port, truth)


def run_filter(nominal, packets_, period=10_000, capacity=1000.0, max_utilization=1.0):
    """Run the pipeline over a packet list; returns (filter, verdicts)."""
    f = PacketScoreFilter(nominal, PeriodConfig.count(period), target_capacity=capacity,
                          max_utilization=max_utilization)
    return f, list(f.run(packets_))
