"""Packet attribute tuple and the bucketization of raw header fields."""

from __future__ import annotations

import enum
import ipaddress
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

TCP = 6
UDP = 17

MAX_JOINT_BUCKETS = 1 << 22

# Marker for header fields that do not exist for a protocol (flags on UDP,
# ports on ICMP).
NOT_APPLICABLE = None


class GroundTruth(enum.Enum):
    LEGITIMATE = "L"
    ATTACK = "A"
    UNKNOWN = "?"


class AttributeKind(enum.IntEnum):
    """The six scored attributes, in canonical order.

    The integer value is the position used for scorebook indexing and for
    the summation order of a packet's score.
    """

    PACKET_SIZE = 0
    TTL = 1
    PROTOCOL = 2
    SRC_PREFIX = 3
    TCP_FLAGS = 4
    SERVER_PORT = 5


# A joint distribution over two attributes is keyed by the ordered pair.
Feature = Union[AttributeKind, Tuple[AttributeKind, AttributeKind]]


@dataclass(frozen=True, slots=True)
class PacketRecord:
    timestamp: float
    src_ip: int
    protocol: int
    packet_size: int
    ttl: int
    tcp_flags: Optional[int] = NOT_APPLICABLE
    dst_port: Optional[int] = NOT_APPLICABLE
    ground_truth: GroundTruth = GroundTruth.UNKNOWN

    def __post_init__(self):
        if not self.timestamp >= 0:
            raise ValueError(f"timestamp must be non-negative, got {self.timestamp}")
        if not 0 <= self.src_ip <= 0xFFFFFFFF:
            raise ValueError(f"src_ip out of IPv4 range: {self.src_ip}")
        if not 0 <= self.protocol <= 255:
            raise ValueError(f"protocol must be in 0..255, got {self.protocol}")
        if not 20 <= self.packet_size <= 65535:
            raise ValueError(f"packet_size must be in 20..65535, got {self.packet_size}")
        if not 0 <= self.ttl <= 255:
            raise ValueError(f"ttl must be in 0..255, got {self.ttl}")
        if self.protocol == TCP:
            if self.tcp_flags is None or not 0 <= self.tcp_flags <= 255:
                raise ValueError(f"TCP packet needs tcp_flags in 0..255, got {self.tcp_flags}")
        elif self.tcp_flags is not None:
            raise ValueError("tcp_flags only applies to TCP packets")
        if self.protocol in (TCP, UDP):
            if self.dst_port is None or not 0 <= self.dst_port <= 65535:
                raise ValueError(f"dst_port must be in 0..65535, got {self.dst_port}")
        elif self.dst_port is not None:
            raise ValueError("dst_port only applies to TCP/UDP packets")

    @property
    def src(self) -> str:
        return str(ipaddress.IPv4Address(self.src_ip))


def parse_ipv4(text: str) -> int:
    return int(ipaddress.IPv4Address(text))


@dataclass(frozen=True)
class BucketConfig:
    """Binning of raw header values into discrete attribute values."""

    size_bucket_edges: Tuple[int, ...] = (64, 128, 256, 512, 1024, 1514)
    ttl_bucket_width: int = 8
    src_prefix_len: int = 16
    joint_pair: Optional[Tuple[AttributeKind, AttributeKind]] = None
    # Derived lookup, not part of equality.
    _counts: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple(int(e) for e in self.size_bucket_edges)
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError(f"size_bucket_edges must be strictly ascending: {edges}")
        if self.ttl_bucket_width < 1:
            raise ValueError("ttl_bucket_width must be positive")
        if not 0 <= self.src_prefix_len <= 32:
            raise ValueError(f"src_prefix_len must be in 0..32, got {self.src_prefix_len}")
        object.__setattr__(self, "size_bucket_edges", edges)
        if self.joint_pair is not None:
            a, b = (AttributeKind(k) for k in self.joint_pair)
            if a == b:
                raise ValueError("joint_pair needs two distinct attributes")
            if a > b:
                a, b = b, a
            object.__setattr__(self, "joint_pair", (a, b))
        counts = (
            len(edges) + 1,
            -(-256 // self.ttl_bucket_width),
            256,
            1 << self.src_prefix_len,
            257,
            65537,
        )
        object.__setattr__(self, "_counts", counts)
        if self.joint_pair is not None:
            a, b = self.joint_pair
            if counts[a] * counts[b] > MAX_JOINT_BUCKETS:
                raise ValueError(
                    f"joint pair {a.name}x{b.name} has {counts[a] * counts[b]} buckets, "
                    f"more than {MAX_JOINT_BUCKETS}"
                )

    def to_dict(self) -> dict:
        return {
            "size_bucket_edges": list(self.size_bucket_edges),
            "ttl_bucket_width": self.ttl_bucket_width,
            "src_prefix_len": self.src_prefix_len,
            "joint_pair": None if self.joint_pair is None else [k.name for k in self.joint_pair],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BucketConfig":
        pair = d.get("joint_pair")
        return cls(
            size_bucket_edges=tuple(d.get("size_bucket_edges", cls.size_bucket_edges)),
            ttl_bucket_width=int(d.get("ttl_bucket_width", 8)),
            src_prefix_len=int(d.get("src_prefix_len", 16)),
            joint_pair=None if pair is None else tuple(AttributeKind[k] for k in pair),
        )


def bucket_count(kind: Feature, cfg: BucketConfig) -> int:
    """Domain size of an attribute (or joint pair) under ``cfg``.

    TCP flags and server port include a trailing NOT_APPLICABLE bucket.
    """
    if isinstance(kind, tuple):
        a, b = kind
        return cfg._counts[a] * cfg._counts[b]
    return cfg._counts[kind]


def bucketize(packet: PacketRecord, kind: Feature, cfg: BucketConfig) -> int:
    if isinstance(kind, tuple):
        a, b = kind
        return bucketize(packet, a, cfg) * cfg._counts[b] + bucketize(packet, b, cfg)
    if kind == AttributeKind.PACKET_SIZE:
        return bisect_right(cfg.size_bucket_edges, packet.packet_size)
    if kind == AttributeKind.TTL:
        return packet.ttl // cfg.ttl_bucket_width
    if kind == AttributeKind.PROTOCOL:
        return packet.protocol
    if kind == AttributeKind.SRC_PREFIX:
        return packet.src_ip >> (32 - cfg.src_prefix_len) if cfg.src_prefix_len else 0
    if kind == AttributeKind.TCP_FLAGS:
        return 256 if packet.tcp_flags is None else packet.tcp_flags
    if kind == AttributeKind.SERVER_PORT:
        return 65536 if packet.dst_port is None else packet.dst_port
    raise ValueError(f"unknown attribute kind: {kind!r}")


def packet_buckets(packet: PacketRecord, cfg: BucketConfig) -> Tuple[int, ...]:
    """Bucket index of every single attribute, in canonical order."""
    edges = cfg.size_bucket_edges
    prefix = cfg.src_prefix_len
    return (
        bisect_right(edges, packet.packet_size),
        packet.ttl // cfg.ttl_bucket_width,
        packet.protocol,
        packet.src_ip >> (32 - prefix) if prefix else 0,
        256 if packet.tcp_flags is None else packet.tcp_flags,
        65536 if packet.dst_port is None else packet.dst_port,
    )


def scoring_features(cfg: BucketConfig) -> Tuple[Feature, ...]:
    """Features summed into a score.

    Singles in canonical order; a configured joint pair replaces its two
    singles and is appended last.
    """
    if cfg.joint_pair is None:
        return tuple(AttributeKind)
    singles = tuple(k for k in AttributeKind if k not in cfg.joint_pair)
    return singles + (cfg.joint_pair,)


def feature_indices(buckets: Tuple[int, ...], cfg: BucketConfig) -> Tuple[int, ...]:
    """Map single-attribute buckets to per-feature indices for ``scoring_features``."""
    pair = cfg.joint_pair
    if pair is None:
        return buckets
    a, b = pair
    singles = tuple(buckets[k] for k in AttributeKind if k != a and k != b)
    return singles + (buckets[a] * cfg._counts[b] + buckets[b],)
