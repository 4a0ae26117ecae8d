"""Trace CSV I/O and synthetic legitimate/attack traffic generation."""

from __future__ import annotations

import csv
import enum
import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, TextIO, Union

import numpy as np

from .errors import NonMonotoneTrace, TraceFormatError
from .packet_model import (
    TCP,
    UDP,
    AttributeKind,
    BucketConfig,
    GroundTruth,
    PacketRecord,
    bucket_count,
    parse_ipv4,
)

TRACE_HEADER = (
    "timestamp", "src_ip", "protocol", "packet_size", "ttl",
    "tcp_flags", "dst_port", "ground_truth",
)

ICMP = 1

# ---------------------------------------------------------------------------
# Trace files


def format_row(p: PacketRecord) -> List[str]:
    return [
        repr(float(p.timestamp)),
        p.src,
        str(p.protocol),
        str(p.packet_size),
        str(p.ttl),
        "-" if p.tcp_flags is None else f"0x{p.tcp_flags:02x}",
        "-" if p.dst_port is None else str(p.dst_port),
        p.ground_truth.value,
    ]


def write_trace(path: Union[str, Path, TextIO], packets: Iterable[PacketRecord]) -> int:
    """Write packets as trace CSV; returns the number of rows written."""
    if isinstance(path, (str, Path)):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            return write_trace(fh, packets)
    w = csv.writer(path, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    n = 0
    for p in packets:
        w.writerow(format_row(p))
        n += 1
    return n


def _int_field(row, idx, name, lo, hi, line, base=10) -> int:
    text = row[idx].strip()
    try:
        v = int(text, base)
    except ValueError:
        raise TraceFormatError(f"{name}: not an integer: {text!r}", line) from None
    if not lo <= v <= hi:
        raise TraceFormatError(f"{name}: {v} outside {lo}..{hi}", line)
    return v


def parse_row(row: Sequence[str], line: int) -> PacketRecord:
    if len(row) != len(TRACE_HEADER):
        raise TraceFormatError(f"expected {len(TRACE_HEADER)} fields, got {len(row)}", line)
    try:
        ts = float(row[0])
    except ValueError:
        raise TraceFormatError(f"timestamp: not a number: {row[0]!r}", line) from None
    if not (ts >= 0 and math.isfinite(ts)):
        raise TraceFormatError(f"timestamp: {ts} must be finite and non-negative", line)
    try:
        src = parse_ipv4(row[1].strip())
    except ValueError:
        raise TraceFormatError(f"src_ip: not an IPv4 address: {row[1]!r}", line) from None
    proto = _int_field(row, 2, "protocol", 0, 255, line)
    size = _int_field(row, 3, "packet_size", 20, 65535, line)
    ttl = _int_field(row, 4, "ttl", 0, 255, line)
    flags = None if row[5].strip() == "-" else _int_field(row, 5, "tcp_flags", 0, 255, line, 16)
    port = None if row[6].strip() == "-" else _int_field(row, 6, "dst_port", 0, 65535, line)
    try:
        truth = GroundTruth(row[7].strip())
    except ValueError:
        raise TraceFormatError(f"ground_truth: expected L, A or ?, got {row[7]!r}", line) from None
    try:
        return PacketRecord(ts, src, proto, size, ttl, flags, port, truth)
    except ValueError as e:
        raise TraceFormatError(str(e), line) from None


def read_trace(path: Union[str, Path, TextIO]) -> Iterator[PacketRecord]:
    """Stream records from a trace CSV in file order.

    Raises TraceFormatError (with 1-based line number) on a malformed row or
    a missing header, and NonMonotoneTrace if timestamps go backwards.
    """
    if isinstance(path, (str, Path)):
        with open(path, newline="", encoding="utf-8") as fh:
            yield from read_trace(fh)
        return
    reader = csv.reader(path)
    header = next(reader, None)
    if header is None:
        return
    if tuple(h.strip() for h in header) != TRACE_HEADER:
        raise TraceFormatError(f"bad header {header!r}", 1)
    last = -math.inf
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        p = parse_row(row, line)
        if p.timestamp < last:
            raise NonMonotoneTrace(f"timestamp {p.timestamp} before {last}", line)
        last = p.timestamp
        yield p


def trace_to_string(packets: Iterable[PacketRecord]) -> str:
    buf = io.StringIO()
    write_trace(buf, packets)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Synthetic traffic


def _normalized(dist: Mapping[int, float], name: str) -> Dict[int, float]:
    total = sum(dist.values())
    if not dist or any(v < 0 for v in dist.values()):
        raise ValueError(f"{name}: probabilities must be non-negative and non-empty")
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"{name}: probabilities sum to {total}, not 1")
    return dict(dist)


def _draw(rng: np.random.Generator, dist: Mapping[int, float], n: int) -> np.ndarray:
    values = np.fromiter(dist.keys(), dtype=np.int64, count=len(dist))
    probs = np.fromiter(dist.values(), dtype=float, count=len(dist))
    return values[rng.choice(len(values), size=n, p=probs / probs.sum())]


@dataclass
class LegitModel:
    """Categorical model of a site's legitimate traffic.

    Distributions map raw header values to probabilities. ``src_prefixes``
    maps network addresses (as integers) to probabilities; host bits below
    ``src_prefix_len`` are drawn uniformly. Flags are drawn for TCP only,
    ports for TCP and UDP only.
    """

    rate: float
    protocol: Dict[int, float]
    packet_size: Dict[int, float]
    ttl: Dict[int, float]
    src_prefixes: Dict[int, float]
    tcp_flags: Dict[int, float]
    tcp_ports: Dict[int, float]
    udp_ports: Dict[int, float]
    src_prefix_len: int = 16

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        for name in ("protocol", "packet_size", "ttl", "src_prefixes",
                     "tcp_flags", "tcp_ports", "udp_ports"):
            setattr(self, name, _normalized(getattr(self, name), name))

    @classmethod
    def default(cls, rate: float = 1000.0, seed: int = 7) -> "LegitModel":
        """A plausible web-server profile, built reproducibly from ``seed``."""
        rng = np.random.default_rng(seed)
        # Zipf-like popularity over 300 client /16 networks.
        nets = rng.choice(np.arange(1 << 16), size=300, replace=False)
        w = 1.0 / np.arange(1, 301) ** 0.9
        prefixes = {int(n) << 16: float(x) for n, x in zip(nets, w / w.sum())}
        # Hop counts below common initial TTLs 64, 128 and 255.
        ttl: Dict[int, float] = {}
        for initial, share in ((64, 0.45), (128, 0.45), (255, 0.10)):
            hops = np.arange(3, 25)
            hw = np.exp(-((hops - 12) ** 2) / 30.0)
            for h, x in zip(hops, hw / hw.sum()):
                ttl[initial - int(h)] = ttl.get(initial - int(h), 0.0) + share * float(x)
        return cls(
            rate=rate,
            protocol={TCP: 0.86, UDP: 0.11, ICMP: 0.03},
            packet_size={40: 0.30, 52: 0.12, 60: 0.05, 90: 0.06, 200: 0.07,
                         300: 0.05, 576: 0.08, 1000: 0.05, 1420: 0.07, 1500: 0.15},
            ttl=_renorm(ttl),
            src_prefixes=_renorm(prefixes),
            tcp_flags={0x10: 0.52, 0x18: 0.28, 0x02: 0.08, 0x12: 0.04,
                       0x11: 0.05, 0x04: 0.02, 0x19: 0.01},
            tcp_ports={80: 0.55, 443: 0.35, 22: 0.03, 25: 0.04, 8080: 0.03},
            udp_ports={53: 0.80, 123: 0.15, 161: 0.05},
        )

    def to_dict(self) -> dict:
        def enc(d):
            return {str(k): v for k, v in d.items()}
        return {
            "rate": self.rate,
            "protocol": enc(self.protocol),
            "packet_size": enc(self.packet_size),
            "ttl": enc(self.ttl),
            "src_prefixes": enc(self.src_prefixes),
            "tcp_flags": enc(self.tcp_flags),
            "tcp_ports": enc(self.tcp_ports),
            "udp_ports": enc(self.udp_ports),
            "src_prefix_len": self.src_prefix_len,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LegitModel":
        def dec(x):
            return {int(k): float(v) for k, v in x.items()}
        return cls(
            rate=float(d["rate"]),
            protocol=dec(d["protocol"]),
            packet_size=dec(d["packet_size"]),
            ttl=dec(d["ttl"]),
            src_prefixes=dec(d["src_prefixes"]),
            tcp_flags=dec(d["tcp_flags"]),
            tcp_ports=dec(d["tcp_ports"]),
            udp_ports=dec(d["udp_ports"]),
            src_prefix_len=int(d.get("src_prefix_len", 16)),
        )

    def bucket_probabilities(self, cfg: BucketConfig) -> Dict[AttributeKind, np.ndarray]:
        """Exact per-bucket probability of every attribute under ``cfg``."""
        if cfg.src_prefix_len > self.src_prefix_len:
            raise ValueError("cfg prefix is longer than the model's; host bits would spread")
        out = {k: np.zeros(bucket_count(k, cfg)) for k in AttributeKind}
        p_tcp = self.protocol.get(TCP, 0.0)
        p_udp = self.protocol.get(UDP, 0.0)
        edges = cfg.size_bucket_edges
        for v, p in self.packet_size.items():
            out[AttributeKind.PACKET_SIZE][bisect_right(edges, v)] += p
        for v, p in self.ttl.items():
            out[AttributeKind.TTL][v // cfg.ttl_bucket_width] += p
        for v, p in self.protocol.items():
            out[AttributeKind.PROTOCOL][v] += p
        shift = 32 - cfg.src_prefix_len
        for v, p in self.src_prefixes.items():
            out[AttributeKind.SRC_PREFIX][v >> shift if cfg.src_prefix_len else 0] += p
        flags = out[AttributeKind.TCP_FLAGS]
        for v, p in self.tcp_flags.items():
            flags[v] += p_tcp * p
        flags[256] += 1.0 - p_tcp
        ports = out[AttributeKind.SERVER_PORT]
        for v, p in self.tcp_ports.items():
            ports[v] += p_tcp * p
        for v, p in self.udp_ports.items():
            ports[v] += p_udp * p
        ports[65536] += 1.0 - p_tcp - p_udp
        return out

    def sample_fields(self, rng: np.random.Generator, n: int) -> Dict[str, np.ndarray]:
        proto = _draw(rng, self.protocol, n)
        host_bits = 32 - self.src_prefix_len
        src = _draw(rng, self.src_prefixes, n)
        if host_bits:
            src = src | rng.integers(0, 1 << host_bits, size=n)
        is_tcp = proto == TCP
        is_udp = proto == UDP
        flags = np.where(is_tcp, _draw(rng, self.tcp_flags, n), -1)
        port = np.where(is_tcp, _draw(rng, self.tcp_ports, n),
                        np.where(is_udp, _draw(rng, self.udp_ports, n), -1))
        return {
            "src_ip": src,
            "protocol": proto,
            "packet_size": _draw(rng, self.packet_size, n),
            "ttl": _draw(rng, self.ttl, n),
            "tcp_flags": flags,
            "dst_port": port,
        }


def _renorm(d: Dict[int, float]) -> Dict[int, float]:
    total = math.fsum(d.values())
    out = {k: v / total for k, v in d.items()}
    # Absorb rounding so the sum is within 1e-12 of 1.
    k0 = next(iter(out))
    out[k0] += 1.0 - math.fsum(out.values())
    return out


class AttackType(enum.Enum):
    FIXED_ATTRIBUTE = "fixed"
    RANDOM_SPOOF = "spoof"
    MIMIC_BLEND = "mimic"


_RAW_FIELD = {
    AttributeKind.PACKET_SIZE: "packet_size",
    AttributeKind.TTL: "ttl",
    AttributeKind.PROTOCOL: "protocol",
    AttributeKind.SRC_PREFIX: "src_ip",
    AttributeKind.TCP_FLAGS: "tcp_flags",
    AttributeKind.SERVER_PORT: "dst_port",
}


@dataclass
class AttackModel:
    """One attack source.

    FIXED_ATTRIBUTE pins the attributes in ``pinned`` (raw values, e.g.
    ``{TTL: 5}``) and draws the rest uniformly over their domains.
    RANDOM_SPOOF draws the attributes in ``spoofed`` uniformly and copies the
    rest from the legitimate model, with ``pinned`` overriding both.
    MIMIC_BLEND emits, per packet, a legitimate-model packet with probability
    ``mimic_fraction`` and a FIXED_ATTRIBUTE packet otherwise.
    """

    type: AttackType
    rate: float
    start: float = 0.0
    stop: float = math.inf
    pinned: Dict[AttributeKind, int] = field(default_factory=dict)
    spoofed: Sequence[AttributeKind] = ()
    mimic_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.type = AttackType(self.type)
        self.pinned = {AttributeKind(k): int(v) for k, v in self.pinned.items()}
        self.spoofed = tuple(AttributeKind(k) for k in self.spoofed)
        if not self.rate >= 0:
            raise ValueError("attack rate must be non-negative")
        if not 0.0 <= self.mimic_fraction <= 1.0:
            raise ValueError(f"mimic_fraction must be in [0, 1], got {self.mimic_fraction}")
        if self.stop < self.start:
            raise ValueError("attack stop precedes start")

    def sample_fields(self, rng: np.random.Generator, n: int,
                      legit: LegitModel) -> Dict[str, np.ndarray]:
        uniform = _uniform_fields(rng, n)
        if self.type is AttackType.FIXED_ATTRIBUTE:
            out = uniform
        elif self.type is AttackType.RANDOM_SPOOF:
            out = legit.sample_fields(rng, n)
            for k in self.spoofed:
                out[_RAW_FIELD[k]] = uniform[_RAW_FIELD[k]]
        else:
            base = legit.sample_fields(rng, n)
            mimic = rng.random(n) < self.mimic_fraction
            out = {name: np.where(mimic, base[name], uniform[name]) for name in base}
            for k, v in self.pinned.items():
                out[_RAW_FIELD[k]] = np.where(mimic, out[_RAW_FIELD[k]], v)
            return _fix_protocol_fields(out, rng, mask=~mimic)
        for k, v in self.pinned.items():
            out[_RAW_FIELD[k]] = np.full(n, v, dtype=np.int64)
        return _fix_protocol_fields(out, rng)


def _uniform_fields(rng: np.random.Generator, n: int) -> Dict[str, np.ndarray]:
    return {
        "src_ip": rng.integers(0, 1 << 32, size=n, dtype=np.int64),
        "protocol": rng.choice(np.array([TCP, UDP, ICMP]), size=n),
        "packet_size": rng.integers(40, 1501, size=n),
        "ttl": rng.integers(0, 256, size=n),
        "tcp_flags": rng.integers(0, 256, size=n),
        "dst_port": rng.integers(0, 65536, size=n),
    }


def _fix_protocol_fields(out, rng, mask=None):
    """Make flags and ports consistent with the protocol of each packet."""
    proto = out["protocol"]
    is_tcp = proto == TCP
    has_port = is_tcp | (proto == UDP)
    if mask is None:
        mask = np.ones(len(proto), dtype=bool)
    flags = out["tcp_flags"]
    # TCP packets that came out with a placeholder flag byte get a random one.
    flags = np.where(is_tcp & (flags < 0), rng.integers(0, 256, size=len(proto)), flags)
    out["tcp_flags"] = np.where(mask & ~is_tcp, -1, flags)
    port = out["dst_port"]
    port = np.where(has_port & (port < 0), rng.integers(0, 65536, size=len(proto)), port)
    out["dst_port"] = np.where(mask & ~has_port, -1, port)
    return out


def _poisson_times(rng: np.random.Generator, rate: float, start: float, stop: float) -> np.ndarray:
    if rate <= 0 or stop <= start:
        return np.empty(0)
    n = rng.poisson(rate * (stop - start))
    return np.sort(rng.uniform(start, stop, size=n))


def _records(times, fields, truth: GroundTruth) -> List[PacketRecord]:
    cols = [fields[k].tolist() for k in
            ("src_ip", "protocol", "packet_size", "ttl", "tcp_flags", "dst_port")]
    out = []
    for t, src, proto, size, ttl, flags, port in zip(times.tolist(), *cols):
        out.append(PacketRecord(
            t, src, proto, size, ttl,
            None if flags < 0 else flags,
            None if port < 0 else port,
            truth,
        ))
    return out


def generate(
    legit: LegitModel,
    attacks: Sequence[AttackModel],
    duration: float,
    seed: int = 0,
    max_packets: Optional[int] = None,
) -> List[PacketRecord]:
    """Labeled packets over ``[0, duration)``, merged in timestamp order.

    Arrivals of every source are Poisson: a Poisson-distributed count placed
    uniformly over the active window. ``max_packets`` truncates the merged
    stream.
    """
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    rng = np.random.default_rng(seed)
    times = _poisson_times(rng, legit.rate, 0.0, duration)
    packets = _records(times, legit.sample_fields(rng, len(times)), GroundTruth.LEGITIMATE)
    for i, a in enumerate(attacks):
        arng = np.random.default_rng([seed, i, a.seed])
        t = _poisson_times(arng, a.rate, max(a.start, 0.0), min(a.stop, duration))
        packets.extend(_records(t, a.sample_fields(arng, len(t), legit), GroundTruth.ATTACK))
    # Stable sort keeps legitimate-before-attack order on exact ties.
    packets.sort(key=lambda p: p.timestamp)
    if max_packets is not None:
        del packets[max_packets:]
    return packets
