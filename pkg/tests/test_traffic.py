import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import compact_model, packets
from packetscore import (
    AttackModel,
    AttackType,
    AttributeKind,
    BucketConfig,
    GroundTruth,
    NonMonotoneTrace,
    TraceFormatError,
    generate,
    measure,
    read_trace,
    write_trace,
)
from packetscore.traffic import LegitModel, trace_to_string

CFG = BucketConfig()
HEADER = "timestamp,src_ip,protocol,packet_size,ttl,tcp_flags,dst_port,ground_truth\n"


def test_empty_file_gives_empty_stream(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    assert list(read_trace(p)) == []
    p.write_text(HEADER)
    assert list(read_trace(p)) == []


def test_round_trip(tmp_path, legit_model):
    atk = AttackModel(AttackType.FIXED_ATTRIBUTE, 500.0, pinned={AttributeKind.TTL: 5})
    ps = generate(legit_model, [atk], 2.0, seed=3)
    path = tmp_path / "t.csv"
    assert write_trace(path, ps) == len(ps)
    assert list(read_trace(path)) == ps


def test_row_format():
    text = trace_to_string(generate(compact_model(), [], 0.05, seed=1)[:1])
    row = text.splitlines()[1].split(",")
    assert row[1].startswith("10.")
    assert row[5] == "-" or row[5].startswith("0x")


def test_bad_ttl_names_field_and_line():
    text = HEADER + "0.0,10.0.0.1,6,60,64,0x10,80,L\n0.5,10.0.0.1,6,60,300,0x10,80,L\n"
    with pytest.raises(TraceFormatError) as e:
        list(read_trace(io.StringIO(text)))
    assert e.value.line == 3
    assert "ttl" in str(e.value) and "line 3" in str(e.value)


@pytest.mark.parametrize("row", [
    "0.0,10.0.0.1,6,60,64,0x10,80",  # truncated
    "x,10.0.0.1,6,60,64,0x10,80,L",
    "0.0,10.0.0.300,6,60,64,0x10,80,L",
    "0.0,10.0.0.1,6,60,64,-,80,L",  # TCP without flags
    "0.0,10.0.0.1,17,60,64,0x10,53,L",  # flags on UDP
    "0.0,10.0.0.1,6,60,64,0x10,80,Z",
])
def test_malformed_rows(row):
    with pytest.raises(TraceFormatError) as e:
        list(read_trace(io.StringIO(HEADER + row + "\n")))
    assert e.value.line == 2


def test_bad_header():
    with pytest.raises(TraceFormatError):
        list(read_trace(io.StringIO("a,b,c\n")))


def test_timestamp_regression():
    text = HEADER + "1.0,10.0.0.1,17,60,64,-,53,?\n0.5,10.0.0.1,1,60,64,-,-,?\n"
    with pytest.raises(NonMonotoneTrace) as e:
        list(read_trace(io.StringIO(text)))
    assert e.value.line == 3


def test_legit_only_converges_within_three_sigma():
    model = compact_model(rate=10_000.0)
    ps = generate(model, [], 10.0, seed=21, max_packets=100_000)
    assert len(ps) == 100_000
    assert all(p.ground_truth is GroundTruth.LEGITIMATE for p in ps)
    m = measure(ps, CFG)
    n = m.packet_count
    for kind, probs in model.bucket_probabilities(CFG).items():
        counts = m.histograms[kind].counts
        support = probs > 0
        assert counts[~support].sum() == 0
        sigma = np.sqrt(n * probs[support] * (1 - probs[support]))
        assert np.all(np.abs(counts[support] - n * probs[support]) <= 3 * sigma + 1e-9), kind


def test_fixed_attack_fraction(legit_model):
    atk = AttackModel(AttackType.FIXED_ATTRIBUTE, 4000.0, start=2.0, stop=6.0,
                      pinned={AttributeKind.TTL: 5})
    ps = generate(legit_model, [atk], 8.0, seed=4)
    window = [p for p in ps if 2.0 <= p.timestamp < 6.0]
    attack = [p for p in window if p.ground_truth is GroundTruth.ATTACK]
    frac = len(attack) / len(window)
    # rate arithmetic 4 / (4 + 1); ~20k packets in the window
    assert abs(frac - 0.8) < 3 * math.sqrt(0.16 / len(window)) + 0.005
    assert all(p.ttl == 5 for p in attack)
    assert all(2.0 <= p.timestamp < 6.0 for p in attack)


def test_pinned_protocol_fields_consistent(legit_model):
    atk = AttackModel(AttackType.FIXED_ATTRIBUTE, 2000.0,
                      pinned={AttributeKind.PROTOCOL: 17, AttributeKind.SERVER_PORT: 53})
    ps = [p for p in generate(legit_model, [atk], 1.0, seed=2) if p.ground_truth is GroundTruth.ATTACK]
    assert ps and all(p.protocol == 17 and p.dst_port == 53 and p.tcp_flags is None for p in ps)


def test_random_spoof_keeps_other_attributes_legitimate(legit_model):
    atk = AttackModel(AttackType.RANDOM_SPOOF, 3000.0, spoofed=[AttributeKind.SRC_PREFIX])
    ps = [p for p in generate(legit_model, [atk], 1.0, seed=2) if p.ground_truth is GroundTruth.ATTACK]
    assert all(p.ttl in legit_model.ttl for p in ps)
    prefixes = {p.src_ip >> 16 for p in ps}
    assert len(prefixes) > 1000


def test_mimic_blend_extremes(legit_model):
    pins = {AttributeKind.TTL: 5}
    for lam, expect in ((0.0, 1.0), (1.0, 0.0)):
        atk = AttackModel(AttackType.MIMIC_BLEND, 2000.0, pinned=pins, mimic_fraction=lam)
        ps = [p for p in generate(legit_model, [atk], 1.0, seed=6) if p.ground_truth is GroundTruth.ATTACK]
        share = sum(p.ttl == 5 for p in ps) / len(ps)
        assert share == pytest.approx(expect, abs=0.01)


def test_generate_rejects_bad_duration(legit_model):
    with pytest.raises(ValueError):
        generate(legit_model, [], 0.0)


def test_legit_model_validation():
    d = compact_model().to_dict()
    d["ttl"] = {"50": 0.5, "113": 0.4}
    with pytest.raises(ValueError):
        LegitModel.from_dict(d)
    with pytest.raises(ValueError):
        AttackModel(AttackType.MIMIC_BLEND, 1.0, mimic_fraction=1.5)


def test_legit_model_dict_round_trip(legit_model):
    assert LegitModel.from_dict(legit_model.to_dict()) == legit_model


def test_default_model_distributions_sum_to_one(legit_model):
    for name in ("protocol", "packet_size", "ttl", "src_prefixes", "tcp_flags",
                 "tcp_ports", "udp_ports"):
        assert abs(sum(getattr(legit_model, name).values()) - 1.0) <= 1e-9


# Property suites

@given(st.integers(0, 2**31), st.floats(0.0, 1.0))
def test_generator_deterministic_and_sorted(seed, lam):
    model = compact_model(rate=500.0)
    atk = AttackModel(AttackType.MIMIC_BLEND, 300.0, start=0.1, stop=0.3,
                      pinned={AttributeKind.TTL: 5}, mimic_fraction=lam)
    a = generate(model, [atk], 0.5, seed=seed)
    b = generate(model, [atk], 0.5, seed=seed)
    assert trace_to_string(a) == trace_to_string(b)
    assert all(x.timestamp <= y.timestamp for x, y in zip(a, a[1:]))
    # N_m = N_n + N_a
    n_n = sum(p.ground_truth is GroundTruth.LEGITIMATE for p in a)
    n_a = sum(p.ground_truth is GroundTruth.ATTACK for p in a)
    assert n_n + n_a == len(a)


@given(st.lists(packets(), max_size=20))
def test_trace_round_trip_property(ps):
    ps = sorted(ps, key=lambda p: p.timestamp)
    assert list(read_trace(io.StringIO(trace_to_string(ps)))) == ps
