import pytest
from hypothesis import HealthCheck, settings

from packetscore import BucketConfig, build_nominal, generate
from packetscore.pipeline import PeriodConfig, measure_periods
from packetscore.traffic import LegitModel

settings.register_profile(
    "packetscore",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("packetscore")

# Acceptance lines collected by tests/test_acceptance.py.
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def cfg():
    return BucketConfig()


@pytest.fixture(scope="session")
def legit_model():
    return LegitModel.default(rate=1000.0)


@pytest.fixture(scope="session")
def nominal(cfg, legit_model):
    """Nominal profile learned from 100k legitimate packets, 10 periods of 10k."""
    train = generate(legit_model, [], 110.0, seed=11, max_packets=100_000)
    assert len(train) == 100_000
    return build_nominal(measure_periods(train, cfg, PeriodConfig.count(10_000)), cfg)
