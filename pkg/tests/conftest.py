import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from upq_currents.group import Signature

settings.register_profile(
    "repo",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

SIGS = [Signature(p, q) for p in range(1, 4) for q in range(p, 4)]
SIGS_WITH_Z = [s for s in SIGS if s.m > 0]

seeds = st.integers(min_value=0, max_value=2**32 - 1)
sigs = st.sampled_from(SIGS)
sigs_with_z = st.sampled_from(SIGS_WITH_Z)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
