import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
kappas = st.integers(min_value=1, max_value=3)


def random_tm_array(kappa, seed, low=0.05):
    rng = np.random.default_rng(seed)
    k = kappa + 1
    t = rng.uniform(low, 1.0, (k, k, k))
    return t / t.sum(axis=2, keepdims=True)


_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    """Collects one summary line per acceptance criterion."""

    def log(number, ok, detail, seconds):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({seconds:.2f}s) {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
