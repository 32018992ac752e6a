import numpy as np
import pytest

from ris_iscc import build_default_scenario, sample_channels

# Acceptance checks append (label, passed, detail) here; printed at the end.
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@pytest.fixture
def small_world():
    s = build_default_scenario(4, 8, 3)
    return s, sample_channels(s, 3)


@pytest.fixture
def default_world():
    s = build_default_scenario(16, 40, 11)
    return s, sample_channels(s, 11)
