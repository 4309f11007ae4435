import numpy as np
import pytest

from pulserecon import SamplingConfig, default_pulse, triangle_pulse


@pytest.fixture
def tri():
    return triangle_pulse()


@pytest.fixture
def bump():
    return default_pulse()


@pytest.fixture
def cfg2():
    return SamplingConfig(d=2, tau=0.16)


def exact_trains(pulse, d, tau, m):
    """Trains at the m uniform quantile start times, in curve order."""
    cfg = SamplingConfig(d, tau)
    starts = -cfg.span + (np.arange(1, m + 1) - 0.5) / m * (pulse.Tp + cfg.span)
    from pulserecon import sample_train

    return starts, sample_train(pulse, starts, cfg)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
