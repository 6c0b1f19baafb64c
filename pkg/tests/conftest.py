import math

import pytest

from nhblockade.model import ModelParams

EP_L1, EP_L2 = 1.5 - 0.355j, 1.4 - 0.645j
NON_EP_L1, NON_EP_L2 = 1.5 - 0.5j, 1.4 - 0.5j


@pytest.fixture
def ep_params():
    return ModelParams(EP_L1, EP_L2, 4, 0.1171 * math.pi, 2.0, 2.0, F=0.1)


@pytest.fixture
def non_ep_params():
    return ModelParams(NON_EP_L1, NON_EP_L2, 4, 0.125 * math.pi, 2.0, 2.0, F=0.1)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion and fail on FAIL."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}: {detail}"
        request.config.stash[ACCEPTANCE_KEY].append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
