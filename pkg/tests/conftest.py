import pytest

from pinchplace.model import ServiceArea, SystemParams


@pytest.fixture
def area():
    return ServiceArea(60.0, 5.0)


@pytest.fixture
def params():
    # f_c = 28 GHz, d = 3 m, sigma^2 = -90 dBm, n_eff = 1.4, L_x = 60 m
    return SystemParams()


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def report_criterion(request):
    """Record one acceptance line; the lines are echoed after the run."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
