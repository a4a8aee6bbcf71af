import pytest

from localbenford import kernels


@pytest.fixture(params=kernels.available())
def backend(request):
    """Run the test once per available kernel backend."""
    with kernels.using(request.param):
        yield request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
