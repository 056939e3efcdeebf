import pytest

from repeater_lnc.channel import EXAMPLE_CHANNEL

# filled by the acceptance suite, one line per criterion
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def example_ch():
    return EXAMPLE_CHANNEL


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
