import pytest

from swarm_feasibility.geometry import ArenaSpec


class FixedUniforms:
    """Stand-in for a Generator whose ``random()`` replays given values."""

    def __init__(self, *values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


@pytest.fixture
def arena():
    return ArenaSpec(20.0)


_CRITERIA: dict = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's verdict for the end-of-run report.

    A test calls ``criterion(number, name, passed, detail)`` once it has
    measured the quantity; the assertion in the test itself stays the gate.
    """

    def record(number, name, passed, detail=""):
        _CRITERIA[number] = (name, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, passed, detail = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {name} -- {detail}")
