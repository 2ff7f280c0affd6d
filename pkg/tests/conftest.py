import pytest

from ris_secrecy.scenario import reference_scenario

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion(request):
    """Log one PASS/FAIL line per acceptance criterion; shown in the terminal summary."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def scenario():
    sc = reference_scenario()
    sc.correlations  # computed once per session
    return sc
