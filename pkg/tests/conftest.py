import pytest

from zcyclic.corpus import builtin_entries, flat_metric, get_entry


@pytest.fixture(scope="session")
def e1():
    return get_entry("E1")


@pytest.fixture(scope="session")
def e2():
    return get_entry("E2")


@pytest.fixture(scope="session")
def e3():
    return get_entry("E3")


@pytest.fixture(scope="session")
def flat():
    return flat_metric()


CORPUS_NAMES = [e.name for e in builtin_entries(include_flagged=True)]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
