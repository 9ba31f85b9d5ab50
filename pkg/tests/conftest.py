import pytest

from urbanflow.ingestion import write_observations
from urbanflow.providers.offline import SyntheticCity
from urbanflow.synthetic import make_observations


@pytest.fixture(scope="session")
def city():
    return SyntheticCity(seed=7)


@pytest.fixture(scope="session")
def fixture_csv(tmp_path_factory):
    """The seed-7 synthetic observation file used by the CLI tests."""
    path = tmp_path_factory.mktemp("data") / "observations_seed7.csv"
    write_observations(path, make_observations(7))
    return path


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
