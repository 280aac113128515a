import sys

import pytest

from mfvol import simlab


@pytest.fixture(scope="session")
def scenario_dir(tmp_path_factory):
    """One small synthetic scenario shared by the slower tests."""
    out = tmp_path_factory.mktemp("scenario")
    spec = simlab.ScenarioSpec(seed=7, months=14, n_lags=6)
    simlab.gen_full_scenario(spec, str(out))
    return out


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance scoreboard after the usual pytest output."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None) if module else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
