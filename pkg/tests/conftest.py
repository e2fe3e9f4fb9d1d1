import numpy as np
import pytest

from mcfswitch.config import load_config

_criteria = {}


@pytest.fixture
def cfg():
    return load_config()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome == "failed":
        key = props["criterion"]
        prev = _criteria.get(key)
        if prev is None or prev[0] == "PASS":
            _criteria[key] = ("PASS" if report.passed else "FAIL", props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        status, detail = _criteria[key]
        terminalreporter.write_line(f"criterion {key}: {status}  {detail}".rstrip())
