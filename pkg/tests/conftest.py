import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or "::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        crit = int(name.split("_")[2])
        detail = dict(report.user_properties).get("detail", "")
        prev = _ACCEPTANCE.get(crit, ("PASS", []))
        status = prev[0] if report.outcome == "passed" else "FAIL"
        _ACCEPTANCE[crit] = (status, prev[1] + ([f"{name}: {detail}"] if detail else [name]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE):
        status, parts = _ACCEPTANCE[crit]
        terminalreporter.write_line(f"criterion {crit}: {status} | " + "; ".join(parts))
