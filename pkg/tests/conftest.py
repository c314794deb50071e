import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from pointdist.elasticity import IsotropicModuli

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_TITLES = {
    1: "equilibrium example suite",
    2: "derivative correction reproduction",
    3: "compatibility and Cesaro suite",
    4: "constructive point antiderivatives",
    5: "point-source stress solutions",
    6: "general solution linearity and degrees",
    7: "defect force suite",
    8: "extension theory",
    9: "insufficiency demonstrations",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): test belongs to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes.setdefault(n, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_TITLES):
        if n not in _outcomes:
            continue
        status = "PASS" if all(_outcomes[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n} ({ACCEPTANCE_TITLES[n]}): {status}")


@pytest.fixture(params=[Fraction(0), Fraction(1, 4), Fraction(49, 100)], ids=["nu0", "nu0.25", "nu0.49"])
def moduli(request):
    return IsotropicModuli(Fraction(1), request.param)
