import os
import sys
from dataclasses import dataclass

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from flowcheck import Dimension  # noqa: E402
from flowcheck.model_blp import build_blp  # noqa: E402
from flowcheck.valleys import (ValleySpec, construct_x_flow, construct_y_flow,  # noqa: E402
                               construct_z_flow, counterexample_config, gen_valley_instance)

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

VALLEY32_FLOW = 32 * 81

# one pass/fail line per acceptance criterion, filled in as the tests report
ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        verdict = "PASS" if report.passed else "FAIL"
        ACCEPTANCE[number] = f"[{verdict}] criterion {number}: {title} ({report.duration:.2f}s)"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])


@dataclass
class Valley32:
    spec: ValleySpec
    instance: object
    x: object
    y: object
    z: object
    config: object
    model: object


@pytest.fixture(scope="session")
def valley32():
    """The 32-node single-pair, three-path construction with its restricted z model."""
    spec = ValleySpec(total_flow=VALLEY32_FLOW)
    instance = gen_valley_instance(spec)
    x = construct_x_flow(spec)
    config = counterexample_config(spec, x, Dimension.Z)
    y = construct_y_flow(x, config, spec.n)
    z = construct_z_flow(x, y, config, spec.n)
    return Valley32(spec, instance, x, y, z, config, build_blp(instance, config))


@pytest.fixture(scope="session")
def valley32_report(valley32):
    from flowcheck.checker import check
    return check(valley32.model, valley32.z, instance=valley32.instance)
