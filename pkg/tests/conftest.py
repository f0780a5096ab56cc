import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from conecert import formats
from conecert.qclp import design_plant, insulin_plant
from conecert.switch_cert import certify

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=1000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def insulin_design():
    return design_plant(insulin_plant())


@pytest.fixture(scope="session")
def insulin_sys(insulin_design):
    return insulin_design.closed_loop


@pytest.fixture(scope="session")
def insulin_cert(insulin_sys):
    return certify(insulin_sys, 1, (24, 6))


@pytest.fixture(scope="session")
def second_order():
    return formats.load_system(DATA / "second_order.sys")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(key, ok, detail):
        ACCEPTANCE[key] = f"criterion {key:<3} {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE[key])
        assert ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abcde")), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
