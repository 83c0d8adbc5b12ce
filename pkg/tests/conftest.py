import numpy as np
import pytest

from epsuppress.bath import OhmicBath
from epsuppress.codes import encode_logical, get_code
from epsuppress.generators import InteractionSet

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bath():
    return OhmicBath(beta=1.0, mu=1.0, k=1, omega_c=10.0)


@pytest.fixture
def code422():
    return get_code("xxxx_zzzz")


@pytest.fixture
def encoded(code422):
    return encode_logical([("ZI", -0.5)], code422, 2.0)


@pytest.fixture
def weight_one4():
    return InteractionSet.all_weight_one(4)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
