import os

import pytest
from hypothesis import HealthCheck, settings

from btb.divalg import DivisionAlgebra

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def alg22():
    return DivisionAlgebra.standard(2, 2, 16)


@pytest.fixture(scope="session")
def alg21():
    return DivisionAlgebra.standard(2, 1, 24)


@pytest.fixture(scope="session")
def alg24():
    return DivisionAlgebra.standard(2, 4, 12)


@pytest.fixture
def record():
    def _record(k: int, desc: str, ok: bool, note: str = ""):
        ACCEPTANCE[k] = (desc, ok, note)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        desc, ok, note = ACCEPTANCE[k]
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {desc}"
        if note:
            line += f"  [{note}]"
        terminalreporter.write_line(line)
