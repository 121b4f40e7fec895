import mpmath
import pytest

from brsets.lattice import RotationContext
from brsets.region import construct, geometry, initial_basis

mpmath.mp.dps = 80

GOLDEN = mpmath.nstr((mpmath.sqrt(5) - 1) / 2, 60, strip_zeros=False)
SQRT2M1 = mpmath.nstr(mpmath.sqrt(2) - 1, 60, strip_zeros=False)
SQRT3M1 = mpmath.nstr(mpmath.sqrt(3) - 1, 60, strip_zeros=False)


@pytest.fixture(scope="session")
def golden_ctx():
    return RotationContext((GOLDEN,))


@pytest.fixture(scope="session")
def s2_ctx():
    return RotationContext((SQRT2M1, SQRT3M1))


@pytest.fixture(scope="session")
def golden_basis(golden_ctx):
    return construct(golden_ctx, [1])


@pytest.fixture(scope="session")
def golden_geom(golden_basis):
    return geometry(golden_basis, label="golden")


@pytest.fixture(scope="session")
def s2_basis(s2_ctx):
    return construct(s2_ctx, [1])


@pytest.fixture(scope="session")
def s2_geom(s2_basis):
    return geometry(s2_basis, label="s2")


@pytest.fixture(scope="session")
def golden_torus(golden_ctx):
    return geometry(initial_basis(golden_ctx), label="torus")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def _report(name: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
