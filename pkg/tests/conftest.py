import numpy as np
import pytest

from weakcond.dist import SigmaLaw
from weakcond.eig import spectral_data
from weakcond.fixtures import demo_pencil
from weakcond.polymat import MatrixPolynomial


@pytest.fixture(scope="session")
def L():
    return demo_pencil()


@pytest.fixture(scope="session")
def SL(L):
    return spectral_data(L, 1.0)


@pytest.fixture(scope="session")
def law_L(SL):
    return SigmaLaw.from_spectral(SL)


@pytest.fixture(scope="session")
def diag12():
    """diag(x - 1, x - 2)."""
    return MatrixPolynomial.from_coeffs([np.diag([-1.0, -2.0]), np.eye(2)])


def random_poly(rng, n, d, complex_=False):
    c = rng.standard_normal((d + 1, n, n))
    if complex_:
        c = c + 1j * rng.standard_normal((d + 1, n, n))
    return MatrixPolynomial(c, "complex" if complex_ else "real")


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        num = int(name.split("_")[2])
        verdict = "PASS" if _ACCEPTANCE[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  ({name})")
