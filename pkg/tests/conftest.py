import pytest

from toric_hdi.fan import hirzebruch_surface, product_variety, projective_space, star_subdivision
from toric_hdi.maps import ToricMorphism

_acceptance = {}


@pytest.fixture(scope="session")
def P1():
    return projective_space(1)


@pytest.fixture(scope="session")
def P2():
    return projective_space(2)


@pytest.fixture(scope="session")
def F1():
    return hirzebruch_surface(1)


@pytest.fixture(scope="session")
def phi(F1, P1):
    """Bundle projection F1 -> P1."""
    return ToricMorphism(P1, F1, [[1, 0]])


@pytest.fixture(scope="session")
def psi(F1, P2):
    """Blowdown F1 -> P2; the second ray (0, 1) is sent to (-1, 0), the exceptional one."""
    return ToricMorphism(P2, F1, [[0, -1], [1, 0]])


@pytest.fixture(scope="session")
def blowup_threefold(F1, P1):
    """F1 x P1 blown up along the curve of the cone on (0,1,0) and (0,0,-1)."""
    return star_subdivision(product_variety(F1, P1), [1, 5])


@pytest.fixture(scope="session")
def theta(blowup_threefold, F1):
    return ToricMorphism(F1, blowup_threefold, [[1, 0, 0], [0, 1, 0]])


def divisor_on_rays(X, values):
    """Coefficients from a ``{ray: coefficient}`` map; other rays get 0."""
    index = {r: i for i, r in enumerate(X.rays)}
    coeffs = [0] * X.n_rays
    for ray, a in values.items():
        coeffs[index[ray]] = a
    return tuple(coeffs)


@pytest.fixture(scope="session")
def theta_divisor(blowup_threefold):
    return divisor_on_rays(blowup_threefold, {(0, 0, 1): -2, (0, 1, -1): -2})


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        status = "PASS" if _acceptance[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
