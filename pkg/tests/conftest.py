import numpy as np
import pytest

from nlsym.assembly import assemble
from nlsym.kernels import constant_kernel, fractional_kernel, truncated_fractional_kernel
from nlsym.lattice import interval, mask_from_domain
from nlsym.semilinear import constant, solve_semilinear


@pytest.fixture(scope="session")
def toy_form():
    """Two unit cells on [0, 2] with J = 1 on |z| <= 3."""
    return assemble(constant_kernel(1, 1.0, 3.0), mask_from_domain(interval(0.0, 2.0), 1.0))


@pytest.fixture(scope="session")
def frac_kernel():
    return fractional_kernel(1, 0.5)


@pytest.fixture(scope="session")
def frac_form(frac_kernel):
    return assemble(frac_kernel, mask_from_domain(interval(-1.0, 1.0), 1 / 16))


@pytest.fixture(scope="session")
def frac_solution(frac_form):
    rep = solve_semilinear(frac_form, constant(1.0))
    assert rep.converged
    return rep


@pytest.fixture(scope="session")
def trunc_form():
    k = truncated_fractional_kernel(1, 0.5, 1.0, strictness_radius=1.0)
    return assemble(k, mask_from_domain(interval(-1.0, 1.0), 1 / 16))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "seconds": 0.0})
    if call.when == "call":
        entry["seconds"] += call.duration
    if call.excinfo is not None:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        verdict = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"A{number:<2} {verdict}  {e['title']} ({e['seconds']:.2f}s)")
