import numpy as np
import pytest

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# ------------------------------------------------------------ acceptance report
# tests marked ``criterion(n)`` contribute to one summary line per criterion;
# a criterion passes only if every one of its tests passed (xfail counts as a fail)
ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def record(request):
    """``record(text)`` attaches a detail line to the test's criterion."""
    marker = request.node.get_closest_marker("criterion")

    def add(text):
        if marker is not None:
            ACCEPTANCE.setdefault(marker.args[0], {"outcomes": [], "details": []})["details"].append(text)
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    entry = ACCEPTANCE.setdefault(marker.args[0], {"outcomes": [], "details": []})
    ok = report.passed and not hasattr(report, "wasxfail")
    entry["outcomes"].append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[n]
        ok = bool(entry["outcomes"]) and all(flag for _, flag in entry["outcomes"])
        failed = [name for name, flag in entry["outcomes"] if not flag]
        detail = "; ".join(entry["details"])
        if failed:
            detail += ("; " if detail else "") + "failing: " + ", ".join(failed)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
