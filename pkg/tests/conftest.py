import pytest

from semidirac import DiskIndicator, Model, Potential, make_basis
from semidirac.assembly import assemble_parts

DELTA = 5.0
DISK = DiskIndicator(2.0, -1.0)


@pytest.fixture(scope="session")
def symmetric_potential():
    return Potential(v12=DISK)


@pytest.fixture(scope="session")
def lower_potential():
    return Potential(v11=DiskIndicator(2.0, 0.2), v22=DiskIndicator(2.0, -0.9), v12=DISK)


@pytest.fixture(scope="session")
def default_basis():
    """Default production basis: 29 x 29 cell-centred lattice on [-8, 8]^2."""
    return make_basis()


@pytest.fixture(scope="session")
def symmetric_parts(default_basis, symmetric_potential):
    return assemble_parts(Model(DELTA, 0.0, symmetric_potential), default_basis)


@pytest.fixture(scope="session")
def small_basis():
    return make_basis((-4.0, 4.0, -4.0, 4.0), 64, "grid")


_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record ``(number, ok, detail)`` for the end-of-run acceptance summary."""
    def record(number: int, ok: bool, detail: str) -> bool:
        _CRITERIA[number] = (bool(ok), detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
