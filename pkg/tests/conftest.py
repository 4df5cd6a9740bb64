import pytest

from qd import extremal
from qd.canonical import reduce_canonical
from qd.qform import QuadraticForm

# lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def hyperbolic(n):
    """t0 t1 - t2^2 - ... - tn^2."""
    c = {(0, 1): 1}
    c.update({(i, i): -1 for i in range(2, n + 1)})
    return QuadraticForm(n + 1, c)


@pytest.fixture(scope="session")
def ref_seq():
    """n = 2 reference sequence: t0 t1 - t2^2, seed l = 5, 20 steps."""
    return extremal.build(reduce_canonical(hyperbolic(2)), 20, ell=5)


@pytest.fixture(scope="session")
def ref_xi(ref_seq):
    return extremal.limit_point(ref_seq)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
