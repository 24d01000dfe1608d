import numpy as np
import pytest

from te_mdp.product import ProductMdp


def random_product(rng, n_states=None, n_actions=None, n_expensive=None, concentration=0.5):
    """Small random product MDP whose last state is an absorbing target."""
    n = int(rng.integers(2, 7)) if n_states is None else n_states
    m = int(rng.integers(2, 4)) if n_actions is None else n_actions
    ne = int(rng.integers(1, 3)) if n_expensive is None else n_expensive
    K = rng.dirichlet(np.full(n, concentration), size=(n, m))
    K[n - 1] = 0.0
    K[n - 1, :, n - 1] = 1.0
    acc = np.zeros(n, dtype=bool)
    acc[n - 1] = True
    exp = np.arange(n) % ne
    free = np.arange(n) // ne
    return ProductMdp.from_dense(K, acc, exp, free, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    def _record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
