import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_autocov(v, j):
    """Literal ``n^-1 sum_{t=j+1}^{n} v_t v_{t-j}`` with a Python loop."""
    n = len(v)
    return sum(v[t] * v[t - j] for t in range(j, n)) / n


def brute_check_loss_argmin(x, tau, grid):
    """Smallest grid point minimizing ``sum rho_tau(x - q)``."""
    def loss(q):
        u = np.asarray(x, dtype=float) - q
        return float(np.sum(u * (tau - (u < 0))))
    vals = [loss(q) for q in grid]
    best = min(vals)
    return next(q for q, v in zip(grid, vals) if v <= best + 1e-12)


ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    """Record and print one acceptance line."""
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
