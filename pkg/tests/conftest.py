import numpy as np
import pytest

from tikhonov_nesterov import paper_quadratic, psd_quadratic, shifted_quadratic


def rank_two_psd():
    # 3x3 PSD matrix of rank 2 with b in its range
    M = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0]])
    A = M.T @ M
    b = A @ np.array([1.0, -1.0, 0.5])
    return psd_quadratic(A, b)


def benchmark_problems():
    return [paper_quadratic(1.0, 5.0), shifted_quadratic([2.0, 0.0]), rank_two_psd()]


@pytest.fixture(params=["rank_one", "shifted", "psd"])
def benchmark(request):
    return dict(zip(["rank_one", "shifted", "psd"], benchmark_problems()))[request.param]


# acceptance lines, printed together at the end of the session
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
