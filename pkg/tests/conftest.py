import math

import numpy as np
import pytest

from twopulse import MediumPrep, make_doppler_quadrature, make_solution

PURE_MU = 202.0  # sharp line, delta_bar tau = 10: kappa = mu tau / 202 = 1


@pytest.fixture(scope="session")
def pure_sharp():
    prep = MediumPrep(1.0, 0.0, 10.0, mu=PURE_MU)
    q = make_doppler_quadrature(10.0)
    return make_solution(prep, 1.0, q)


@pytest.fixture(scope="session")
def mixed_sharp():
    prep = MediumPrep(0.8, 0.2, 10.0, mu=PURE_MU)
    return make_solution(prep, 1.0, make_doppler_quadrature(10.0))


@pytest.fixture(scope="session")
def pure_doppler():
    prep = MediumPrep(1.0, 0.0, 10.0, 0.3, mu=2.0)
    return make_solution(prep, 1.0, make_doppler_quadrature(10.0, 0.3))


def rel_l2(a, b):
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) / np.sum(np.abs(b) ** 2)))


TWO_PI = 2 * math.pi


@pytest.fixture
def acceptance_log(request):
    """Record one pass/fail line per acceptance criterion for the summary."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def log(number, passed, text):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}"
        print(line)
        lines.append(line)
        return passed

    return log


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
