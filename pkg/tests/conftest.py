import math

import numpy as np
import pytest

from brdf_sampler.geometry import HALF_PI, TWO_PI, Direction


def random_directions(rng, k):
    """Directions uniform in (cos theta, phi); avoids exact pole and horizon."""
    theta = np.arccos(rng.uniform(1e-6, 1.0, k))
    phi = rng.uniform(0.0, TWO_PI, k)
    return [Direction(t, p) for t, p in zip(theta, phi)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def close(a, b, tol):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


# acceptance results, filled by test_acceptance and printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
