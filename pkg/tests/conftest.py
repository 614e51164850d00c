import math
import sys

import numpy as np
import pytest

from curvlab.chart import builtin_surface

SPHERE_ORIGIN = {"R": 1.0, "axis": "x", "center": [0.0, 0.0, 1.0]}
SPHERE_BASE = (math.pi / 2, -math.pi / 2)  # parameter point of the origin on that sphere


def random_points(chart, n=100, seed=0, margin=0.05):
    """Uniform interior parameter points, kept away from the domain edge."""
    rng = np.random.default_rng(seed)
    u0, u1, v0, v1 = chart.domain.bbox
    out_u, out_v = [], []
    while len(out_u) < n:
        u = rng.uniform(u0, u1, 4 * n)
        v = rng.uniform(v0, v1, 4 * n)
        keep = chart.domain.contains(u, v, margin * min(u1 - u0, v1 - v0))
        out_u.extend(u[keep])
        out_v.extend(v[keep])
    return np.array(out_u[:n]), np.array(out_v[:n])


@pytest.fixture(scope="session")
def plane():
    return builtin_surface("plane", {})


@pytest.fixture(scope="session")
def sphere():
    return builtin_surface("sphere", {"R": 1.0})


@pytest.fixture(scope="session")
def sphere_o():
    return builtin_surface("sphere", SPHERE_ORIGIN)


@pytest.fixture(scope="session")
def cylinder1():
    return builtin_surface("cylinder", {"R": 1.0})


@pytest.fixture(scope="session")
def cylinder2():
    return builtin_surface("cylinder", {"R": 2.0})


@pytest.fixture(scope="session")
def catenoid():
    return builtin_surface("catenoid", {})


@pytest.fixture(scope="session")
def shifted_catenoid():
    return builtin_surface("shifted_catenoid", {})


@pytest.fixture(scope="session")
def cx2():
    return builtin_surface("counterexample", {"alpha": 0.3, "eps": 1e-2})


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
