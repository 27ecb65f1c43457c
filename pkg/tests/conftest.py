from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lcgeom import (Ellipsoid, GaugeSquare, LinearImage, PBall, PerturbedSphere, PowerSum,  # noqa: E402
                    Quadratic, gaussian)

EX34_OFFSET = math.log(2 * math.gamma(1 / 3) * 3 ** (-2 / 3))


def example34_spec() -> PowerSum:
    return PowerSum(3.0, 1 / 3, EX34_OFFSET)


def family_battery() -> dict:
    """Smooth and singular families in n = 1, 2."""
    return {
        "gauss1": gaussian(),
        "gauss2_corr": Quadratic(np.array([[2.0, 0.5], [0.5, 0.625]]), np.array([0.3, -0.2]), 0.4),
        "ex34_p3": example34_spec(),
        "powersum_p1.5": PowerSum(1.5, 0.7),
        "powersum_p4_2d": PowerSum(4.0, 0.5, 0.0, 2),
        "ellipse_gauge": GaugeSquare(Ellipsoid.from_axes([2.0, 1.0])),
        "pball4_gauge": GaugeSquare(PBall(4.0, (1.0, 1.0))),
        "perturbed_gauge": GaugeSquare(PerturbedSphere(2, 0.1, ((0.5, 3, 0.0),))),
        "sheared_p4": LinearImage(PowerSum(4.0, 0.5, 0.0, 2), np.array([[1.2, 0.3], [0.0, 0.9]])),
    }


@pytest.fixture(scope="session")
def battery():
    return family_battery()


@pytest.fixture(scope="session")
def disk():
    return Ellipsoid.from_axes([1.0, 1.0])


@pytest.fixture(scope="session")
def ellipse():
    return Ellipsoid.from_axes([2.0, 1.0])


@pytest.fixture(scope="session")
def perturbed():
    return PerturbedSphere(2, 0.1, ((0.5, 3, 0.0),))


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; printed again in the terminal summary."""
    log = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        log.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_ACCEPTANCE_KEY, [])
    if log:
        terminalreporter.section("acceptance")
        for _, line in sorted(log):
            terminalreporter.write_line(line)
