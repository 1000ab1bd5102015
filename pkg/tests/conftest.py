from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hilbert_lab.geometry import Ellipse, Polygon  # noqa: E402

SQUARE = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
HEXAGON = [[math.cos(k * math.pi / 3 + 0.3), math.sin(k * math.pi / 3 + 0.3)] for k in range(6)]


@pytest.fixture
def disk():
    return Ellipse.disk()


@pytest.fixture
def ellipse():
    return Ellipse(2.0, 1.0)


@pytest.fixture
def square():
    return Polygon(SQUARE)


@pytest.fixture
def hexagon():
    return Polygon(HEXAGON)


def interior_point(domain, u: float, v: float, shrink: float = 0.95) -> np.ndarray:
    """Map (u, v) in [0, 1]^2 to an interior point: angle 2 pi u, radial fraction v * shrink."""
    theta = 2 * math.pi * u
    b = domain.basepoint
    edge = domain.boundary_point(theta)
    return b + shrink * v * (edge - b)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Remember and print one PASS/FAIL line for an acceptance criterion."""
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
