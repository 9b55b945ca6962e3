from __future__ import annotations

from pathlib import Path

import pytest

from evmap import Frame

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def sensor_frames() -> tuple[Frame, Frame]:
    e = Frame("E", ("e1", "e2", "e3"))
    h = Frame("H", ("a1", "a2", "a3", "a4", "a5"))
    return e, h
