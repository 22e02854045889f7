from pathlib import Path

import numpy as np
import pytest

from rqat_inr.imageio import load_image
from rqat_inr.siren import ImageBuffer

DATA = Path(__file__).parent / "data"

_acceptance_lines = []


def record_criterion(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def crop32():
    return load_image(DATA / "astronaut_crop32.png")


@pytest.fixture(scope="session")
def crop16(crop32):
    return ImageBuffer.from_array(crop32.to_array()[8:24, 8:24])


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
